"""Genetic search over induction biases (ICET).

An individual is a bit string. In real mode it holds ``n`` 12-bit
pseudo-costs followed by 8-bit fields for ``omega`` and the pruning
confidence ``cf``; every field is Gray-coded. In binary mode it holds one
include bit per test followed by the same two 8-bit fields, and the
inducer is given the true test costs.

Fitness is the average cost of the tree induced on one half of the
training set, measured on the other half; each trial draws a fresh
half/half split.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .cost import evaluate_leaves, leaf_test_costs
from .data import Dataset, sub_split
from .schema import ClassificationCostMatrix, TestCostSchema
from .tree import ICF, DecisionTree, InductionParams, build_tree

COST_BITS = 12
REAL_BITS = 8
COST_MIN, COST_MAX = 1.0, 10000.0
CF_MIN, CF_MAX = 1.0, 100.0
EXCLUSION_THRESHOLD = 9000.0

REAL, BINARY = "real", "binary"


# ---------------------------------------------------------------------------
# Gray code


def gray_encode(value: int, width: int) -> np.ndarray:
    """Binary-reflected Gray codeword of ``value`` as a bit array, MSB first."""
    if not 0 <= value < (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    g = value ^ (value >> 1)
    return np.array([(g >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def gray_decode(bits) -> int:
    g = 0
    for b in bits:
        g = (g << 1) | int(b)
    v = 0
    while g:
        v ^= g
        g >>= 1
    return v


def _decode_fields(bits: np.ndarray, widths: Sequence[int]) -> list[int]:
    out, pos = [], 0
    for w in widths:
        out.append(gray_decode(bits[pos : pos + w]))
        pos += w
    return out


# linear code <-> range maps --------------------------------------------------


def code_to_cost(g: int) -> float:
    return float(round(COST_MIN + g * (COST_MAX - COST_MIN) / ((1 << COST_BITS) - 1)))


def cost_to_code(c: float) -> int:
    g = round((c - COST_MIN) * ((1 << COST_BITS) - 1) / (COST_MAX - COST_MIN))
    return int(min(max(g, 0), (1 << COST_BITS) - 1))


def code_to_omega(g: int) -> float:
    return g / ((1 << REAL_BITS) - 1)


def omega_to_code(w: float) -> int:
    return int(min(max(round(w * ((1 << REAL_BITS) - 1)), 0), (1 << REAL_BITS) - 1))


def code_to_cf(g: int) -> float:
    return CF_MIN + g * (CF_MAX - CF_MIN) / ((1 << REAL_BITS) - 1)


def cf_to_code(cf: float) -> int:
    g = round((cf - CF_MIN) * ((1 << REAL_BITS) - 1) / (CF_MAX - CF_MIN))
    return int(min(max(g, 0), (1 << REAL_BITS) - 1))


def excluded_by_cost(costs) -> frozenset:
    """Positions whose pseudo-cost is above the exclusion threshold."""
    return frozenset(i for i, c in enumerate(costs) if c > EXCLUSION_THRESHOLD)


# ---------------------------------------------------------------------------
# individuals


@dataclass(frozen=True)
class Bias:
    """Decoded bias: per-test costs given to ICF, omega, cf and exclusions.

    ``excluded`` holds test positions (0..n-1), not attribute indices.
    """

    costs: tuple
    omega: float
    cf: float
    excluded: frozenset = frozenset()

    def params(self, tests: Sequence[int], n_attributes: int) -> InductionParams:
        c = np.full(n_attributes, np.nan)
        c[list(tests)] = self.costs
        excluded = frozenset(int(tests[i]) for i in self.excluded)
        return InductionParams(heuristic=ICF(c, self.omega), cf=self.cf, excluded=excluded)

    def to_dict(self) -> dict:
        return {
            "costs": [float(c) for c in self.costs],
            "omega": self.omega,
            "cf": self.cf,
            "excluded": sorted(self.excluded),
        }


def genome_length(n: int, mode: str = REAL) -> int:
    return (COST_BITS * n if mode == REAL else n) + 2 * REAL_BITS


def decode_individual(bits, n: int, mode: str = REAL, true_costs=None) -> Bias:
    """Decode a genome for ``n`` tests.

    In binary mode ``true_costs`` supplies the costs and a 0 bit excludes a
    test.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != genome_length(n, mode):
        raise ValueError(f"genome has {bits.size} bits, expected {genome_length(n, mode)}")
    if mode == REAL:
        codes = _decode_fields(bits, [COST_BITS] * n + [REAL_BITS, REAL_BITS])
        costs = tuple(code_to_cost(g) for g in codes[:n])
        return Bias(costs, code_to_omega(codes[n]), code_to_cf(codes[n + 1]), excluded_by_cost(costs))
    if true_costs is None:
        raise ValueError("binary mode needs the true test costs")
    w, cf = _decode_fields(bits[n:], [REAL_BITS, REAL_BITS])
    excluded = frozenset(int(i) for i in np.flatnonzero(bits[:n] == 0))
    return Bias(tuple(float(c) for c in true_costs), code_to_omega(w), code_to_cf(cf), excluded)


def encode_individual(bias: Bias, mode: str = REAL) -> np.ndarray:
    """Nearest genome for ``bias`` (exact for representable values)."""
    n = len(bias.costs)
    parts = []
    if mode == REAL:
        parts += [gray_encode(cost_to_code(c), COST_BITS) for c in bias.costs]
    else:
        parts.append(np.array([0 if i in bias.excluded else 1 for i in range(n)], dtype=np.uint8))
    parts.append(gray_encode(omega_to_code(bias.omega), REAL_BITS))
    parts.append(gray_encode(cf_to_code(bias.cf), REAL_BITS))
    return np.concatenate(parts)


@dataclass(eq=False)
class BiasIndividual:
    """A genome plus an optional exact phenotype.

    ``override`` pins the decoded bias to values the 8/12-bit fields cannot
    represent exactly (the true costs, omega = 1, cf = 25). It is dropped as
    soon as crossover or mutation changes the bits.
    """

    bits: np.ndarray
    override: Bias | None = None

    def decoded(self, n: int, mode: str = REAL, true_costs=None) -> Bias:
        if self.override is not None:
            return self.override
        return decode_individual(self.bits, n, mode, true_costs)

    def copy(self) -> "BiasIndividual":
        return BiasIndividual(self.bits.copy(), self.override)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    total_trials: int = 1000
    crossover_rate: float = 0.6
    mutation_rate: float = 0.001
    generation_gap: float = 1.0
    elitism_count: int = 1
    rank_min: float = 0.75
    rng_seed: int = 123456789
    mode: str = REAL
    seed_with_true_costs: bool = False

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if not 0.0 <= self.rank_min <= 1.0:
            raise ValueError("rank_min must lie in [0, 1]")
        if self.mode not in (REAL, BINARY):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.generation_gap != 1.0:
            raise ValueError("only full generational replacement (gap 1.0) is supported")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValueError("elitism_count out of range")

    @property
    def generations(self) -> int:
        return max(1, self.total_trials // self.population_size)


def trial_seed(rng_seed: int, trial: int) -> int:
    """Sub-split seed of a fitness trial."""
    return int(np.random.SeedSequence([rng_seed, trial]).generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# fitness


@dataclass(frozen=True)
class FitnessRecord:
    individual: BiasIndividual
    fitness: float  # average cost in dollars, lower is better
    seed: int
    trial: int


class CostProblem:
    """The tests, true costs and cost tables shared by every fitness call."""

    def __init__(self, train: Dataset, schema: TestCostSchema, matrix: ClassificationCostMatrix):
        self.train = train
        self.schema = schema
        self.matrix = matrix
        names = [a.name for a in train.attributes]
        self.bound = schema.bind(names)
        self.tests = [int(i) for i in np.flatnonzero(self.bound.usable & self.bound.priced)]
        self.true_costs = schema.true_costs(names)[self.tests]

    @property
    def n_tests(self) -> int:
        return len(self.tests)

    def true_bias(self) -> Bias:
        return Bias(tuple(float(c) for c in self.true_costs), 1.0, 25.0)

    def params(self, bias: Bias) -> InductionParams:
        return bias.params(self.tests, self.train.n_attributes)

    def average_cost(self, tree: DecisionTree, test: Dataset) -> float:
        costs, _ = leaf_test_costs(tree, self.bound)
        tests, errors, _ = evaluate_leaves(tree, test, costs, self.matrix)
        return (tests + errors) / len(test) / 100.0

    def fitness(self, bias: Bias, seed: int) -> float:
        pair = sub_split(self.train, seed)
        tree = build_tree(pair.train, self.params(bias))
        return self.average_cost(tree, pair.test)


def fitness(individual, train: Dataset, schema: TestCostSchema, matrix: ClassificationCostMatrix, trial_seed: int) -> float:
    """Average cost on the sub-test half of a real-mode individual's tree."""
    problem = CostProblem(train, schema, matrix)
    bias = _as_bias(individual, problem, REAL)
    return problem.fitness(bias, trial_seed)


def binary_mode_fitness(individual, train: Dataset, schema: TestCostSchema, matrix: ClassificationCostMatrix, trial_seed: int) -> float:
    """As :func:`fitness`, for a binary-mode genome (true costs, include bits)."""
    problem = CostProblem(train, schema, matrix)
    bias = _as_bias(individual, problem, BINARY)
    return problem.fitness(bias, trial_seed)


def _as_bias(individual, problem: CostProblem, mode: str) -> Bias:
    if isinstance(individual, Bias):
        return individual
    if isinstance(individual, BiasIndividual):
        return individual.decoded(problem.n_tests, mode, problem.true_costs)
    return decode_individual(individual, problem.n_tests, mode, problem.true_costs)


# ---------------------------------------------------------------------------
# reproduction


def rank_expectations(fitnesses, rank_min: float) -> np.ndarray:
    """Expected offspring per individual under linear ranking (lower fitness ranks higher)."""
    f = np.asarray(fitnesses, dtype=float)
    n = f.size
    if n == 1:
        return np.ones(1)
    # best first; ties keep population order
    order = np.argsort(f, kind="stable")
    rank_max = 2.0 - rank_min
    e = np.empty(n)
    e[order] = rank_max - (rank_max - rank_min) * np.arange(n) / (n - 1)
    return e


def stochastic_universal_sampling(expectations, k: int, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(expectations)
    scale = cum[-1] / k
    pointers = (rng.uniform(0.0, 1.0) + np.arange(k)) * scale
    return np.minimum(np.searchsorted(cum, pointers, side="right"), len(cum) - 1)


def two_point_crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator):
    n = a.size
    if n < 2:
        return a.copy(), b.copy()
    i, j = sorted(rng.choice(n + 1, size=2, replace=False))
    c, d = a.copy(), b.copy()
    c[i:j], d[i:j] = b[i:j], a[i:j]
    return c, d


def mutate(bits: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        return bits
    flips = rng.random(bits.size) < rate
    if flips.any():
        bits = bits.copy()
        bits[flips] ^= 1
    return bits


def _child(bits: np.ndarray, parent: BiasIndividual) -> BiasIndividual:
    keep = parent.override is not None and np.array_equal(bits, parent.bits)
    return BiasIndividual(bits, parent.override if keep else None)


def next_generation(population: Sequence[BiasIndividual], fitnesses, cfg: GAConfig, rng: np.random.Generator):
    """Return ``(elite, offspring)``.

    The elite are carried over verbatim; the offspring are bred by linear
    rank selection (stochastic universal sampling), two-point crossover and
    bit-flip mutation.
    """
    n = len(population)
    if n != cfg.population_size:
        raise ValueError(f"population has {n} members, expected {cfg.population_size}")
    f = np.asarray(fitnesses, dtype=float)
    order = np.argsort(f, kind="stable")
    elite = [int(i) for i in order[: cfg.elitism_count]]
    n_children = n - len(elite)
    picks = stochastic_universal_sampling(rank_expectations(f, cfg.rank_min), n_children + 1, rng)
    rng.shuffle(picks)
    offspring: list[BiasIndividual] = []
    for k in range(0, n_children, 2):
        pa, pb = population[picks[k]], population[picks[k + 1]]
        if rng.random() < cfg.crossover_rate:
            ca, cb = two_point_crossover(pa.bits, pb.bits, rng)
        else:
            ca, cb = pa.bits.copy(), pb.bits.copy()
        for bits, parent in ((ca, pa), (cb, pb)):
            if len(offspring) < n_children:
                offspring.append(_child(mutate(bits, cfg.mutation_rate, rng), parent))
    return elite, offspring


# ---------------------------------------------------------------------------
# the search


@dataclass(frozen=True)
class GenerationLog:
    generation: int
    trials: int
    best: float
    mean: float
    best_so_far: float
    best_bias: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "generation": self.generation,
                "trials": self.trials,
                "best": self.best,
                "mean": self.mean,
                "best_so_far": self.best_so_far,
                "best_bias": self.best_bias,
            },
            sort_keys=True,
        )


@dataclass
class IcetResult:
    tree: DecisionTree
    bias: Bias
    best_fitness: float
    log: list = field(default_factory=list)
    evaluations: int = 0
    seconds: float = 0.0


def initial_population(problem: CostProblem, cfg: GAConfig, rng: np.random.Generator) -> list[BiasIndividual]:
    length = genome_length(problem.n_tests, cfg.mode)
    pop = [BiasIndividual(rng.integers(0, 2, size=length, dtype=np.uint8)) for _ in range(cfg.population_size)]
    if cfg.seed_with_true_costs:
        bias = problem.true_bias()
        pop[0] = BiasIndividual(encode_individual(bias, cfg.mode), bias)
    return pop


def icet(train: Dataset, schema: TestCostSchema, matrix: ClassificationCostMatrix, cfg: GAConfig | None = None) -> IcetResult:
    """Evolve a bias on ``train`` and induce the final tree with the fittest one.

    The elite keeps its recorded fitness rather than being re-scored, so a
    run makes ``pop + (generations - 1) * (pop - elitism)`` evaluations.
    """
    cfg = cfg or GAConfig()
    start = time.perf_counter()
    problem = CostProblem(train, schema, matrix)
    n = problem.n_tests
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.rng_seed)))
    population = initial_population(problem, cfg, rng)
    decode = lambda ind: ind.decoded(n, cfg.mode, problem.true_costs)  # noqa: E731

    trial = 0

    def evaluate(ind):
        nonlocal trial
        seed = trial_seed(cfg.rng_seed, trial)
        rec = FitnessRecord(ind, problem.fitness(decode(ind), seed), seed, trial)
        trial += 1
        return rec

    records = [evaluate(ind) for ind in population]
    best = min(records, key=lambda r: r.fitness)
    log = []
    for gen in range(cfg.generations):
        if gen > 0:
            elite, offspring = next_generation([r.individual for r in records], [r.fitness for r in records], cfg, rng)
            records = [records[i] for i in elite] + [evaluate(ind) for ind in offspring]
        gen_best = min(records, key=lambda r: r.fitness)
        if gen_best.fitness < best.fitness:
            best = gen_best
        log.append(
            GenerationLog(
                generation=gen,
                trials=trial,
                best=gen_best.fitness,
                mean=float(np.mean([r.fitness for r in records])),
                best_so_far=best.fitness,
                best_bias=decode(best.individual).to_dict(),
            )
        )
    bias = decode(best.individual)
    tree = build_tree(train, problem.params(bias))
    return IcetResult(tree, bias, best.fitness, log, trial, time.perf_counter() - start)
