"""Benchmark protocol: canonical splits, algorithm cells, summaries and plots.

Every dataset is split into train/test pairs from fixed seeds and the same
pairs are reused by every algorithm and cost setting. Trees from EG2,
CS-ID3, IDX and C4.5 do not depend on the classification costs, so they
are induced once per split and re-costed; ICET is re-run for every
training cost setting.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cost import evaluate_leaves, leaf_test_costs, standard_cost, total_test_cost
from .data import Dataset, SplitPair, default_data_dir, load_bundled, random_split
from .genetic import BINARY, REAL, GAConfig, icet
from .schema import CostConfig, TestCostSchema, load_cost_config
from .tree import CSID3, ICF, IDX, DecisionTree, GainRatio, InductionParams, build_tree

DATASETS = ("bupa", "heart", "hepatitis", "pima", "thyroid")
ALGORITHMS = ("ICET", "EG2", "CSID3", "IDX", "C45")
ERROR_COSTS = (10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 10000.0)
VARIANTS = ("baseline", "no-delay", "no-discount", "ratios", "mismatch", "seeded", "binary", "mutation-only")

# (negative error cost, positive error cost) for each ratio negative/positive
RATIO_COSTS = (
    (0.125, 50.0, 400.0),
    (0.25, 50.0, 200.0),
    (0.5, 50.0, 100.0),
    (1.0, 50.0, 50.0),
    (2.0, 100.0, 50.0),
    (4.0, 200.0, 50.0),
    (8.0, 400.0, 50.0),
)
MISMATCH_TRAIN_COST = 100.0
MISMATCH_TEST_COSTS = (50.0, 100.0, 500.0)

SCALES = {
    "full": {"splits": 10, "total_trials": 1000, "population_size": 50},
    "desk": {"splits": 3, "total_trials": 200, "population_size": 20},
}

FULL_WINDOW = (10.0, 10000.0)
LOW_WINDOW = (10.0, 100.0)


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple = DATASETS
    algorithms: tuple = ALGORITHMS
    error_costs: tuple = ERROR_COSTS
    splits: int | None = None  # None: from the scale preset
    seed: int = 123456789
    variant: str = "baseline"
    scale: str = "full"
    mutation_rate: float = 0.10  # mutation-only variant
    data_dir: str | None = None
    workers: int = 1
    standard_with_discounts: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ExperimentError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if self.scale not in SCALES:
            raise ExperimentError(f"unknown scale {self.scale!r}")
        for d in self.datasets:
            if d not in DATASETS:
                raise ExperimentError(f"unknown dataset {d!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ExperimentError(f"unknown algorithm {a!r}")
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "error_costs", tuple(float(k) for k in self.error_costs))

    @property
    def n_splits(self) -> int:
        return self.splits if self.splits is not None else SCALES[self.scale]["splits"]

    def ga_config(self, rng_seed: int) -> GAConfig:
        preset = SCALES[self.scale]
        ga = GAConfig(
            population_size=preset["population_size"],
            total_trials=preset["total_trials"],
            rng_seed=rng_seed,
            seed_with_true_costs=self.variant == "seeded",
            mode=BINARY if self.variant == "binary" else REAL,
        )
        if self.variant == "mutation-only":
            ga = replace(ga, crossover_rate=0.0, mutation_rate=self.mutation_rate)
        return ga

    def cost_settings(self) -> list["CostSetting"]:
        if self.variant == "ratios":
            return [CostSetting(r, (pos, neg), (pos, neg)) for r, neg, pos in RATIO_COSTS]
        if self.variant == "mismatch":
            k = MISMATCH_TRAIN_COST
            return [CostSetting(t, (k, k), (t, t)) for t in MISMATCH_TEST_COSTS]
        return [CostSetting(k, (k, k), (k, k)) for k in self.error_costs]

    def schema_for(self, schema: TestCostSchema) -> TestCostSchema:
        if self.variant == "no-delay":
            return schema.all_immediate()
        if self.variant == "no-discount":
            return schema.without_group_discounts()
        return schema


@dataclass(frozen=True)
class CostSetting:
    """Error costs as (positive, negative) for training ICET and for scoring."""

    label: float
    train: tuple
    test: tuple


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    algorithm: str
    error_cost: float
    split: int
    average_cost: float
    normalized_cost_pct: float
    test_expenditure_pct: float
    error_rate_pct: float
    wall_time: float = field(default=0.0, compare=False)


ROW_COLUMNS = [f.name for f in fields(ResultRow) if f.name != "wall_time"]


# ---------------------------------------------------------------------------
# algorithms


def baseline_params(algorithm: str, train: Dataset, schema: TestCostSchema) -> InductionParams:
    """Induction settings of the fixed-bias algorithms.

    The cost-aware ones see the true cost of each usable test, without
    group discounts.
    """
    names = [a.name for a in train.attributes]
    bound = schema.bind(names)
    costs = schema.true_costs(names)
    costs[~(bound.usable & bound.priced)] = np.nan
    if algorithm == "EG2":
        return InductionParams(heuristic=ICF(costs, 1.0), cf=25.0)
    if algorithm == "CSID3":
        return InductionParams(heuristic=CSID3(costs), cf=25.0)
    if algorithm == "IDX":
        return InductionParams(heuristic=IDX(costs), cf=25.0)
    if algorithm == "C45":
        excluded = frozenset(int(i) for i in np.flatnonzero(~(bound.usable & bound.priced)))
        return InductionParams(heuristic=GainRatio(), cf=25.0, excluded=excluded)
    raise ExperimentError(f"{algorithm} has no fixed bias")


def induce(algorithm: str, train: Dataset, schema: TestCostSchema) -> DecisionTree:
    return build_tree(train, baseline_params(algorithm, train, schema))


def canonical_splits(d: Dataset, n: int, seed: int) -> list[SplitPair]:
    return [random_split(d, split_seed(seed, i)) for i in range(n)]


def split_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


def icet_seed(seed: int, dataset: str, split: int, setting: int) -> int:
    key = [seed, zlib.crc32(dataset.encode()), split, setting]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


# ---------------------------------------------------------------------------
# running


@dataclass
class _Context:
    name: str
    data: Dataset
    costs: CostConfig
    schema: TestCostSchema  # the variant's pricing, used for scoring
    splits: list


def _score(ctx: _Context, tree, test: Dataset, setting: CostSetting, cfg: ExperimentConfig, leaf_costs=None):
    matrix = ctx.costs.matrix(ctx.data.classes, *setting.test)
    if leaf_costs is None:
        leaf_costs, _ = leaf_test_costs(tree, ctx.schema)
    tests, errors, wrong = evaluate_leaves(tree, test, leaf_costs, matrix)
    n = len(test)
    std = standard_cost(ctx.data, ctx.schema, matrix, discounts=cfg.standard_with_discounts)
    budget = total_test_cost(ctx.schema, cfg.standard_with_discounts) / 100.0
    avg = (tests + errors) / n / 100.0
    return (
        avg,
        100.0 * avg / std,
        100.0 * tests / n / 100.0 / budget if budget > 0 else 0.0,
        100.0 * wrong / n,
    )


def _icet_job(args):
    ctx, cfg, split, group = args
    pair = ctx.splits[split]
    rows = []
    first = group[0]
    t0 = time.perf_counter()
    matrix = ctx.costs.matrix(ctx.data.classes, *first[1].train)
    result = icet(pair.train, ctx.schema, matrix, cfg.ga_config(icet_seed(cfg.seed, ctx.name, split, first[0])))
    elapsed = time.perf_counter() - t0
    leaf_costs, _ = leaf_test_costs(result.tree, ctx.schema)
    for _, setting in group:
        vals = _score(ctx, result.tree, pair.test, setting, cfg, leaf_costs)
        rows.append(ResultRow(ctx.name, "ICET", setting.label, split, *vals, wall_time=elapsed))
    return rows


def _load_context(name: str, cfg: ExperimentConfig) -> _Context:
    d = load_bundled(name, cfg.data_dir)
    costs = load_cost_config(name)
    return _Context(name, d, costs, cfg.schema_for(costs.schema), canonical_splits(d, cfg.n_splits, cfg.seed))


def check_data(cfg: ExperimentConfig):
    """Fail fast, naming the expected path, if a dataset file is absent."""
    from .data import bundled_descriptor

    root = Path(cfg.data_dir) if cfg.data_dir else default_data_dir()
    for name in cfg.datasets:
        path = root / bundled_descriptor(name).file
        if not path.exists():
            raise ExperimentError(f"dataset {name!r} not found: expected {path}")


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[ResultRow]:
    """Run every (dataset, algorithm, cost setting, split) cell.

    Rows come back sorted by dataset, algorithm, cost and split, whatever
    the worker count.
    """
    check_data(cfg)
    settings = cfg.cost_settings()
    rows: list[ResultRow] = []
    jobs = []
    for name in cfg.datasets:
        ctx = _load_context(name, cfg)
        for s, pair in enumerate(ctx.splits):
            for alg in cfg.algorithms:
                if alg == "ICET":
                    continue
                t0 = time.perf_counter()
                tree = induce(alg, pair.train, ctx.costs.schema)
                elapsed = time.perf_counter() - t0
                leaf_costs, _ = leaf_test_costs(tree, ctx.schema)
                for setting in settings:
                    vals = _score(ctx, tree, pair.test, setting, cfg, leaf_costs)
                    rows.append(ResultRow(name, alg, setting.label, s, *vals, wall_time=elapsed))
            if "ICET" in cfg.algorithms:
                # one ICET run per distinct training cost
                groups: dict = {}
                for i, setting in enumerate(settings):
                    groups.setdefault(setting.train, []).append((i, setting))
                for group in groups.values():
                    jobs.append((ctx, cfg, s, group))
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for out in pool.map(_icet_job, jobs):
                rows.extend(out)
                if progress:
                    progress(out)
    else:
        for job in jobs:
            out = _icet_job(job)
            rows.extend(out)
            if progress:
                progress(out)
    return sort_rows(rows)


def sort_rows(rows: Iterable[ResultRow]) -> list[ResultRow]:
    order = {a: i for i, a in enumerate(ALGORITHMS)}
    return sorted(rows, key=lambda r: (r.dataset, order.get(r.algorithm, 99), r.error_cost, r.split))


# ---------------------------------------------------------------------------
# row files


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(round(v, 10))
    return str(v)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in ROW_COLUMNS])
    return buf.getvalue()


def read_rows(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        return read_rows_text(fh.read(), str(path))


def read_rows_text(text: str, source: str = "rows") -> list[ResultRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ROW_COLUMNS:
        raise ExperimentError(f"{source}: unexpected header {reader.fieldnames}")
    return [
        ResultRow(
            r["dataset"],
            r["algorithm"],
            float(r["error_cost"]),
            int(r["split"]),
            float(r["average_cost"]),
            float(r["normalized_cost_pct"]),
            float(r["test_expenditure_pct"]),
            float(r["error_rate_pct"]),
        )
        for r in reader
    ]


# ---------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class SummaryCell:
    algorithm: str
    window: tuple
    mean: float
    half_width: float
    n_splits: int


def _split_matrix(rows, algorithm, metric, keep):
    """{split: mean over datasets of (mean over kept costs of metric)}."""
    per: dict = {}
    for r in rows:
        if r.algorithm == algorithm and keep(r.error_cost):
            per.setdefault(r.split, {}).setdefault(r.dataset, []).append(getattr(r, metric))
    return {s: float(np.mean([np.mean(v) for v in ds.values()])) for s, ds in per.items()}


def summarize(rows: Sequence[ResultRow], window=FULL_WINDOW, metric: str = "normalized_cost_pct") -> list[SummaryCell]:
    """Mean and 95% half-width (1.96 sd / sqrt(splits)) per algorithm.

    Values are averaged over the costs in ``window``, then over datasets
    with equal weight; the spread is taken across splits.
    """
    if not rows:
        raise ExperimentError("no rows to summarize")
    lo, hi = window
    keep = lambda k: lo - 1e-9 <= k <= hi + 1e-9  # noqa: E731
    out = []
    algs = [a for a in ALGORITHMS if any(r.algorithm == a for r in rows)]
    for alg in algs:
        per_split = _split_matrix(rows, alg, metric, keep)
        if not per_split:
            continue
        v = np.array([per_split[s] for s in sorted(per_split)])
        sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        out.append(SummaryCell(alg, (lo, hi), float(v.mean()), 1.96 * sd / math.sqrt(v.size), v.size))
    return out


def summary_table(rows: Sequence[ResultRow], windows=(FULL_WINDOW, LOW_WINDOW), metric="normalized_cost_pct") -> str:
    """Markdown table: one line per algorithm, one column per cost window."""
    cells = {w: {c.algorithm: c for c in summarize(rows, w, metric)} for w in windows}
    head = "| Algorithm | " + " | ".join(f"${w[0]:,.0f} to ${w[1]:,.0f}" for w in windows) + " |"
    lines = [head, "|" + "---|" * (len(windows) + 1)]
    for alg in ALGORITHMS:
        if not any(alg in cells[w] for w in windows):
            continue
        vals = []
        for w in windows:
            c = cells[w].get(alg)
            vals.append("" if c is None else f"{c.mean:.0f} ± {c.half_width:.0f}")
        lines.append(f"| {alg} | " + " | ".join(vals) + " |")
    return "\n".join(lines)


def per_cost_table(rows: Sequence[ResultRow], metric="normalized_cost_pct", label="Error cost") -> str:
    """Markdown table with one column per cost setting (ratios, mismatch)."""
    ks = sorted({r.error_cost for r in rows})
    lines = ["| Algorithm | " + " | ".join(f"{label} {k:g}" for k in ks) + " |", "|" + "---|" * (len(ks) + 1)]
    for alg in ALGORITHMS:
        if not any(r.algorithm == alg for r in rows):
            continue
        vals = []
        for k in ks:
            c = summarize(rows, (k, k), metric)
            c = [x for x in c if x.algorithm == alg]
            vals.append(f"{c[0].mean:.0f} ± {c[0].half_width:.0f}" if c else "")
        lines.append(f"| {alg} | " + " | ".join(vals) + " |")
    return "\n".join(lines)


def summary_markdown(rows: Sequence[ResultRow], variant: str = "baseline") -> str:
    parts = [f"# Average cost as a percentage of standard cost ({variant})", ""]
    if variant in ("ratios", "mismatch"):
        label = "ratio" if variant == "ratios" else "test cost"
        parts.append(per_cost_table(rows, label=label))
    else:
        parts.append(summary_table(rows))
        parts += ["", "## Per error cost", "", per_cost_table(rows)]
        if any(r.algorithm == "ICET" for r in rows):
            parts += ["", "## ICET test expenditure (% of T)", "", per_cost_table([r for r in rows if r.algorithm == "ICET"], "test_expenditure_pct")]
            parts += ["", "## ICET error rate (%)", "", per_cost_table([r for r in rows if r.algorithm == "ICET"], "error_rate_pct")]
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# outputs


def _curves(rows, metric, algorithms):
    """{panel: {algorithm: (costs, values)}} for each dataset and their average."""
    datasets = sorted({r.dataset for r in rows})
    panels = {}
    for name in datasets + ["average"]:
        sel = [r for r in rows if name == "average" or r.dataset == name]
        curves = {}
        for alg in algorithms:
            ks = sorted({r.error_cost for r in sel if r.algorithm == alg})
            if not ks:
                continue
            vals = []
            for k in ks:
                per_ds: dict = {}
                for r in sel:
                    if r.algorithm == alg and r.error_cost == k:
                        per_ds.setdefault(r.dataset, []).append(getattr(r, metric))
                vals.append(float(np.mean([np.mean(v) for v in per_ds.values()])))
            curves[alg] = (ks, vals)
        panels[name] = curves
    return panels


def plot_rows(rows: Sequence[ResultRow], out_dir) -> list[Path]:
    """Cost-versus-error-cost plots per dataset plus the average, and ICET's
    test expenditure and error rate curves."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    algs = [a for a in ALGORITHMS if any(r.algorithm == a for r in rows)]
    for panel, curves in _curves(rows, "normalized_cost_pct", algs).items():
        fig, ax = plt.subplots(figsize=(5, 4))
        for alg, (ks, vals) in curves.items():
            ax.plot(ks, vals, marker="o", label=alg)
        ax.set_xscale("log")
        ax.set_xlabel("classification error cost")
        ax.set_ylabel("average cost (% of standard cost)")
        ax.set_title(panel)
        ax.legend()
        path = out_dir / f"cost_{panel}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=100, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    icet_rows = [r for r in rows if r.algorithm == "ICET"]
    if icet_rows:
        exp = _curves(icet_rows, "test_expenditure_pct", ["ICET"])
        err = _curves(icet_rows, "error_rate_pct", ["ICET"])
        for panel in exp:
            fig, ax = plt.subplots(figsize=(5, 4))
            ks, v = exp[panel]["ICET"]
            ax.plot(ks, v, marker="o", label="test expenditure (% of T)")
            ks, v = err[panel]["ICET"]
            ax.plot(ks, v, marker="s", label="error rate (%)")
            ax.set_xscale("log")
            ax.set_xlabel("classification error cost")
            ax.set_ylabel("percent")
            ax.set_title(f"ICET: {panel}")
            ax.legend()
            path = out_dir / f"icet_expenditure_{panel}.png"
            fig.tight_layout()
            fig.savefig(path, dpi=100, metadata={"Software": None})
            plt.close(fig)
            written.append(path)
    return written


def emit_outputs(rows: Sequence[ResultRow], out_dir, variant: str = "baseline", plots: bool = True) -> list[Path]:
    """Write ``rows.csv``, ``timings.csv``, ``summary.md`` and plots."""
    if not rows:
        raise ExperimentError("no rows to write")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = sort_rows(rows)
    text = summary_markdown(rows, variant)
    written = []
    (out_dir / "rows.csv").write_text(rows_to_csv(rows))
    written.append(out_dir / "rows.csv")
    with open(out_dir / "timings.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "error_cost", "split", "wall_time"])
        for r in rows:
            w.writerow([r.dataset, r.algorithm, _fmt(r.error_cost), r.split, f"{r.wall_time:.3f}"])
    written.append(out_dir / "timings.csv")
    (out_dir / "summary.md").write_text(text)
    written.append(out_dir / "summary.md")
    if plots and variant != "mismatch":
        written += plot_rows(rows, out_dir / "plots")
    return written
