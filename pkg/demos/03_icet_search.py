"""Evolving an induction bias with ICET.

The genetic search tunes the cost numbers the tree grower sees, the
cost-sensitivity exponent and the pruning level, scoring each candidate by
the average cost of its tree on a held-out half of the training data.
"""

import sys

from icet import experiments as ex
from icet.cost import average_cost, standard_cost
from icet.data import load_bundled
from icet.genetic import CostProblem, GAConfig, icet
from icet.schema import load_cost_config

name = sys.argv[1] if len(sys.argv) > 1 else "hepatitis"
k = float(sys.argv[2]) if len(sys.argv) > 2 else 100.0

data = load_bundled(name)
costs = load_cost_config(name)
pair = ex.canonical_splits(data, 1, 123456789)[0]
matrix = costs.matrix(data.classes, k, k)
std = standard_cost(data, costs.schema, matrix)

result = icet(pair.train, costs.schema, matrix, GAConfig(population_size=20, total_trials=200, rng_seed=7))
for g in result.log:
    print(f"generation {g.generation:2d}  trials {g.trials:4d}  best ${g.best:7.2f}  mean ${g.mean:7.2f}")

print(f"\n{result.evaluations} fitness evaluations in {result.seconds:.1f}s")
print(f"omega {result.bias.omega:.2f}, pruning cf {result.bias.cf:.1f}")
tests = CostProblem(pair.train, costs.schema, matrix).tests
kept = [data.attributes[a].name for i, a in enumerate(tests) if i not in result.bias.excluded]
print(f"tests left available: {', '.join(kept)}")
print(result.tree.to_text(data.attributes))

eg2 = ex.induce("EG2", pair.train, costs.schema)
for label, tree in (("ICET", result.tree), ("EG2", eg2)):
    rep = average_cost(tree, pair.test, costs.schema, matrix, standard=std)
    print(f"{label:5s} ${rep.average_cost:7.2f} per case ({rep.normalized_cost_pct:.1f}% of standard), "
          f"error rate {rep.error_rate_pct:.1f}%")
