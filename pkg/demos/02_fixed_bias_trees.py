"""EG2, CS-ID3, IDX and C4.5 on one train/test split.

None of these look at the error costs, so each grows one tree and we
re-price it at every error cost. The cost-aware ones trade a little
accuracy for much cheaper tests.
"""

import sys

from icet import experiments as ex
from icet.cost import average_cost, leaf_test_costs, standard_cost, total_test_cost
from icet.data import load_bundled
from icet.schema import load_cost_config

name = sys.argv[1] if len(sys.argv) > 1 else "heart"
data = load_bundled(name)
costs = load_cost_config(name)
pair = ex.canonical_splits(data, 1, 123456789)[0]
print(f"{name}: {len(pair.train)} training cases, {len(pair.test)} test cases")
print(f"doing every test once costs ${total_test_cost(costs.schema) / 100:.2f}\n")

trees = {alg: ex.induce(alg, pair.train, costs.schema) for alg in ("EG2", "CSID3", "IDX", "C45")}
for alg, tree in trees.items():
    used = ", ".join(sorted(tree.attribute_names[a] for a in tree.attributes_used()))
    print(f"{alg:6s} {tree.n_leaves:3d} leaves, tests used: {used}")

print("\naverage cost as % of standard cost")
print("error cost " + "".join(f"{alg:>8s}" for alg in trees))
for k in ex.ERROR_COSTS:
    matrix = costs.matrix(data.classes, k, k)
    std = standard_cost(data, costs.schema, matrix)
    cells = []
    for tree in trees.values():
        rep = average_cost(tree, pair.test, costs.schema, matrix, standard=std)
        cells.append(f"{rep.normalized_cost_pct:8.1f}")
    print(f"{k:10,.0f} " + "".join(cells))

print("\nC4.5 tree:")
print(trees["C45"].to_text(data.attributes))
