"""Pricing one case through a small tree.

Four tests: alpha ($5) and beta ($10) give results at once; delta ($7)
and epsilon ($10) come back from the lab later and share a $2 setup
charge. Because the lab results are delayed, ordering delta commits us to
every test that could follow it.
"""

from icet.cost import average_cost, case_cost, leaf_test_costs, max_cost, standard_cost
from icet.toy import ATTRIBUTES, toy_matrix, toy_schema, toy_tree, traced_case
from icet.data import Dataset
import numpy as np

tree = toy_tree()
schema = toy_schema()
matrix = toy_matrix()

print(tree.to_text(ATTRIBUTES))
print()

values, actual = traced_case()
ledger = case_cost(tree, values, schema, matrix, actual, ATTRIBUTES)
print(ledger.dump())
print()

# a case that stays on the cheap side of the tree
cheap = case_cost(tree, [1, 0, 0, 0], schema, matrix, 1, ATTRIBUTES)
print(cheap.dump())
print()

# every leaf has a fixed test bill, so a test set is costed with one lookup per case
bills, leaves = leaf_test_costs(tree, schema)
for leaf, cents in zip(leaves, bills):
    print(f"leaf -> class {tree.classes[leaf.label]}: tests cost ${cents / 100:.2f}")

half_and_half = Dataset(ATTRIBUTES, tree.classes, np.zeros((2, 4)), np.array([0, 1]), "toy")
print()
print(f"standard cost ${standard_cost(half_and_half, schema, matrix):.2f}, max cost ${max_cost(schema, matrix):.2f}")
report = average_cost(tree, Dataset(ATTRIBUTES, tree.classes, np.array([values]), np.array([actual]), "one"), schema, matrix)
print(f"average over the one traced case: ${report.average_cost:.2f}")
