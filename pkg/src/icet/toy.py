"""A four-test worked example: two immediate tests, two delayed tests that
share a $2.00 common cost, and a two-class problem with a $50 error cost."""

from __future__ import annotations

from .data import CONTINUOUS, DISCRETE, AttributeMeta
from .schema import ClassificationCostMatrix, TestCost, TestCostSchema
from .tree import DecisionTree, Leaf, Node

ATTRIBUTES = (
    AttributeMeta("alpha", CONTINUOUS, 0),
    AttributeMeta("beta", CONTINUOUS, 1),
    AttributeMeta("delta", DISCRETE, 2, ("2", "3")),
    AttributeMeta("epsilon", CONTINUOUS, 3),
)
CLASSES = ("0", "1")

ALPHA, BETA, DELTA, EPSILON = range(4)


def toy_schema() -> TestCostSchema:
    return TestCostSchema(
        [
            TestCost("alpha", 500),
            TestCost("beta", 1000),
            TestCost("delta", 700, group="A", group_common_cost=200, delayed=True),
            TestCost("epsilon", 1000, group="A", group_common_cost=200, delayed=True),
        ]
    )


def toy_matrix() -> ClassificationCostMatrix:
    return ClassificationCostMatrix.simple(CLASSES, 50)


def _leaf(label):
    return Leaf(label, (0, 0))


def toy_tree() -> DecisionTree:
    """alpha < 3 ? (beta > 6 ? 0 : 1) : (delta = 2 ? (beta < 5 ? 1 : 0) : (epsilon < 4 ? 0 : 1)).

    Integer-valued tests are written as ``<=`` thresholds halfway between
    integers; ``delta`` is discrete with its "= 2" branch first.
    """
    beta_gt_6 = Node(BETA, 6.5, (_leaf(1), _leaf(0)), (0, 0))
    beta_lt_5 = Node(BETA, 4.5, (_leaf(1), _leaf(0)), (0, 0))
    eps_lt_4 = Node(EPSILON, 3.5, (_leaf(0), _leaf(1)), (0, 0))
    delta_eq_2 = Node(DELTA, None, (beta_lt_5, eps_lt_4), (0, 0))
    root = Node(ALPHA, 2.5, (beta_gt_6, delta_eq_2), (0, 0))
    return DecisionTree(root, [a.name for a in ATTRIBUTES], CLASSES)


def traced_case() -> tuple[list[float], int]:
    """alpha = 6, beta = 0, delta = 3, epsilon = 2 with actual class 1 (encoded)."""
    return [6.0, 0.0, 1.0, 2.0], 1
