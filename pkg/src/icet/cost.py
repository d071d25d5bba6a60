"""Average cost of classification for a decision tree.

A case pays for every distinct test on its path. Tests in a group share a
common cost that is charged only with the first member paid for. The first
delayed test reached commits the case to every test in the subtree below
it, priced in pre-order. The error penalty ``matrix[guess, actual]`` is
added at the leaf.

Because the charges depend only on the path, each leaf has a fixed test
cost; :func:`leaf_test_costs` tabulates them so that whole test sets are
costed with a single routing pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, class_frequencies
from .schema import BoundSchema, ClassificationCostMatrix, TestCostSchema, format_money
from .tree import DecisionTree, Leaf, Node


class CostError(ValueError):
    pass


def _bind(schema, names) -> BoundSchema:
    if isinstance(schema, BoundSchema):
        return schema
    return schema.bind(names)


def _check_priced(bound: BoundSchema, attr: int, names=None):
    if not bound.priced[attr]:
        label = names[attr] if names is not None else attr
        raise CostError(f"attribute {label!r} has no entry in the cost schema")


def price_of_test(attr: int, already_selected, schema: BoundSchema, names=None) -> int:
    """Price in cents of ``attr`` given the attributes already paid for."""
    _check_priced(schema, attr, names)
    g = schema.group[attr]
    if g >= 0 and any(schema.group[s] == g for s in already_selected if s != attr):
        return int(schema.subsequent[attr])
    return int(schema.first[attr])


@dataclass(frozen=True)
class LedgerStep:
    action: str
    result: str
    cost: int  # cents
    note: str = ""


@dataclass(frozen=True)
class CostLedger:
    tests_charged: tuple  # ((attribute, cents), ...) in payment order
    error_cost: int
    steps: tuple
    guess: int
    actual: int

    @property
    def test_cost(self) -> int:
        return sum(c for _, c in self.tests_charged)

    @property
    def total(self) -> int:
        return self.test_cost + self.error_cost

    def dump(self) -> str:
        """Step / action / result / cost table."""
        rows = [("Step", "Action", "Result", "Cost")]
        for i, s in enumerate(self.steps, 1):
            rows.append((str(i), s.action, s.result, s.note or format_money(s.cost)))
        rows.append(("", "total cost", "", format_money(self.total)))
        widths = [max(len(r[k]) for r in rows) for k in range(4)]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _preorder_tests(node) -> list[int]:
    out, stack = [], [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Node):
            out.append(n.attribute)
            stack.extend(reversed(n.children))
    return out


def _walk(tree: DecisionTree, path: Sequence[Node], bound: BoundSchema, values=None, attributes=None):
    """Charge the tests along ``path``; returns (charged, steps)."""
    names = tree.attribute_names
    paid: dict[int, int] = {}
    paid_at: dict[int, int] = {}  # step number at which each test was paid
    steps = []
    committed = False

    def pay(a):
        price = price_of_test(a, paid.keys(), bound, names)
        paid[a] = price
        return price

    for node in path:
        a = node.attribute
        name = names[a]
        result = "" if values is None else f"{name} = {_fmt_value(values[a], attributes and attributes[a])}"
        if a in paid:
            where = paid_at.get(a)
            note = "already paid" + (f", in step #{where}" if where else "")
            steps.append(LedgerStep(f"do {name}", result, 0, note))
            continue
        if bound.delayed[a] and not committed:
            committed = True
            prices = []
            for t in _preorder_tests(node):
                if t not in paid:
                    prices.append(pay(t))
            for t in _preorder_tests(node):
                paid_at.setdefault(t, len(steps) + 1)
            if len(prices) > 1:
                note = " + ".join(format_money(p) for p in prices) + f" = {format_money(sum(prices))}"
            else:
                note = ""
            steps.append(LedgerStep(f"do {name}", result, sum(prices), note))
        else:
            paid_at.setdefault(a, len(steps) + 1)
            steps.append(LedgerStep(f"do {name}", result, pay(a)))
    return tuple(paid.items()), steps


def _fmt_value(v, attribute=None) -> str:
    v = float(v)
    if attribute is not None and attribute.is_discrete and 0 <= v < len(attribute.values):
        return attribute.values[int(v)]
    return str(int(v)) if v.is_integer() else repr(v)


def case_cost(
    tree: DecisionTree, values, schema, matrix: ClassificationCostMatrix, actual_class: int, attributes=None
) -> CostLedger:
    """Itemised cost of classifying one encoded case.

    ``attributes`` (optional metadata) only affects how values are printed.
    """
    bound = _bind(schema, tree.attribute_names)
    guess, path = tree.classify(values)
    charged, steps = _walk(tree, path, bound, values, attributes)
    err = int(matrix.cents[guess, actual_class])
    label = tree.classes[guess] if tree.classes else str(guess)
    actual = tree.classes[actual_class] if tree.classes else str(actual_class)
    steps.append(LedgerStep(f"guess class = {label}", f"actual class = {actual}", err))
    return CostLedger(charged, err, tuple(steps), guess, actual_class)


def leaf_test_costs(tree: DecisionTree, schema) -> tuple[np.ndarray, list[Leaf]]:
    """Test cost in cents of reaching each leaf (pre-order leaf numbering)."""
    bound = _bind(schema, tree.attribute_names)
    costs: list[int] = []
    leaves: list[Leaf] = []

    def rec(node, path):
        if isinstance(node, Leaf):
            charged, _ = _walk(tree, path, bound)
            costs.append(sum(c for _, c in charged))
            leaves.append(node)
            return
        for child in node.children:
            rec(child, path + [node])

    rec(tree.root, [])
    return np.array(costs, dtype=np.int64), leaves


@dataclass(frozen=True)
class EvaluationReport:
    average_cost: float
    average_test_cost: float
    average_error_cost: float
    standard_cost: float
    test_budget: float  # T used for the expenditure percentage
    error_rate_pct: float
    n_cases: int

    @property
    def normalized_cost_pct(self) -> float:
        return 100.0 * self.average_cost / self.standard_cost if self.standard_cost > 0 else float("nan")

    @property
    def test_expenditure_pct(self) -> float:
        return 100.0 * self.average_test_cost / self.test_budget if self.test_budget > 0 else 0.0


def total_test_cost(schema: TestCostSchema, discounts: bool = True) -> int:
    """T: cents to perform every usable test once."""
    tests = schema.usable_tests
    if not discounts:
        return sum(t.cost for t in tests)
    groups = {t.group: t.group_common_cost for t in tests if t.group is not None}
    return sum(t.subsequent_cost for t in tests) + sum(groups.values())


def standard_cost(dataset: Dataset, schema: TestCostSchema, matrix: ClassificationCostMatrix, discounts: bool = True, frequencies=None) -> float:
    """T + min_i(1 - f_i) * max C, in dollars; f from the whole ``dataset``."""
    f = class_frequencies(dataset) if frequencies is None else np.asarray(frequencies, dtype=float)
    return (total_test_cost(schema, discounts) + float(np.min(1.0 - f)) * matrix.max_cents) / 100.0


def max_cost(schema: TestCostSchema, matrix: ClassificationCostMatrix, discounts: bool = True) -> float:
    return (total_test_cost(schema, discounts) + matrix.max_cents) / 100.0


def evaluate_leaves(tree: DecisionTree, test: Dataset, leaf_costs: np.ndarray, matrix: ClassificationCostMatrix):
    """(total test cents, total error cents, error count) over ``test``."""
    idx, leaves = tree.leaf_index(test.X)
    labels = np.array([leaf.label for leaf in leaves], dtype=np.int64)
    guess = labels[idx]
    tests = int(leaf_costs[idx].sum())
    errors = int(matrix.cents[guess, test.y].sum())
    return tests, errors, int((guess != test.y).sum())


def average_cost(
    tree: DecisionTree,
    test: Dataset,
    schema: TestCostSchema,
    matrix: ClassificationCostMatrix,
    standard: float | None = None,
    test_budget: float | None = None,
    leaf_costs: np.ndarray | None = None,
) -> EvaluationReport:
    """Mean cost per case of classifying ``test`` with ``tree``.

    ``standard`` defaults to the standard cost computed on ``test`` itself;
    pass the whole-dataset value for benchmark normalisation.
    """
    n = len(test)
    if n == 0:
        raise CostError("average cost of an empty test set")
    if leaf_costs is None:
        leaf_costs, _ = leaf_test_costs(tree, schema)
    tests, errors, wrong = evaluate_leaves(tree, test, leaf_costs, matrix)
    if standard is None:
        standard = standard_cost(test, schema, matrix)
    if test_budget is None:
        test_budget = total_test_cost(schema) / 100.0
    return EvaluationReport(
        average_cost=(tests + errors) / n / 100.0,
        average_test_cost=tests / n / 100.0,
        average_error_cost=errors / n / 100.0,
        standard_cost=float(standard),
        test_budget=float(test_budget),
        error_rate_pct=100.0 * wrong / n,
        n_cases=n,
    )
