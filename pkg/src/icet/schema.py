"""Test-cost schemas and classification cost matrices.

All money is held as integer cents so that ledgers add up exactly; the
public accessors convert back to dollars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml


class SchemaError(ValueError):
    pass


def to_cents(dollars) -> int:
    if isinstance(dollars, (int, np.integer)):
        return int(dollars) * 100
    value = float(dollars)
    if not math.isfinite(value):
        raise SchemaError(f"money must be finite, got {dollars!r}")
    return int((Decimal(str(dollars)) * 100).to_integral_value())


def to_dollars(cents) -> float:
    return cents / 100.0


def format_money(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(int(cents))
    return f"{sign}${cents // 100:,}.{cents % 100:02d}"


@dataclass(frozen=True)
class TestCost:
    """Price record for one attribute.

    ``cost`` is the price when no other member of ``group`` has been paid
    for; later members pay ``cost - group_common_cost``.
    """

    __test__ = False  # not a pytest class

    name: str
    cost: int = 0
    group: str | None = None
    group_common_cost: int = 0
    delayed: bool = False
    usable: bool = True

    @property
    def first_in_group_cost(self) -> int:
        return self.cost

    @property
    def subsequent_cost(self) -> int:
        return self.cost - self.group_common_cost if self.group is not None else self.cost


@dataclass(frozen=True)
class BoundSchema:
    """Per-attribute-index arrays of a schema applied to a dataset."""

    first: np.ndarray
    subsequent: np.ndarray
    group: np.ndarray  # -1 when ungrouped
    delayed: np.ndarray
    usable: np.ndarray
    priced: np.ndarray  # False for attributes without an entry


class TestCostSchema:
    __test__ = False

    def __init__(self, entries: Iterable[TestCost]):
        self._entries: dict[str, TestCost] = {}
        for e in entries:
            if e.name in self._entries:
                raise SchemaError(f"duplicate entry for {e.name!r}")
            if e.cost < 0 or e.subsequent_cost < 0:
                raise SchemaError(f"{e.name}: costs must be non-negative")
            if e.group is None and e.group_common_cost:
                raise SchemaError(f"{e.name}: common cost given without a group")
            self._entries[e.name] = e
        common: dict[str, int] = {}
        for e in self._entries.values():
            if e.group is None:
                continue
            if common.setdefault(e.group, e.group_common_cost) != e.group_common_cost:
                raise SchemaError(f"group {e.group!r}: members disagree on the common cost")

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self):
        return len(self._entries)

    def __contains__(self, name) -> bool:
        return name in self._entries

    def __getitem__(self, name: str) -> TestCost:
        return self._entries[name]

    def __eq__(self, other):
        return isinstance(other, TestCostSchema) and list(self) == list(other)

    def __repr__(self):
        return f"TestCostSchema({list(self._entries.values())!r})"

    @property
    def usable_tests(self) -> list[TestCost]:
        return [e for e in self if e.usable]

    def group_common_costs(self) -> dict[str, int]:
        return {e.group: e.group_common_cost for e in self if e.group is not None}

    def bind(self, attribute_names: Sequence[str]) -> BoundSchema:
        m = len(attribute_names)
        first = np.zeros(m, dtype=np.int64)
        subsequent = np.zeros(m, dtype=np.int64)
        group = np.full(m, -1, dtype=np.int64)
        delayed = np.zeros(m, dtype=bool)
        usable = np.zeros(m, dtype=bool)
        priced = np.zeros(m, dtype=bool)
        group_ids: dict[str, int] = {}
        for i, name in enumerate(attribute_names):
            e = self._entries.get(name)
            if e is None:
                continue
            priced[i] = True
            first[i] = e.cost
            subsequent[i] = e.subsequent_cost
            if e.group is not None:
                group[i] = group_ids.setdefault(e.group, len(group_ids))
            delayed[i] = e.delayed
            usable[i] = e.usable
        return BoundSchema(first, subsequent, group, delayed, usable, priced)

    def true_costs(self, attribute_names: Sequence[str]) -> np.ndarray:
        """No-discount price of each attribute in dollars (0 where unpriced)."""
        return np.array(
            [self._entries[n].cost / 100.0 if n in self._entries else 0.0 for n in attribute_names]
        )

    def all_immediate(self) -> "TestCostSchema":
        return TestCostSchema(replace(e, delayed=False) for e in self)

    def without_group_discounts(self) -> "TestCostSchema":
        return TestCostSchema(replace(e, group=None, group_common_cost=0) for e in self)

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "TestCostSchema":
        entries = []
        for r in records:
            group = r.get("group")
            entries.append(
                TestCost(
                    name=str(r["name"]),
                    cost=to_cents(r.get("cost", 0)),
                    group=None if group is None else str(group),
                    group_common_cost=to_cents(r.get("group_common_cost", 0)) if group is not None else 0,
                    delayed=bool(r.get("delayed", False)),
                    usable=bool(r.get("usable", True)),
                )
            )
        return cls(entries)

    def to_records(self) -> list[dict]:
        out = []
        for e in self:
            r = {"name": e.name, "cost": e.cost / 100}
            if e.group is not None:
                r["group"] = e.group
                r["group_common_cost"] = e.group_common_cost / 100
            r["delayed"] = e.delayed
            r["usable"] = e.usable
            out.append(r)
        return out


@dataclass(frozen=True, eq=False)
class ClassificationCostMatrix:
    """Penalty for guessing class ``i`` when the truth is ``j``: ``cents[i, j]``."""

    cents: np.ndarray
    classes: tuple[str, ...] = ()

    def __post_init__(self):
        c = np.array(self.cents, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise SchemaError("cost matrix must be square")
        if self.classes and len(self.classes) != c.shape[0]:
            raise SchemaError("class list does not match matrix size")
        c.setflags(write=False)
        object.__setattr__(self, "cents", c)

    @classmethod
    def from_dollars(cls, entries, classes=()) -> "ClassificationCostMatrix":
        rows = [[to_cents(v) for v in row] for row in entries]
        return cls(np.array(rows, dtype=np.int64), tuple(classes))

    @classmethod
    def simple(cls, classes: Sequence[str], error_cost) -> "ClassificationCostMatrix":
        k = to_cents(error_cost)
        n = len(classes)
        return cls(np.full((n, n), k, dtype=np.int64) - np.eye(n, dtype=np.int64) * k, tuple(classes))

    @classmethod
    def from_error_costs(cls, classes, healthy_class, positive_error_cost, negative_error_cost):
        """Build the benchmark matrix from the positive/negative error costs.

        Calling a healthy case sick costs the positive error cost, calling a
        sick case healthy costs the negative error cost, and confusing two
        sick classes costs the smaller of the two.
        """
        classes = tuple(classes)
        if healthy_class not in classes:
            raise SchemaError(f"healthy class {healthy_class!r} not in {classes}")
        h = classes.index(healthy_class)
        pos, neg = to_cents(positive_error_cost), to_cents(negative_error_cost)
        n = len(classes)
        m = np.zeros((n, n), dtype=np.int64)
        for guess in range(n):
            for actual in range(n):
                if guess == actual:
                    continue
                if actual == h:
                    m[guess, actual] = pos
                elif guess == h:
                    m[guess, actual] = neg
                else:
                    m[guess, actual] = min(pos, neg)
        return cls(m, classes)

    @property
    def n_classes(self) -> int:
        return self.cents.shape[0]

    @property
    def max_cents(self) -> int:
        return int(self.cents.max())

    @property
    def dollars(self) -> np.ndarray:
        return self.cents / 100.0

    def __getitem__(self, key) -> float:
        guess, actual = key
        return float(self.cents[guess, actual]) / 100.0


@dataclass(frozen=True)
class CostConfig:
    """A dataset's cost schema plus the parameters of its cost matrix."""

    dataset: str
    schema: TestCostSchema
    healthy_class: str
    positive_error_cost: float = 50.0
    negative_error_cost: float = 50.0
    extra: dict = field(default_factory=dict, compare=False)

    def matrix(self, classes, positive=None, negative=None) -> ClassificationCostMatrix:
        return ClassificationCostMatrix.from_error_costs(
            classes,
            self.healthy_class,
            self.positive_error_cost if positive is None else positive,
            self.negative_error_cost if negative is None else negative,
        )

    @classmethod
    def from_dict(cls, d: dict) -> "CostConfig":
        cc = d.get("classification_costs", {})
        return cls(
            dataset=str(d.get("dataset", "")),
            schema=TestCostSchema.from_records(d["tests"]),
            healthy_class=str(d["healthy_class"]),
            positive_error_cost=float(cc.get("positive_error_cost", 50)),
            negative_error_cost=float(cc.get("negative_error_cost", 50)),
        )

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "healthy_class": self.healthy_class,
            "tests": self.schema.to_records(),
            "classification_costs": {
                "positive_error_cost": self.positive_error_cost,
                "negative_error_cost": self.negative_error_cost,
            },
        }


def load_cost_config(source) -> CostConfig:
    """Load a cost-schema file, or a bundled one by dataset name."""
    p = Path(source)
    if p.suffix in (".yaml", ".yml"):
        with open(p) as fh:
            return CostConfig.from_dict(yaml.safe_load(fh))
    text = resources.files("icet.resources").joinpath(f"{source}.costs.yaml").read_text()
    return CostConfig.from_dict(yaml.safe_load(text))
