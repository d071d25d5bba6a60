"""Top-down decision tree induction with cost-aware attribute selection.

The inducer follows C4.5's recipe (binary threshold tests on continuous
attributes, one branch per value on discrete ones, pessimistic pruning)
and lets the attribute-selection measure be swapped:

* :class:`GainRatio` -- C4.5's gain ratio with the average-gain guard
* :class:`ICF` -- ``(2**gain - 1) / (cost + 1)**omega`` (EG2)
* :class:`CSID3` -- ``gain**2 / cost``
* :class:`IDX` -- ``gain / cost``

For the cost-sensitive measures ``gain`` is the information gain of the
attribute's best split, not the gain ratio.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy.stats import beta as _beta

from .data import Dataset

GAIN_EPS = 1e-12
# C4.5 keeps a subtree only if it beats the collapsed leaf by more than this
PRUNE_SLACK = 0.1


# ---------------------------------------------------------------------------
# selection measures


def entropy(counts) -> float:
    """Class entropy in bits of a vector of counts."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n <= 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def info_gain(labels, branches) -> float:
    """Information gain (bits) of partitioning ``labels`` by ``branches``.

    ``branches`` gives the branch id of every case.
    """
    labels = np.asarray(labels)
    branches = np.asarray(branches)
    if labels.size == 0:
        raise ValueError("info_gain of an empty case set")
    _, y = np.unique(labels, return_inverse=True)
    total = entropy(np.bincount(y))
    rest = 0.0
    for b in np.unique(branches):
        sel = y[branches == b]
        rest += sel.size / y.size * entropy(np.bincount(sel))
    return max(total - rest, 0.0)


def icf_score(gain, cost, omega):
    return (np.exp2(gain) - 1.0) / np.power(np.asarray(cost, dtype=float) + 1.0, omega)


def cs_id3_score(gain, cost):
    cost = np.asarray(cost, dtype=float)
    if np.any(cost <= 0):
        raise ValueError("CS-ID3 needs strictly positive costs")
    return np.square(gain) / cost


def idx_score(gain, cost):
    cost = np.asarray(cost, dtype=float)
    if np.any(cost <= 0):
        raise ValueError("IDX needs strictly positive costs")
    return np.asarray(gain, dtype=float) / cost


def _cost_vector(costs) -> np.ndarray:
    c = np.array(costs, dtype=float)
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class GainRatio:
    average_gain_guard: bool = True
    name = "C4.5"

    def scores(self, attrs, gain, ratio):
        ok = gain > GAIN_EPS
        if self.average_gain_guard and ok.any():
            ok &= gain >= gain[ok].mean() - GAIN_EPS
        return np.where(ok, ratio, 0.0)


@dataclass(frozen=True, eq=False)
class ICF:
    """EG2's information cost function. NaN costs mark non-tests."""

    costs: np.ndarray
    omega: float = 1.0
    use_gain_ratio: bool = False
    name = "EG2"

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega}")
        c = _cost_vector(self.costs)
        if np.any(c[~np.isnan(c)] < 0):
            raise ValueError("ICF costs must be non-negative")
        object.__setattr__(self, "costs", c)

    def scores(self, attrs, gain, ratio):
        g = ratio if self.use_gain_ratio else gain
        return np.where(gain > GAIN_EPS, icf_score(g, self.costs[attrs], self.omega), 0.0)


@dataclass(frozen=True, eq=False)
class CSID3:
    costs: np.ndarray
    name = "CS-ID3"

    def __post_init__(self):
        c = _cost_vector(self.costs)
        if np.any(c[~np.isnan(c)] <= 0):
            raise ValueError("CS-ID3 costs must be strictly positive")
        object.__setattr__(self, "costs", c)

    def scores(self, attrs, gain, ratio):
        return np.where(gain > GAIN_EPS, cs_id3_score(gain, self.costs[attrs]), 0.0)


@dataclass(frozen=True, eq=False)
class IDX:
    costs: np.ndarray
    name = "IDX"

    def __post_init__(self):
        c = _cost_vector(self.costs)
        if np.any(c[~np.isnan(c)] <= 0):
            raise ValueError("IDX costs must be strictly positive")
        object.__setattr__(self, "costs", c)

    def scores(self, attrs, gain, ratio):
        return np.where(gain > GAIN_EPS, idx_score(gain, self.costs[attrs]), 0.0)


@dataclass(frozen=True, eq=False)
class InductionParams:
    heuristic: object = field(default_factory=GainRatio)
    cf: float = 25.0
    excluded: frozenset = frozenset()
    min_cases_per_leaf: int = 2
    # split impure nodes even when every candidate has zero gain (XOR-style data)
    zero_gain_split: bool = False

    def __post_init__(self):
        if not 1.0 <= self.cf <= 100.0:
            raise ValueError(f"cf must lie in [1, 100], got {self.cf}")
        object.__setattr__(self, "excluded", frozenset(int(i) for i in self.excluded))


# ---------------------------------------------------------------------------
# tree structure


@dataclass(frozen=True)
class Leaf:
    label: int
    counts: tuple

    @property
    def n_cases(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class Node:
    """Internal test node.

    Continuous: ``value <= threshold`` goes to ``children[0]``, otherwise
    ``children[1]``. Discrete: value code ``k`` goes to ``children[k]``;
    codes with no branch go to ``children[default]``.
    """

    attribute: int
    threshold: float | None
    children: tuple
    counts: tuple
    default: int = 0

    @property
    def n_cases(self) -> int:
        return sum(self.counts)

    def branch(self, value: float) -> int:
        if self.threshold is not None:
            return 0 if value <= self.threshold else 1
        if value != value or value < 0 or int(value) >= len(self.children) or int(value) != value:
            return self.default
        return int(value)


def _majority(counts) -> int:
    return int(np.argmax(counts))


class DecisionTree:
    def __init__(self, root, attribute_names: Sequence[str], classes: Sequence[str]):
        self.root = root
        self.attribute_names = tuple(attribute_names)
        self.classes = tuple(classes)

    def __eq__(self, other):
        return (
            isinstance(other, DecisionTree)
            and self.root == other.root
            and self.attribute_names == other.attribute_names
            and self.classes == other.classes
        )

    def __repr__(self):
        return f"DecisionTree(nodes={self.n_nodes}, leaves={self.n_leaves})"

    # traversal -----------------------------------------------------------

    def nodes(self) -> Iterator:
        """Pre-order walk over all nodes."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, Node):
                stack.extend(reversed(node.children))

    def leaves(self) -> list[Leaf]:
        return [n for n in self.nodes() if isinstance(n, Leaf)]

    @property
    def n_nodes(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    @property
    def depth(self) -> int:
        def d(node):
            return 0 if isinstance(node, Leaf) else 1 + max(d(c) for c in node.children)

        return d(self.root)

    def attributes_used(self) -> set[int]:
        return {n.attribute for n in self.nodes() if isinstance(n, Node)}

    # classification ------------------------------------------------------

    def classify(self, values) -> tuple[int, list[Node]]:
        """Route one encoded case; return the class index and the test path."""
        node, path = self.root, []
        while isinstance(node, Node):
            path.append(node)
            node = node.children[node.branch(float(values[node.attribute]))]
        return node.label, path

    def classify_case(self, case, attributes) -> tuple[str, list[Node]]:
        """Route a decoded :class:`~icet.data.Case`; unseen categories follow the default branch."""
        encoded = []
        for a, v in zip(attributes, case.values):
            if a.is_discrete:
                encoded.append(float(a.values.index(v)) if v in a.values else -1.0)
            else:
                encoded.append(float(v))
        label, path = self.classify(encoded)
        return self.classes[label], path

    def leaf_index(self, X: np.ndarray) -> tuple[np.ndarray, list[Leaf]]:
        """Leaf reached by every row of ``X`` (pre-order leaf numbering)."""
        X = np.asarray(X, dtype=float)
        out = np.empty(len(X), dtype=np.int64)
        leaves: list[Leaf] = []

        def route(node, idx):
            if isinstance(node, Leaf):
                out[idx] = len(leaves)
                leaves.append(node)
                return
            col = X[idx, node.attribute]
            if node.threshold is not None:
                branch = (col > node.threshold).astype(np.int64)
            else:
                code = np.where(np.isnan(col), -1, col).astype(np.int64)
                bad = (code < 0) | (code >= len(node.children))
                branch = np.where(bad, node.default, code)
            for k, child in enumerate(node.children):
                route(child, idx[branch == k])

        route(self.root, np.arange(len(X)))
        return out, leaves

    def predict(self, X: np.ndarray) -> np.ndarray:
        idx, leaves = self.leaf_index(X)
        labels = np.array([leaf.label for leaf in leaves], dtype=np.int64)
        return labels[idx]

    # serialization -------------------------------------------------------

    def to_text(self, attributes=None) -> str:
        """Indented rendering; ``attributes`` (metadata) names discrete values."""
        lines: list[str] = []

        def value_name(a, k):
            if attributes is not None and k < len(attributes[a].values):
                return attributes[a].values[k]
            return str(k)

        def fmt_counts(node):
            return "/".join(str(c) for c in node.counts)

        def walk(node, indent, prefix):
            pad = "    " * indent
            if isinstance(node, Leaf):
                lines.append(f"{pad}{prefix}class {self.classes[node.label]} ({fmt_counts(node)})")
                return
            name = self.attribute_names[node.attribute]
            if node.threshold is not None:
                lines.append(f"{pad}{prefix}{name} <= {node.threshold!r} ({fmt_counts(node)})")
                walk(node.children[0], indent + 1, "yes: ")
                walk(node.children[1], indent + 1, "no: ")
            else:
                default = value_name(node.attribute, node.default)
                lines.append(f"{pad}{prefix}{name} [default {default}] ({fmt_counts(node)})")
                for k, child in enumerate(node.children):
                    walk(child, indent + 1, f"={value_name(node.attribute, k)}: ")

        walk(self.root, 0, "")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        def enc(node):
            if isinstance(node, Leaf):
                return {"leaf": node.label, "counts": list(node.counts)}
            d = {"attribute": node.attribute, "counts": list(node.counts), "default": node.default}
            if node.threshold is not None:
                d["threshold"] = node.threshold
            d["children"] = [enc(c) for c in node.children]
            return d

        return {
            "attributes": list(self.attribute_names),
            "classes": list(self.classes),
            "root": enc(self.root),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        def dec(n):
            if "leaf" in n:
                return Leaf(int(n["leaf"]), tuple(int(c) for c in n["counts"]))
            children = tuple(dec(c) for c in n["children"])
            thr = n.get("threshold")
            return Node(
                int(n["attribute"]),
                None if thr is None else float(thr),
                children,
                tuple(int(c) for c in n["counts"]),
                int(n.get("default", 0)),
            )

        return cls(dec(d["root"]), d["attributes"], d["classes"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# split search


@dataclass(frozen=True)
class SplitChoice:
    attribute: int
    threshold: float | None
    gain: float
    ratio: float
    score: float


class _SplitSearch:
    """Vectorised best-split search over all candidate attributes at a node."""

    def __init__(self, X, y, n_classes, discrete, n_values, min_cases):
        self.X = X
        self.y = y
        self.c = n_classes
        self.discrete = discrete
        self.n_values = n_values
        self.min_cases = max(int(min_cases), 1)
        n = len(y)
        k = np.arange(n + 1, dtype=float)
        # x log2 x for integer counts
        self.xlogx = np.zeros(n + 1)
        self.xlogx[1:] = k[1:] * np.log2(k[1:])

    def _children_info(self, sizes, counts_sum_xlogx):
        # sum over branches of |S_k| * H(S_k)
        return self.xlogx[sizes].sum(axis=-1) - counts_sum_xlogx

    def evaluate(self, idx, attrs):
        """Best split per attribute: arrays (gain, ratio, threshold, admissible)."""
        n = len(idx)
        y = self.y[idx]
        counts = np.bincount(y, minlength=self.c)
        h_parent = (self.xlogx[n] - self.xlogx[counts].sum()) / n
        k = len(attrs)
        gain = np.zeros(k)
        ratio = np.zeros(k)
        thresh = np.full(k, np.nan)
        ok = np.zeros(k, dtype=bool)
        mc = self.min_cases
        attrs = np.asarray(attrs, dtype=np.int64)
        disc = self.discrete[attrs]

        cont_pos = np.flatnonzero(~disc)
        if cont_pos.size and n >= 2 * mc:
            cols = attrs[cont_pos]
            V = self.X[np.ix_(idx, cols)]
            order = np.argsort(V, axis=0, kind="stable")
            Vs = np.take_along_axis(V, order, axis=0)
            Ys = y[order]
            left = np.empty((n - 1, cols.size, self.c), dtype=np.int64)
            for j in range(self.c):
                left[:, :, j] = np.cumsum(Ys == j, axis=0)[:-1]
            right = counts[None, None, :] - left
            nl = np.arange(1, n, dtype=np.int64)[:, None]
            nr = n - nl
            child = (
                self.xlogx[nl] - self.xlogx[left].sum(axis=2) + self.xlogx[nr] - self.xlogx[right].sum(axis=2)
            )
            g = h_parent - child / n
            valid = (Vs[1:] > Vs[:-1]) & (nl >= mc) & (nr >= mc)
            g = np.where(valid, g, -np.inf)
            best = np.argmax(g, axis=0)
            cols_i = np.arange(cols.size)
            bg = g[best, cols_i]
            has = np.isfinite(bg)
            bl = (best + 1).astype(float)
            split_info = -(bl / n * np.log2(bl / n) + (n - bl) / n * np.log2((n - bl) / n))
            bg = np.where(has, np.maximum(bg, 0.0), 0.0)
            gain[cont_pos] = bg
            ok[cont_pos] = has
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio[cont_pos] = np.where(has & (split_info > 0), bg / split_info, 0.0)
            lo = Vs[best, cols_i]
            hi = Vs[np.minimum(best + 1, n - 1), cols_i]
            thresh[cont_pos] = np.where(has, (lo + hi) / 2.0, np.nan)

        for p in np.flatnonzero(disc):
            a = attrs[p]
            nv = self.n_values[a]
            codes = self.X[idx, a].astype(np.int64)
            table = np.bincount(codes * self.c + y, minlength=nv * self.c).reshape(nv, self.c)
            sizes = table.sum(axis=1)
            if (sizes >= mc).sum() < 2:
                continue
            child = (self.xlogx[sizes] - self.xlogx[table].sum(axis=1)).sum()
            g = max(h_parent - child / n, 0.0)
            f = sizes[sizes > 0] / n
            si = float(-(f * np.log2(f)).sum())
            gain[p] = g
            ratio[p] = g / si if si > 0 else 0.0
            ok[p] = True
        return gain, ratio, thresh, ok


def _choose(attrs, gain, ratio, thresh, ok, heuristic) -> SplitChoice | None:
    if not ok.any():
        return None
    scores = heuristic.scores(attrs, gain, ratio)
    scores = np.where(ok & np.isfinite(scores), scores, 0.0)
    best = int(np.argmax(scores))  # first maximum -> lowest attribute index
    if scores[best] <= 0.0:
        return None
    thr = thresh[best]
    return SplitChoice(int(attrs[best]), None if np.isnan(thr) else float(thr), float(gain[best]), float(ratio[best]), float(scores[best]))


def _schema_arrays(d: Dataset):
    discrete = np.array([a.is_discrete for a in d.attributes], dtype=bool)
    n_values = np.array([len(a.values) if a.is_discrete else 0 for a in d.attributes], dtype=np.int64)
    return discrete, n_values


def select_attribute(cases: Dataset, candidates, heuristic, min_cases_per_leaf: int = 2) -> SplitChoice | None:
    """Candidate attribute (and split) maximising ``heuristic``, or None.

    Ties go to the lowest attribute index; within an attribute, to the
    lowest threshold.
    """
    discrete, n_values = _schema_arrays(cases)
    search = _SplitSearch(cases.X, cases.y, cases.n_classes, discrete, n_values, min_cases_per_leaf)
    attrs = np.array(sorted(candidates), dtype=np.int64)
    if attrs.size == 0 or len(cases) == 0:
        return None
    gain, ratio, thresh, ok = search.evaluate(np.arange(len(cases)), attrs)
    return _choose(attrs, gain, ratio, thresh, ok, heuristic)


# ---------------------------------------------------------------------------
# growing and pruning


def _candidate_attributes(d: Dataset, params: InductionParams) -> np.ndarray:
    h = params.heuristic
    costs = getattr(h, "costs", None)
    out = []
    for a in d.attributes:
        if a.index in params.excluded:
            continue
        if costs is not None and np.isnan(costs[a.index]):
            continue
        out.append(a.index)
    return np.array(out, dtype=np.int64)


def grow_tree(train: Dataset, params: InductionParams, candidates=None):
    """Unpruned tree root for ``train``."""
    discrete, n_values = _schema_arrays(train)
    search = _SplitSearch(train.X, train.y, train.n_classes, discrete, n_values, params.min_cases_per_leaf)
    if candidates is None:
        candidates = _candidate_attributes(train, params)
    c = train.n_classes
    mc = max(params.min_cases_per_leaf, 1)

    def grow(idx, attrs, parent_label):
        counts = np.bincount(train.y[idx], minlength=c)
        n = len(idx)
        if n == 0:
            return Leaf(parent_label, tuple(int(v) for v in counts))
        label = _majority(counts)
        tcounts = tuple(int(v) for v in counts)
        if counts.max() == n or n < 2 * mc or attrs.size == 0:
            return Leaf(label, tcounts)
        gain, ratio, thresh, ok = search.evaluate(idx, attrs)
        choice = _choose(attrs, gain, ratio, thresh, ok, params.heuristic)
        if choice is None and params.zero_gain_split and ok.any():
            p = int(np.flatnonzero(ok)[0])
            thr = thresh[p]
            choice = SplitChoice(int(attrs[p]), None if np.isnan(thr) else float(thr), 0.0, 0.0, 0.0)
        if choice is None:
            return Leaf(label, tcounts)
        col = train.X[idx, choice.attribute]
        if choice.threshold is not None:
            parts = [idx[col <= choice.threshold], idx[col > choice.threshold]]
            sub_attrs = attrs
        else:
            codes = col.astype(np.int64)
            parts = [idx[codes == k] for k in range(n_values[choice.attribute])]
            sub_attrs = attrs[attrs != choice.attribute]
        children = tuple(grow(p, sub_attrs, label) for p in parts)
        sizes = [len(p) for p in parts]
        default = int(np.argmax(sizes))
        return Node(choice.attribute, choice.threshold, children, tcounts, default)

    return grow(np.arange(len(train)), np.asarray(candidates, dtype=np.int64), 0)


@lru_cache(maxsize=None)
def _upper_error_rate(errors: int, n: int, cf: float) -> float:
    """Upper confidence limit on a leaf's error rate at confidence ``cf`` (0, 1]."""
    if n == 0:
        return 0.0
    if errors >= n:
        return 1.0
    bound = float(_beta.ppf(1.0 - cf, errors + 1, n - errors)) if cf < 1.0 else 0.0
    return max(bound, errors / n)


def estimated_errors(counts, cf: float) -> float:
    """Pessimistic error count of a leaf holding ``counts`` at CF ``cf`` (1..100)."""
    n = int(sum(counts))
    e = n - int(max(counts)) if n else 0
    return n * _upper_error_rate(e, n, round(cf / 100.0, 12))


def prune(root, cf: float):
    """Bottom-up pessimistic pruning; returns the new root.

    A subtree is replaced by a leaf when the leaf's estimated errors are no
    more than the subtree's plus 0.1. Lower ``cf`` prunes more.
    """
    if isinstance(root, DecisionTree):
        return DecisionTree(prune(root.root, cf), root.attribute_names, root.classes)

    def walk(node):
        if isinstance(node, Leaf):
            return node, estimated_errors(node.counts, cf)
        kids, est = [], 0.0
        for child in node.children:
            k, e = walk(child)
            kids.append(k)
            est += e
        leaf_est = estimated_errors(node.counts, cf)
        if leaf_est <= est + PRUNE_SLACK:
            return Leaf(_majority(node.counts), node.counts), leaf_est
        return Node(node.attribute, node.threshold, tuple(kids), node.counts, node.default), est

    return walk(root)[0]


def build_tree(train: Dataset, params: InductionParams | None = None) -> DecisionTree:
    """Grow a tree on ``train`` and prune it at ``params.cf``."""
    if len(train) == 0:
        raise ValueError("cannot induce a tree from an empty dataset")
    params = params or InductionParams()
    root = prune(grow_tree(train, params), params.cf)
    return DecisionTree(root, [a.name for a in train.attributes], train.classes)
