"""Datasets, loading, missing-value handling and train/test splitting.

A :class:`Dataset` stores its cases column-wise in a float matrix ``X``
(discrete values are stored as the index into the attribute's declared
value list, missing values as NaN) and an integer class vector ``y``.
The :attr:`Dataset.cases` view gives the same data back as :class:`Case`
records with decoded values for code that wants to reason per case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
import yaml

MISSING = None

CONTINUOUS = "continuous"
DISCRETE = "discrete"

BUNDLED_DATASETS = ("bupa", "heart", "hepatitis", "pima", "thyroid")


class DataError(ValueError):
    """Raised for malformed dataset files or descriptors."""


@dataclass(frozen=True)
class AttributeMeta:
    name: str
    kind: str
    index: int
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, DISCRETE):
            raise DataError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == DISCRETE and len(self.values) < 2:
            raise DataError(f"discrete attribute {self.name!r} needs at least 2 values")

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE


class Case(NamedTuple):
    values: tuple
    class_label: str


@dataclass(frozen=True, eq=False)
class Dataset:
    attributes: tuple[AttributeMeta, ...]
    classes: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    name: str = ""

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DataError("attribute names must be unique")
        X = np.array(self.X, dtype=float, copy=True).reshape(len(self.y), len(self.attributes))
        y = np.array(self.y, dtype=np.int64, copy=True)
        if y.size and (y.min() < 0 or y.max() >= len(self.classes)):
            raise DataError("class index out of range")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def attribute_index(self, name: str) -> int:
        for a in self.attributes:
            if a.name == name:
                return a.index
        raise KeyError(name)

    @property
    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.X)

    @property
    def cases(self) -> list[Case]:
        out = []
        for row, label in zip(self.X, self.y):
            vals = []
            for a, v in zip(self.attributes, row):
                if math.isnan(v):
                    vals.append(MISSING)
                elif a.is_discrete:
                    vals.append(a.values[int(v)])
                else:
                    vals.append(float(v))
            out.append(Case(tuple(vals), self.classes[label]))
        return out

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.attributes, self.classes, self.X[index], self.y[index], self.name)

    def with_values(self, X: np.ndarray) -> "Dataset":
        return Dataset(self.attributes, self.classes, X, self.y, self.name)

    @classmethod
    def from_cases(cls, attributes, classes, cases: Sequence[Case], name: str = "") -> "Dataset":
        """Build a dataset from decoded :class:`Case` records."""
        attributes = tuple(attributes)
        classes = tuple(classes)
        X = np.full((len(cases), len(attributes)), np.nan)
        y = np.zeros(len(cases), dtype=np.int64)
        for i, case in enumerate(cases):
            if len(case.values) != len(attributes):
                raise DataError(f"case {i}: expected {len(attributes)} values, got {len(case.values)}")
            for j, (a, v) in enumerate(zip(attributes, case.values)):
                if v is MISSING:
                    continue
                X[i, j] = a.values.index(str(v)) if a.is_discrete else float(v)
            try:
                y[i] = classes.index(case.class_label)
            except ValueError:
                raise DataError(f"case {i}: unknown class {case.class_label!r}") from None
        return cls(attributes, classes, X, y, name)


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_index: np.ndarray = field(repr=False, default=None)
    test_index: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# descriptors and loading


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    file: str
    columns: tuple[dict, ...]
    class_column: str
    class_labels: tuple[str, ...]
    class_threshold: float | None = None
    delimiter: str = ","
    missing: str = "?"

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetDescriptor":
        try:
            klass = d["class"]
            return cls(
                name=d["name"],
                file=d.get("file", ""),
                columns=tuple(d["columns"]),
                class_column=klass["column"],
                class_labels=tuple(str(v) for v in klass["labels"]),
                class_threshold=klass.get("threshold"),
                delimiter=d.get("delimiter", ","),
                missing=str(d.get("missing", "?")),
            )
        except KeyError as exc:
            raise DataError(f"descriptor missing field {exc}") from None

    @classmethod
    def load(cls, path) -> "DatasetDescriptor":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def attributes(self) -> tuple[AttributeMeta, ...]:
        out = []
        for col in self.columns:
            if col["name"] == self.class_column:
                continue
            values = tuple(str(v) for v in col.get("values", ()))
            out.append(AttributeMeta(col["name"], col["kind"], len(out), values))
        return tuple(out)


def bundled_descriptor(name: str) -> DatasetDescriptor:
    text = resources.files("icet.resources").joinpath(f"{name}.descriptor.yaml").read_text()
    return DatasetDescriptor.from_dict(yaml.safe_load(text))


def _match_discrete(token: str, values: tuple[str, ...]) -> int | None:
    if token in values:
        return values.index(token)
    try:
        f = float(token)
    except ValueError:
        return None
    for k, v in enumerate(values):
        try:
            if float(v) == f:
                return k
        except ValueError:
            pass
    return None


def load_dataset(path, schema: DatasetDescriptor | str | Path) -> Dataset:
    """Parse a UCI-style delimited file according to a descriptor.

    ``schema`` may be a :class:`DatasetDescriptor`, the path of a descriptor
    file, or the name of a bundled descriptor. Missing values are kept.
    """
    if not isinstance(schema, DatasetDescriptor):
        p = Path(schema)
        schema = DatasetDescriptor.load(p) if p.suffix in (".yaml", ".yml") else bundled_descriptor(str(schema))
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")

    attributes = schema.attributes()
    cols = schema.columns
    class_pos = [c["name"] for c in cols].index(schema.class_column)
    rows, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if schema.delimiter == "whitespace":
                tokens = line.split()
            else:
                tokens = [t.strip() for t in line.split(schema.delimiter)]
            if len(tokens) != len(cols):
                raise DataError(f"{path}:{lineno}: expected {len(cols)} fields, got {len(tokens)}")
            row = []
            for pos, (col, tok) in enumerate(zip(cols, tokens)):
                if pos == class_pos:
                    continue
                if tok == schema.missing:
                    row.append(np.nan)
                elif col["kind"] == DISCRETE:
                    k = _match_discrete(tok, tuple(str(v) for v in col["values"]))
                    if k is None:
                        raise DataError(f"{path}:{lineno}: undeclared value {tok!r} for {col['name']}")
                    row.append(float(k))
                else:
                    try:
                        row.append(float(tok))
                    except ValueError:
                        raise DataError(f"{path}:{lineno}: cannot parse {tok!r} for {col['name']}") from None
            tok = tokens[class_pos]
            if schema.class_threshold is not None:
                try:
                    label = 0 if float(tok) < schema.class_threshold else 1
                except ValueError:
                    raise DataError(f"{path}:{lineno}: cannot parse class value {tok!r}") from None
            else:
                label = _match_discrete(tok, schema.class_labels)
                if label is None:
                    raise DataError(f"{path}:{lineno}: unknown class label {tok!r}")
            rows.append(row)
            labels.append(label)
    if not rows:
        raise DataError(f"{path}: no cases")
    return Dataset(attributes, schema.class_labels, np.array(rows, dtype=float), np.array(labels), schema.name)


def default_data_dir() -> Path:
    import os

    env = os.environ.get("ICET_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def load_bundled(name: str, data_dir=None) -> Dataset:
    """Load one of the five benchmark datasets, preprocessed as in the benchmark.

    Heart Disease has incomplete cases dropped; Hepatitis is imputed with
    1-NN; the others are used as is.
    """
    desc = bundled_descriptor(name)
    data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
    d = load_dataset(data_dir / desc.file, desc)
    if name == "heart":
        d = drop_missing_cases(d)
    elif name == "hepatitis":
        d = impute_nearest_neighbor(d)
    return d


# ---------------------------------------------------------------------------
# missing values


def drop_missing_cases(d: Dataset) -> Dataset:
    keep = ~np.isnan(d.X).any(axis=1)
    return d.subset(np.flatnonzero(keep))


def _normalized(d: Dataset) -> np.ndarray:
    Z = np.array(d.X, dtype=float)
    for a in d.attributes:
        if a.is_discrete:
            continue
        col = Z[:, a.index]
        if np.isnan(col).all():
            continue
        lo, hi = np.nanmin(col), np.nanmax(col)
        Z[:, a.index] = (col - lo) / (hi - lo) if hi > lo else np.where(np.isnan(col), np.nan, 0.0)
    return Z


def nearest_neighbor_distances(d: Dataset) -> np.ndarray:
    """Pairwise distances used for imputation.

    Continuous features are min-max scaled to [0, 1] and contribute their
    absolute difference; discrete features contribute 0 if equal and 1
    otherwise; any comparison involving a missing value contributes 1.
    """
    Z = _normalized(d)
    n, m = Z.shape
    D = np.zeros((n, n))
    for a in d.attributes:
        col = Z[:, a.index]
        diff = np.abs(col[:, None] - col[None, :])
        if a.is_discrete:
            diff = (diff > 0).astype(float)
        diff[np.isnan(diff)] = 1.0
        D += diff
    return D


def impute_nearest_neighbor(d: Dataset) -> Dataset:
    """Fill every missing value from the nearest case that has it.

    Neighbours are ranked by :func:`nearest_neighbor_distances`, ties broken
    by lowest case index. If the nearest neighbour also lacks the value, the
    next nearest is used. Runs on the whole dataset, before any split.
    """
    missing = np.isnan(d.X)
    if not missing.any():
        return d
    if len(d) < 2:
        raise DataError("imputation needs at least two cases")
    D = nearest_neighbor_distances(d)
    X = np.array(d.X)
    for i in np.flatnonzero(missing.any(axis=1)):
        dist = D[i].copy()
        dist[i] = np.inf
        order = np.lexsort((np.arange(len(d)), dist))
        for j in np.flatnonzero(missing[i]):
            donors = order[~missing[order, j]]
            donors = donors[donors != i]
            if donors.size == 0:
                raise DataError(f"no case has a value for attribute {d.attributes[j].name!r}")
            X[i, j] = d.X[donors[0], j]
    return d.with_values(X)


# ---------------------------------------------------------------------------
# splitting


def _rng(seed: int) -> np.random.Generator:
    # PCG64 via numpy's Generator; fixed algorithm so splits replay exactly
    return np.random.Generator(np.random.PCG64(seed))


def _split(d: Dataset, n_first: int, seed: int) -> SplitPair:
    perm = _rng(seed).permutation(len(d))
    a, b = np.sort(perm[:n_first]), np.sort(perm[n_first:])
    return SplitPair(d.subset(a), d.subset(b), seed, a, b)


def random_split(d: Dataset, seed: int) -> SplitPair:
    """Two thirds (rounded to nearest) for training, the rest for testing.

    Rounding reproduces the benchmark sizes: 155 -> 103/52, 296 -> 197/99,
    3772 -> 2515/1257.
    """
    if len(d) == 0:
        raise DataError("cannot split an empty dataset")
    return _split(d, (2 * len(d) + 1) // 3, seed)


def sub_split(train: Dataset, seed: int) -> SplitPair:
    """Random 50/50 partition; the first half gets the extra case when odd."""
    if len(train) < 2:
        raise DataError("sub_split needs at least two cases")
    return _split(train, -(-len(train) // 2), seed)


def class_frequencies(d: Dataset) -> np.ndarray:
    if len(d) == 0:
        raise DataError("class frequencies of an empty dataset")
    return np.bincount(d.y, minlength=d.n_classes) / len(d)
