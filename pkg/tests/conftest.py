from __future__ import annotations

import numpy as np
import pytest

from icet.data import CONTINUOUS, DISCRETE, AttributeMeta, Dataset, bundled_descriptor, default_data_dir


def dataset_available(name: str) -> bool:
    return (default_data_dir() / bundled_descriptor(name).file).exists()


def make_dataset(X, y, kinds=None, n_values=None, classes=None, name="synthetic") -> Dataset:
    """Dataset from raw arrays; ``kinds`` is a string like "ccd"."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    m = X.shape[1]
    kinds = kinds or "c" * m
    attrs = []
    for j, k in enumerate(kinds):
        if k == "d":
            nv = (n_values or {}).get(j, max(2, int(np.nanmax(X[:, j])) + 1 if len(X) else 2))
            attrs.append(AttributeMeta(f"a{j}", DISCRETE, j, tuple(str(v) for v in range(nv))))
        else:
            attrs.append(AttributeMeta(f"a{j}", CONTINUOUS, j))
    if classes is None:
        classes = tuple(str(c) for c in range(max(2, int(y.max()) + 1 if len(y) else 2)))
    return Dataset(tuple(attrs), tuple(classes), X, y, name)


def random_dataset(rng: np.random.Generator, n: int, m: int, n_classes: int = 2, discrete_frac: float = 0.3, levels: int = 5) -> Dataset:
    kinds = "".join("d" if rng.random() < discrete_frac else "c" for _ in range(m))
    X = np.empty((n, m))
    n_values = {}
    for j, k in enumerate(kinds):
        if k == "d":
            nv = int(rng.integers(2, 4))
            n_values[j] = nv
            X[:, j] = rng.integers(0, nv, size=n)
        else:
            X[:, j] = rng.integers(0, levels, size=n)
    y = rng.integers(0, n_classes, size=n)
    return make_dataset(X, y, kinds, n_values, tuple(str(c) for c in range(n_classes)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
