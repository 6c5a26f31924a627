"""Labeled tabular datasets: CSV I/O, normalization, splitting and the Moon generator."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Columns written by `save_csv` that never hold features.
META_COLUMNS = ("synthetic", "parent_index", "radius", "f_log", "region")


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix with integer class codes.

    ``y`` holds codes into ``labels`` (the original label strings). Binary
    datasets built through `from_labels` are canonicalized so that code 0 is
    the majority class and code 1 the minority class.
    """

    X: np.ndarray
    y: np.ndarray
    labels: tuple[str, ...]
    feature_names: tuple[str, ...] = ()
    label_name: str = "label"
    synthetic: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {X.shape}")
        y = np.asarray(self.y, dtype=np.int64)
        if y.shape != (X.shape[0],):
            raise DataError("X and y disagree on the number of samples")
        if not np.all(np.isfinite(X)):
            raise DataError("features must be finite")
        if y.size and (y.min() < 0 or y.max() >= len(self.labels)):
            raise DataError("class code outside declared labels")
        syn = self.synthetic
        syn = np.zeros(X.shape[0], dtype=bool) if syn is None else np.asarray(syn, dtype=bool)
        if syn.shape != y.shape:
            raise DataError("synthetic mask has the wrong length")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError("feature_names length does not match d")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "synthetic", _frozen(syn))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @classmethod
    def from_labels(cls, X, raw_labels: Sequence, feature_names=(), label_name="label") -> "Dataset":
        """Build from raw label values; binary label sets get majority=0, minority=1."""
        raw = [str(v) for v in raw_labels]
        uniq = sorted(set(raw))
        if len(uniq) == 2:
            counts = {u: raw.count(u) for u in uniq}
            # majority first; equal counts keep sorted order
            uniq.sort(key=lambda u: -counts[u])
        code = {u: i for i, u in enumerate(uniq)}
        y = np.array([code[v] for v in raw], dtype=np.int64)
        return cls(np.asarray(X, dtype=np.float64), y, tuple(uniq), tuple(feature_names), label_name)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    @property
    def class_index(self) -> dict[int, np.ndarray]:
        return {c: np.flatnonzero(self.y == c) for c in range(self.n_classes)}

    def counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    @property
    def majority(self) -> int:
        return int(np.argmax(self.counts()))

    @property
    def minority(self) -> int:
        c = self.counts()
        # argmin over reversed order so a tie resolves to the higher code
        return int(len(c) - 1 - np.argmin(c[::-1]))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.labels, self.feature_names,
                       self.label_name, self.synthetic[idx])

    def with_X(self, X) -> "Dataset":
        return Dataset(X, self.y, self.labels, self.feature_names, self.label_name, self.synthetic)

    def append(self, X_new, y_new, synthetic: bool = True) -> "Dataset":
        X_new = np.asarray(X_new, dtype=np.float64).reshape(-1, self.d)
        y_new = np.broadcast_to(np.asarray(y_new, dtype=np.int64), (X_new.shape[0],))
        syn = np.concatenate([self.synthetic, np.full(X_new.shape[0], synthetic)])
        return Dataset(np.vstack([self.X, X_new]), np.concatenate([self.y, y_new]),
                       self.labels, self.feature_names, self.label_name, syn)

    def require_binary(self) -> None:
        if self.n_classes != 2 or np.any(self.counts() == 0):
            raise DataError(f"binary dataset with both classes present required, got counts {self.counts().tolist()}")


def imbalance_ratio(ds: Dataset) -> float:
    """Majority count divided by minority count."""
    ds.require_binary()
    c = ds.counts()
    return float(c.max() / c.min())


# ---------------------------------------------------------------- CSV

def _parse_float(s: str) -> float | None:
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, label_column: str | int | None = None,
             ignore_columns: Iterable[str] = META_COLUMNS) -> tuple[Dataset, int]:
    """Read a header-first CSV into a `Dataset`.

    The label column is chosen by name or position; by default the last
    non-ignored column. Rows with a missing or unparseable feature are
    dropped whole. Returns the dataset and the number of dropped rows.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    ignored = set(ignore_columns)
    keep = [j for j, h in enumerate(header) if h not in ignored]
    if label_column is None:
        if not keep:
            raise DataError(f"{path}: no label column")
        label_j = keep[-1]
    elif isinstance(label_column, int):
        if not -len(header) <= label_column < len(header):
            raise DataError(f"{path}: label column index {label_column} out of range")
        label_j = label_column % len(header)
    else:
        if label_column not in header:
            raise DataError(f"{path}: no label column named {label_column!r}")
        label_j = header.index(label_column)
    feat_j = [j for j in keep if j != label_j]

    X, labels, dropped = [], [], 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        vals = [_parse_float(row[j].strip()) for j in feat_j]
        lab = row[label_j].strip()
        if any(v is None for v in vals) or lab == "" or lab.lower() in ("nan", "null", "none"):
            dropped += 1
            continue
        X.append(vals)
        labels.append(lab)
    if not X:
        raise DataError(f"{path}: zero usable rows")
    names = tuple(header[j] for j in feat_j)
    ds = Dataset.from_labels(np.array(X, dtype=np.float64).reshape(len(X), len(feat_j)),
                             labels, names, header[label_j])
    return ds, dropped


def _fmt(v: float) -> str:
    return repr(float(v))


def save_csv(ds: Dataset, path, provenance: dict[str, Sequence] | None = None,
             with_synthetic: bool | None = None) -> None:
    """Write features, original label strings and optional metadata columns.

    ``provenance`` maps extra column names to per-row values (``None`` is
    written as an empty cell). The ``synthetic`` 0/1 column is written when
    any row is synthetic unless ``with_synthetic`` says otherwise.
    """
    if with_synthetic is None:
        with_synthetic = bool(ds.synthetic.any()) or bool(provenance)
    provenance = provenance or {}
    header = list(ds.feature_names) + [ds.label_name]
    if with_synthetic:
        header.append("synthetic")
    header += list(provenance)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(ds.n):
            row = [_fmt(v) for v in ds.X[i]] + [ds.labels[ds.y[i]]]
            if with_synthetic:
                row.append("1" if ds.synthetic[i] else "0")
            for col in provenance.values():
                v = col[i]
                row.append("" if v is None else (_fmt(v) if isinstance(v, (float, np.floating)) else str(v)))
            w.writerow(row)


# ---------------------------------------------------------------- normalization

@dataclass(frozen=True)
class MinMaxTransform:
    mins: np.ndarray
    maxs: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        span = self.maxs - self.mins
        const = span <= 0
        out = (X - self.mins) / np.where(const, 1.0, span)
        out[:, const] = 0.0
        return out

    def transform(self, ds: Dataset) -> Dataset:
        return ds.with_X(self.apply(ds.X))

    def to_json(self) -> str:
        return json.dumps({"mins": self.mins.tolist(), "maxs": self.maxs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "MinMaxTransform":
        obj = json.loads(text)
        return cls(np.array(obj["mins"], dtype=np.float64), np.array(obj["maxs"], dtype=np.float64))


def min_max_normalize(ds: Dataset) -> tuple[Dataset, MinMaxTransform]:
    """Scale every feature to [0, 1]; constant features become 0."""
    t = MinMaxTransform(ds.X.min(axis=0), ds.X.max(axis=0))
    return t.transform(ds), t


# ---------------------------------------------------------------- splitting

@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_idx: np.ndarray = field(repr=False, default=None)
    test_idx: np.ndarray = field(repr=False, default=None)


def stratified_split(ds: Dataset, test_fraction: float = 0.2, seed: int = 0) -> SplitPair:
    """Per-class random holdout; each class keeps at least one sample on each side."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c, idx in ds.class_index.items():
        if len(idx) == 0:
            continue
        if len(idx) < 2:
            raise DataError(f"class {ds.labels[c]!r} has fewer than 2 samples")
        n_test = min(max(int(round(len(idx) * test_fraction)), 1), len(idx) - 1)
        perm = rng.permutation(idx)
        test_idx.append(perm[:n_test])
        train_idx.append(perm[n_test:])
    tr = np.sort(np.concatenate(train_idx))
    te = np.sort(np.concatenate(test_idx))
    return SplitPair(ds.subset(tr), ds.subset(te), seed, tr, te)


# ---------------------------------------------------------------- Moon

def make_moon(n_samples: int = 3000, imbalance_ratio: float = 7.0, noise: float = 0.25,
              seed: int = 0) -> Dataset:
    """Two interleaving half circles, min-max scaled, then made imbalanced.

    Class "0" keeps n/2 samples; class "1" is randomly thinned to
    ceil((n/2) / imbalance_ratio) samples (3000 at 7:1 keeps 215).
    """
    if n_samples % 2 or n_samples < 4:
        raise ValueError("n_samples must be an even number >= 4")
    if imbalance_ratio < 1:
        raise ValueError("imbalance_ratio must be >= 1")
    half = n_samples // 2
    n_min = math.ceil(half / imbalance_ratio - 1e-9)
    if n_min < 1:
        raise ValueError("imbalance ratio leaves no minority sample")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, half)
    outer = np.column_stack([np.cos(t), np.sin(t)])
    inner = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    X = np.vstack([outer, inner]) + rng.normal(scale=noise, size=(n_samples, 2))
    X = (X - X.min(axis=0)) / (X.max(axis=0) - X.min(axis=0))
    y = np.repeat([0, 1], half)
    keep_min = np.sort(rng.choice(np.arange(half, n_samples), size=n_min, replace=False))
    idx = np.concatenate([np.arange(half), keep_min])
    return Dataset(X[idx], y[idx], ("0", "1"), ("x1", "x2"), "label")
