"""Reference oversamplers: ROS, SMOTE, Borderline-SMOTE and ADASYN.

Each takes a binary training set and returns ``(balanced, report)`` with the
synthetic rows appended after the originals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .balance import nearest_neighbors
from .data import Dataset, DataError


@dataclass(frozen=True)
class BaselineConfig:
    method: str = "smote"
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown baseline {self.method!r}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


def _setup(train: Dataset):
    train.require_binary()
    maj, mnr = train.majority, train.minority
    c = train.counts()
    return maj, mnr, int(c[maj] - c[mnr]), np.flatnonzero(train.y == mnr)


def _interpolate(train: Dataset, minority_idx, parents, k, rng) -> np.ndarray:
    """SMOTE step: parent + u * (random minority k-NN of parent - parent)."""
    k_eff = min(k, len(minority_idx) - 1)
    if k_eff < 1:
        raise DataError("SMOTE-style interpolation needs at least 2 minority samples")
    uniq = np.unique(parents)
    nn, _ = nearest_neighbors(train.X, uniq, k_eff, pool=minority_idx)
    row = {int(p): i for i, p in enumerate(uniq)}
    out = np.empty((len(parents), train.d))
    for j, p in enumerate(parents):
        nb = nn[row[int(p)], rng.integers(k_eff)]
        u = rng.random()
        out[j] = train.X[p] + u * (train.X[nb] - train.X[p])
    return out


def ros(train: Dataset, seed: int = 0):
    maj, mnr, need, minority_idx = _setup(train)
    rng = np.random.default_rng(seed)
    picks = minority_idx[rng.integers(len(minority_idx), size=need)]
    out = train.append(train.X[picks], mnr)
    return out, {"method": "ros", "n_synthetic": need, "flags": []}


def smote(train: Dataset, k: int = 5, seed: int = 0):
    maj, mnr, need, minority_idx = _setup(train)
    if len(minority_idx) < 2:
        raise DataError("SMOTE needs at least 2 minority samples")
    rng = np.random.default_rng(seed)
    parents = minority_idx[rng.integers(len(minority_idx), size=need)]
    X_new = _interpolate(train, minority_idx, parents, k, rng) if need else np.empty((0, train.d))
    return train.append(X_new, mnr), {"method": "smote", "n_synthetic": need, "flags": []}


def _majority_neighbor_counts(train: Dataset, minority_idx, k: int) -> np.ndarray:
    k_eff = min(k, train.n - 1)
    nn, _ = nearest_neighbors(train.X, minority_idx, k_eff)
    return (train.y[nn] != train.minority).sum(axis=1), k_eff


def borderline_smote(train: Dataset, k: int = 5, seed: int = 0):
    """SMOTE from DANGER minority samples only: k/2 <= (majority neighbors) < k."""
    maj, mnr, need, minority_idx = _setup(train)
    if len(minority_idx) < 2:
        raise DataError("Borderline-SMOTE needs at least 2 minority samples")
    if need == 0:
        return train, {"method": "borderline_smote", "n_synthetic": 0, "flags": [], "n_danger": 0}
    m, k_eff = _majority_neighbor_counts(train, minority_idx, k)
    danger = minority_idx[(m >= k_eff / 2) & (m < k_eff)]
    if len(danger) == 0:
        out, rep = smote(train, k, seed)
        rep.update(method="borderline_smote", n_danger=0,
                   flags=["no DANGER samples; fell back to SMOTE"])
        return out, rep
    rng = np.random.default_rng(seed)
    parents = danger[rng.integers(len(danger), size=need)]
    X_new = _interpolate(train, minority_idx, parents, k, rng)
    return train.append(X_new, mnr), {"method": "borderline_smote", "n_synthetic": need,
                                      "flags": [], "n_danger": int(len(danger))}


def adasyn_allocation(ratios: np.ndarray, G: int) -> np.ndarray:
    """Integer synthetic counts proportional to ``ratios`` summing exactly to ``G``."""
    ratios = np.asarray(ratios, dtype=np.float64)
    rhat = ratios / ratios.sum()
    g = np.rint(rhat * G).astype(np.int64)
    diff = G - int(g.sum())
    if diff > 0:
        order = np.lexsort((np.arange(len(rhat)), -rhat))
        order = order[rhat[order] > 0]
        for j in range(diff):
            g[order[j % len(order)]] += 1
    elif diff < 0:
        order = np.lexsort((np.arange(len(rhat)), rhat))
        j = 0
        while diff < 0:
            i = order[j % len(order)]
            if g[i] > 0:
                g[i] -= 1
                diff += 1
            j += 1
    return g


def adasyn(train: Dataset, k: int = 5, seed: int = 0):
    """Allocate synthetics in proportion to each minority sample's majority-neighbor share."""
    maj, mnr, need, minority_idx = _setup(train)
    if need == 0:
        return train, {"method": "adasyn", "n_synthetic": 0, "flags": []}
    m, k_eff = _majority_neighbor_counts(train, minority_idx, k)
    r = m / k_eff
    if r.sum() == 0:
        out, rep = smote(train, k, seed)
        rep.update(method="adasyn", flags=["no minority sample has majority neighbors; fell back to SMOTE"])
        return out, rep
    g = adasyn_allocation(r, need)
    parents = np.repeat(minority_idx, g)
    rng = np.random.default_rng(seed)
    X_new = _interpolate(train, minority_idx, parents, k, rng)
    return train.append(X_new, mnr), {"method": "adasyn", "n_synthetic": need, "flags": [],
                                      "allocation": g.tolist()}


METHODS = {
    "ros": lambda ds, k, seed: ros(ds, seed),
    "smote": smote,
    "borderline_smote": borderline_smote,
    "adasyn": adasyn,
}


def oversample(train: Dataset, cfg: BaselineConfig):
    return METHODS[cfg.method](train, cfg.k_neighbors, cfg.seed)
