"""PCA projection by power iteration and the 1-D histogram overlap ratio (HDR)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Projection:
    components: np.ndarray        # (n_components, d), orthonormal rows
    explained_variance: np.ndarray
    mean: np.ndarray
    projected: np.ndarray         # (N, n_components)

    @property
    def explained_ratio(self) -> np.ndarray:
        return self.explained_variance / self.total_variance

    total_variance: float = 1.0


def _power_iteration(C: np.ndarray, basis: list[np.ndarray], tol: float, max_iter: int) -> np.ndarray:
    # deterministic start: the column of C with the largest norm
    v = C[:, int(np.argmax(np.linalg.norm(C, axis=0)))].copy()
    for b in basis:
        v -= np.dot(v, b) * b
    nv = np.linalg.norm(v)
    v = v / nv if nv > 0 else np.eye(C.shape[0])[len(basis)]
    for _ in range(max_iter):
        w = C @ v
        for b in basis:
            w -= np.dot(w, b) * b
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        w /= nw
        if np.dot(w, v) < 0:
            w = -w
        done = np.linalg.norm(w - v) < tol
        v = w
        if done:
            break
    return v


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    return -v if nz.size and v[nz[0]] < 0 else v


def pca_project(X, n_components: int = 2, tol: float = 1e-12, max_iter: int = 100_000) -> Projection:
    """Leading covariance eigenvectors via power iteration with deflation.

    Axes are sign-normalized so their first nonzero coordinate is positive.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2 or n_components < 1 or d < n_components:
        raise ValueError("need N >= 2 and 1 <= n_components <= d")
    mean = X.mean(axis=0)
    Xc = X - mean
    C = Xc.T @ Xc / (n - 1)
    total = float(np.trace(C))
    if total <= 0:
        raise ValueError("zero-variance data")
    comps, lams = [], []
    A = C.copy()
    for _ in range(n_components):
        v = _fix_sign(_power_iteration(A, comps, tol, max_iter))
        lam = float(v @ C @ v)
        comps.append(v)
        lams.append(lam)
        A = A - lam * np.outer(v, v)
    W = np.array(comps)
    return Projection(W, np.array(lams), mean, Xc @ W.T, total)


@dataclass(frozen=True, eq=False)
class HdrResult:
    edges: np.ndarray
    counts: dict              # class code -> per-bin counts
    intersection: int
    hdr: float                # percent
    minority: int

    def to_dict(self) -> dict:
        return {
            "edges": self.edges.tolist(),
            "counts": {str(c): v.tolist() for c, v in self.counts.items()},
            "intersection": self.intersection,
            "minority_total": int(self.counts[self.minority].sum()),
            "hdr_percent": self.hdr,
        }


def hdr(projected_1d, labels, bins: int = 20, minority=None) -> HdrResult:
    """Hard-to-differentiate ratio of a binary 1-D projection.

    Both classes share ``bins`` equal-width bins over the pooled range; each
    bin contributes ``min(count_A, count_B)`` overlapping samples, and the
    total is reported as a percentage of the minority count.
    """
    z = np.asarray(projected_1d, dtype=np.float64).ravel()
    y = np.asarray(labels)
    classes, cnt = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise ValueError("hdr needs exactly two classes")
    if minority is None:
        minority = classes[np.argmin(cnt)] if cnt[0] != cnt[1] else classes[1]
    lo, hi = float(z.min()), float(z.max())
    if hi == lo:
        edges = np.array([lo, hi])
        counts = {c: np.array([int(np.sum(y == c))]) for c in classes}
    else:
        edges = np.linspace(lo, hi, bins + 1)
        # right-inclusive last bin, as np.histogram
        counts = {c: np.histogram(z[y == c], bins=edges)[0] for c in classes}
    inter = int(np.minimum(counts[classes[0]], counts[classes[1]]).sum())
    n_min = int(np.sum(y == minority))
    return HdrResult(edges, counts, inter, 100.0 * inter / n_min, minority)


@dataclass(frozen=True, eq=False)
class ProjectionReport:
    projection: Projection
    hdr: HdrResult
    labels: np.ndarray = field(repr=False)
    synthetic: np.ndarray = field(repr=False)

    def to_json(self) -> str:
        p = self.projection
        return json.dumps({
            "components": p.components.tolist(),
            "explained_variance": p.explained_variance.tolist(),
            "explained_ratio": p.explained_ratio.tolist(),
            "hdr": self.hdr.to_dict(),
        }, indent=2)


def project_dataset(ds, n_components: int = 2) -> ProjectionReport:
    """PCA on a (possibly balanced) dataset plus HDR on its first axis."""
    proj = pca_project(ds.X, n_components)
    h = hdr(proj.projected[:, 0], ds.y, minority=ds.minority)
    return ProjectionReport(proj, h, ds.y, ds.synthetic)
