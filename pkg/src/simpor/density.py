"""Gaussian KDE per class and the log posterior-ratio objective.

All quantities are kept in log space; in 8+ dimensions the raw kernel
sums underflow long before the ratio becomes uninformative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, DataError

_LOG_2PI = np.log(2.0 * np.pi)


def scott_bandwidth(n: int, d: int) -> float:
    """Scott's rule as used by scikit-learn: ``n ** (-1 / (d + 4))``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    return float(n ** (-1.0 / (d + 4)))


def _logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    return np.squeeze(m, axis) + np.log(np.sum(np.exp(a - m), axis=axis))


@dataclass(frozen=True, eq=False)
class KdeModel:
    points: np.ndarray
    h: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("KDE needs a non-empty 2-D point set")
        if not self.h > 0:
            raise ValueError("bandwidth must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_log_norm",
                           -np.log(pts.shape[0]) - pts.shape[1] * (np.log(self.h) + 0.5 * _LOG_2PI))

    @classmethod
    def scott(cls, points) -> "KdeModel":
        pts = np.asarray(points, dtype=np.float64)
        return cls(pts, scott_bandwidth(pts.shape[0], pts.shape[1]))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.d:
            raise DataError(f"expected dimension {self.d}, got {x.shape[-1]}")
        return x

    def _exponents(self, x: np.ndarray) -> np.ndarray:
        diff = (x[..., None, :] - self.points) / self.h
        return -0.5 * np.sum(diff * diff, axis=-1)

    def log_density(self, x) -> float | np.ndarray:
        """Log density at one point ``(d,)`` or a batch ``(m, d)``."""
        x = self._check(x)
        return _logsumexp(self._exponents(x)) + self._log_norm

    def log_density_grad(self, x) -> tuple[float, np.ndarray]:
        """Log density and its gradient at a single point.

        The gradient is the kernel-weighted mean of ``(x_i - x) / h**2``.
        """
        x = self._check(x)
        e = self._exponents(x)
        m = e.max()
        w = np.exp(e - m)
        s = w.sum()
        val = m + np.log(s) + self._log_norm
        # elementwise reduction, not BLAS: summation order must not depend on threading
        grad = np.sum(w[:, None] * (self.points - x), axis=0) / (s * self.h * self.h)
        return float(val), grad


def empirical_priors(ds: Dataset) -> tuple[float, float]:
    """Relative class frequencies ``(p(majority), p(minority))``."""
    ds.require_binary()
    c = ds.counts()
    return float(c[ds.majority] / ds.n), float(c[ds.minority] / ds.n)


@dataclass(frozen=True, eq=False)
class PosteriorRatioObjective:
    """log f(x) = log p(x|B) + log p(B) - log p(x|A) - log p(A), B the minority."""

    kde_minority: KdeModel
    kde_majority: KdeModel
    prior_minority: float
    prior_majority: float

    def __post_init__(self):
        if self.kde_minority.d != self.kde_majority.d:
            raise ValueError("class KDEs disagree on dimension")
        if self.prior_minority <= 0 or self.prior_majority <= 0:
            raise ValueError("priors must be positive")
        if abs(self.prior_minority + self.prior_majority - 1.0) > 1e-9:
            raise ValueError("priors must sum to 1")
        object.__setattr__(self, "_log_prior_gap",
                           float(np.log(self.prior_minority) - np.log(self.prior_majority)))

    @classmethod
    def from_dataset(cls, ds: Dataset, shared_bandwidth: bool = False) -> "PosteriorRatioObjective":
        """Fit on the original (non-synthetic) samples of a binary dataset.

        Each class gets its own Scott bandwidth unless ``shared_bandwidth``,
        in which case both use Scott's rule on the pooled count.
        """
        ds.require_binary()
        XA = ds.X[ds.y == ds.majority]
        XB = ds.X[ds.y == ds.minority]
        if shared_bandwidth:
            h = scott_bandwidth(ds.n, ds.d)
            kA, kB = KdeModel(XA, h), KdeModel(XB, h)
        else:
            kA, kB = KdeModel.scott(XA), KdeModel.scott(XB)
        pA, pB = empirical_priors(ds)
        return cls(kB, kA, pB, pA)

    @property
    def d(self) -> int:
        return self.kde_minority.d

    def log_ratio(self, x) -> float | np.ndarray:
        return (self.kde_minority.log_density(x) - self.kde_majority.log_density(x)
                + self._log_prior_gap)

    def log_ratio_gradient(self, x) -> np.ndarray:
        return self.value_and_gradient(x)[1]

    def value_and_gradient(self, x) -> tuple[float, np.ndarray]:
        vB, gB = self.kde_minority.log_density_grad(x)
        vA, gA = self.kde_majority.log_density_grad(x)
        return vB - vA + self._log_prior_gap, gB - gA
