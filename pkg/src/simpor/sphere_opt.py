"""Gradient ascent restricted to the sphere of radius r around a center point."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NumericalError(ArithmeticError):
    """The objective is non-finite wherever it was probed."""


@dataclass(frozen=True)
class SphereAscentConfig:
    """``step_angle`` is the initial geodesic step in radians; it is halved
    (up to ``max_halvings`` times) whenever the step would lower the objective."""
    step_angle: float = 0.05
    max_iters: int = 300
    improvement_tol: float = 1e-8
    max_halvings: int = 20

    def __post_init__(self):
        if self.step_angle <= 0 or self.max_iters < 1 or self.improvement_tol < 0:
            raise ValueError("invalid sphere ascent configuration")


def literal_preset() -> SphereAscentConfig:
    """1e-5 rad steps and a 300-iteration cap, taken at face value."""
    return SphereAscentConfig(step_angle=1e-5, max_iters=300)


@dataclass(frozen=True, eq=False)
class AscentResult:
    x_star: np.ndarray
    f_log: float
    iters: int
    converged: bool
    x_init: np.ndarray
    f_init: float
    trace: tuple[float, ...] = field(default=(), repr=False)


def tangent_project(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Component of ``g`` orthogonal to the unit vector ``u``."""
    return g - np.dot(g, u) * u


def geodesic_step(center, x_t, p_hat, r: float, step_angle: float) -> np.ndarray:
    """Rotate ``x_t`` by ``step_angle`` along the great circle with tangent ``p_hat``."""
    center = np.asarray(center, dtype=np.float64)
    x = center + (np.asarray(x_t) - center) * np.cos(step_angle) + r * np.asarray(p_hat) * np.sin(step_angle)
    return _reproject(center, x, r)


def _reproject(center: np.ndarray, x: np.ndarray, r: float) -> np.ndarray:
    v = x - center
    nv = np.linalg.norm(v)
    return center + v * (r / nv) if nv > 0 else x


def random_sphere_point(center: np.ndarray, r: float, rng: np.random.Generator) -> np.ndarray:
    while True:
        u = rng.standard_normal(center.shape[0])
        nu = np.linalg.norm(u)
        if nu > 1e-12:
            return center + r * u / nu


def maximize_on_sphere(obj, center, r: float, cfg: SphereAscentConfig = SphereAscentConfig(),
                       rng: np.random.Generator | None = None) -> AscentResult:
    """Locally maximize ``obj.log_ratio`` over ``{x : |x - center| = r}``.

    Starts from a random point on the sphere. Each iteration projects the
    gradient on the tangent plane and takes a geodesic step, halving the
    angle until the objective increases. Stops when no halving helps, when
    the accepted gain drops below ``improvement_tol`` or at ``max_iters``.
    """
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (obj.d,):
        raise ValueError(f"center must have shape ({obj.d},)")
    if not r > 0:
        raise ValueError("radius must be positive")
    rng = rng if rng is not None else np.random.default_rng()

    if obj.d == 1:
        # the "sphere" is the pair {center - r, center + r}
        cands = np.array([center - r, center + r])
        vals = np.asarray(obj.log_ratio(cands), dtype=np.float64)
        pick = int(rng.integers(2))
        if not np.any(np.isfinite(vals)):
            raise NumericalError("objective non-finite at both sphere points")
        best = int(np.nanargmax(np.where(np.isfinite(vals), vals, -np.inf)))
        return AscentResult(cands[best], float(vals[best]), 1, True, cands[pick], float(vals[pick]),
                            (float(vals[pick]), float(vals[best])))

    x = random_sphere_point(center, r, rng)
    f, g = obj.value_and_gradient(x)
    tries = 0
    while not np.isfinite(f):
        tries += 1
        if tries > 20:
            raise NumericalError("objective non-finite at every probed start point")
        x = random_sphere_point(center, r, rng)
        f, g = obj.value_and_gradient(x)
    x_init, f_init = x, f
    trace = [f]
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        u = (x - center) / r
        p = tangent_project(g, u)
        norm_p = np.linalg.norm(p)
        if not np.isfinite(norm_p) or norm_p <= 1e-15 * (np.linalg.norm(g) + 1e-300):
            converged = True
            break
        p_hat = p / norm_p
        angle = cfg.step_angle
        x_new = None
        for _ in range(cfg.max_halvings + 1):
            cand = geodesic_step(center, x, p_hat, r, angle)
            f_cand = float(obj.log_ratio(cand))
            if np.isfinite(f_cand) and f_cand > f:
                x_new = cand
                break
            angle *= 0.5
        if x_new is None:
            converged = True
            break
        gain = f_cand - f
        g = obj.value_and_gradient(x_new)[1]
        x, f = x_new, f_cand
        trace.append(f)
        if gain < cfg.improvement_tol:
            converged = True
            break
    return AscentResult(x, float(f), it, converged, x_init, float(f_init), tuple(trace))
