"""Minority oversampling by sphere-constrained posterior-ratio maximization.

The informative subset is balanced first, then the rest of the training
set. Every synthetic sample sits on a sphere around a minority parent; its
radius is drawn from a half-normal scaled by the parent's mean k-NN
distance and its direction maximizes the KDE posterior ratio.

The synthesis plan (parents, radii, per-task seeds) is drawn serially from
one generator; the maximizations are pure tasks, so any worker count gives
the same output.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import multiprocessing as mp

import numpy as np

from .active import ActiveConfig, select_informative
from .data import Dataset, DataError
from .density import PosteriorRatioObjective
from .sphere_opt import SphereAscentConfig, maximize_on_sphere

RADIUS_EPS = 1e-9


@dataclass(frozen=True)
class SimporConfig:
    k: int = 5
    alpha: float = 0.6
    active: ActiveConfig = field(default_factory=ActiveConfig)
    ascent: SphereAscentConfig = field(default_factory=SphereAscentConfig)
    rejection_limit: int = 50
    neighbors: str = "all"           # or "minority_only" for the radius neighborhood
    shared_bandwidth: bool = False
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.rejection_limit < 1:
            raise ValueError("rejection_limit must be >= 1")
        if self.neighbors not in ("all", "minority_only"):
            raise ValueError("neighbors must be 'all' or 'minority_only'")


@dataclass(frozen=True, eq=False)
class SyntheticSample:
    features: np.ndarray
    label: int
    parent_index: int
    radius: float
    f_log: float
    f_init: float
    region: str          # "informative" | "remaining"
    iters: int = 0
    converged: bool = True


# ---------------------------------------------------------------- neighborhoods

def _pairwise_dist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def nearest_neighbors(X: np.ndarray, rows, k: int, pool=None, chunk: int = 256):
    """Exhaustive k-NN for each index in ``rows`` among ``pool`` (default: all),
    excluding the query itself. Ties resolve by ascending index.

    Returns ``(indices, distances)``, both of shape ``(len(rows), k)``.
    """
    rows = np.asarray(rows, dtype=np.int64)
    pool = np.arange(X.shape[0]) if pool is None else np.sort(np.asarray(pool, dtype=np.int64))
    self_in_pool = bool(np.isin(rows, pool).any())
    if k > len(pool) - self_in_pool:
        raise DataError(f"k={k} exceeds the number of available neighbors")
    out_i = np.empty((len(rows), k), dtype=np.int64)
    out_d = np.empty((len(rows), k))
    for s in range(0, len(rows), chunk):
        r = rows[s:s + chunk]
        D = _pairwise_dist(X[r], X[pool])
        D[pool[None, :] == r[:, None]] = np.inf
        order = np.argsort(D, axis=1, kind="stable")[:, :k]
        out_i[s:s + chunk] = pool[order]
        out_d[s:s + chunk] = np.take_along_axis(D, order, axis=1)
    return out_i, out_d


def knn_range(ds: Dataset, sample_index: int, k: int, pool=None) -> float:
    """Mean Euclidean distance from a sample to its k nearest other samples."""
    if k > ds.n - 1:
        raise DataError(f"k={k} exceeds N-1={ds.n - 1}")
    _, d = nearest_neighbors(ds.X, [sample_index], k, pool)
    return float(d[0].mean())


def reject_candidate(ds: Dataset, candidate_index: int, k: int,
                     neighbors: np.ndarray | None = None) -> tuple[bool, dict[int, int]]:
    """Reject when some other class outnumbers the candidate's own class among its k-NN.

    Returns ``(accepted, {class code: count})``.
    """
    if neighbors is None:
        neighbors = nearest_neighbors(ds.X, [candidate_index], k)[0][0]
    hist = {c: 0 for c in range(ds.n_classes)}
    for j in neighbors:
        hist[int(ds.y[j])] += 1
    own = hist[int(ds.y[candidate_index])]
    other = max((v for c, v in hist.items() if c != ds.y[candidate_index]), default=0)
    return other <= own, hist


def _excess(ds: Dataset, idx: int, hist: dict[int, int]) -> int:
    own = hist[int(ds.y[idx])]
    return max((v for c, v in hist.items() if c != ds.y[idx]), default=0) - own


def sample_radius(R: float, alpha: float, rng: np.random.Generator) -> float:
    """Draw ``|g|`` with ``g ~ Normal(0, (alpha R)^2)``, redrawing 0 and values above 4 alpha R."""
    if R < 0:
        raise ValueError("R must be non-negative")
    if R == 0:
        warnings.warn("zero neighbor range; using epsilon radius", RuntimeWarning, stacklevel=2)
        return RADIUS_EPS
    sd = alpha * R
    while True:
        r = abs(rng.normal(0.0, sd))
        if 0 < r <= 4 * sd:
            return r


# ---------------------------------------------------------------- worker plumbing

_WORKER_STATE: dict = {}


def _init_worker(obj, ascent):
    _WORKER_STATE["obj"] = obj
    _WORKER_STATE["ascent"] = ascent


def _run_task(task):
    center, r, seed_key = task
    res = maximize_on_sphere(_WORKER_STATE["obj"], center, r, _WORKER_STATE["ascent"],
                             np.random.default_rng(seed_key))
    return res.x_star, res.f_log, res.f_init, res.iters, res.converged


def _run_tasks(obj, ascent, tasks, workers: int):
    if workers <= 1 or len(tasks) < 2:
        _init_worker(obj, ascent)
        try:
            return [_run_task(t) for t in tasks]
        finally:
            _WORKER_STATE.clear()
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
    chunk = max(1, math.ceil(len(tasks) / (workers * 4)))
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                             initializer=_init_worker, initargs=(obj, ascent)) as ex:
        return list(ex.map(_run_task, tasks, chunksize=chunk))


def default_workers() -> int:
    return max(1, int(os.environ.get("SIMPOR_WORKERS", "1")))


# ---------------------------------------------------------------- balance

@dataclass(frozen=True, eq=False)
class BalanceResult:
    dataset: Dataset
    synthetics: list[SyntheticSample]
    report: dict
    informative: np.ndarray = field(repr=False, default=None)

    def provenance(self) -> dict[str, list]:
        """Per-row metadata columns for `data.save_csv`."""
        n0 = self.dataset.n - len(self.synthetics)
        cols = {"parent_index": [None] * n0, "radius": [None] * n0,
                "f_log": [None] * n0, "region": [None] * n0}
        for s in self.synthetics:
            cols["parent_index"].append(s.parent_index)
            cols["radius"].append(float(s.radius))
            cols["f_log"].append(float(s.f_log))
            cols["region"].append(s.region)
        return cols


def balance(train: Dataset, cfg: SimporConfig = SimporConfig()) -> BalanceResult:
    """Oversample the minority class of a binary dataset to exact parity.

    The active-learning probe is seeded from ``cfg.seed``. KDEs, priors and
    neighborhoods are fixed from ``train`` and never see synthetic samples.
    """
    t0 = time.perf_counter()
    train.require_binary()
    maj, mnr = train.majority, train.minority
    counts = train.counts()
    need = int(counts[maj] - counts[mnr])
    report = {
        "counts_before": {train.labels[c]: int(v) for c, v in enumerate(counts)},
        "k": cfg.k, "alpha": cfg.alpha, "seed": cfg.seed,
        "informative_portion": cfg.active.informative_portion,
        "phase1": 0, "phase2": 0, "rejections": 0, "rejection_fallbacks": 0,
        "flags": [],
    }
    if need == 0:
        report.update(counts_after=report["counts_before"], n_synthetic=0,
                      seconds_active=0.0, seconds_synthesis=0.0, seconds_total=0.0)
        return BalanceResult(train, [], report, np.arange(0))

    k = cfg.k
    if k > train.n - 1:
        k = train.n - 1
        report["flags"].append(f"k clamped to {k}")
    # --- informative region
    ta = time.perf_counter()
    inf = select_informative(train, replace(cfg.active, seed=cfg.seed))
    if inf.degenerate:
        report["flags"].append("informative set degenerate (seed batch only)")
    t_active = time.perf_counter() - ta
    in_S = np.zeros(train.n, dtype=bool)
    in_S[inf.indices] = True

    minority_idx = np.flatnonzero(train.y == mnr)
    nn_idx, _ = nearest_neighbors(train.X, minority_idx, k)
    if cfg.neighbors == "minority_only":
        kk = min(k, len(minority_idx) - 1)
        if kk < 1:
            range_d = np.zeros((len(minority_idx), 1))
        else:
            _, range_d = nearest_neighbors(train.X, minority_idx, kk, pool=minority_idx)
    else:
        _, range_d = nearest_neighbors(train.X, minority_idx, k)
    R_of = {int(i): float(d.mean()) for i, d in zip(minority_idx, range_d)}
    verdict = {}
    for i, nb in zip(minority_idx, nn_idx):
        ok, hist = reject_candidate(train, int(i), k, nb)
        verdict[int(i)] = (ok, _excess(train, int(i), hist))

    S_min = minority_idx[in_S[minority_idx]]
    rest_min = minority_idx[~in_S[minority_idx]]
    A_S = int(np.sum(train.y[inf.indices] == maj))
    need1 = min(max(0, A_S - len(S_min)), need) if len(S_min) else 0
    if len(S_min) == 0 and A_S > 0:
        report["flags"].append("no minority sample in informative set; phase 1 skipped")
    need2 = need - need1
    pool2 = rest_min
    if need2 and len(pool2) == 0:
        pool2 = minority_idx
        report["flags"].append("no minority sample outside informative set; phase 2 drew from all minority")

    rng = np.random.default_rng(cfg.seed)

    def draw(pool):
        tried = []
        for _ in range(cfg.rejection_limit):
            p = int(pool[rng.integers(len(pool))])
            if verdict[p][0]:
                return p
            report["rejections"] += 1
            tried.append(p)
        report["rejection_fallbacks"] += 1
        return min(tried, key=lambda q: verdict[q][1])

    plan = []   # (parent, radius, region)
    for region, pool, count in (("informative", S_min, need1), ("remaining", pool2, need2)):
        for _ in range(count):
            p = draw(pool)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                r = sample_radius(R_of[p], cfg.alpha, rng)
            if caught:
                report["flags"].append(f"zero neighbor range at parent {p}")
            plan.append((p, r, region))
    report["phase1"], report["phase2"] = need1, need2

    obj = PosteriorRatioObjective.from_dataset(train, cfg.shared_bandwidth)
    tasks = [(train.X[p], r, [cfg.seed, p, n]) for n, (p, r, _) in enumerate(plan)]
    ts = time.perf_counter()
    results = _run_tasks(obj, cfg.ascent, tasks, cfg.workers)
    t_syn = time.perf_counter() - ts

    synthetics = [
        SyntheticSample(x, mnr, p, r, f, f0, region, it, conv)
        for (p, r, region), (x, f, f0, it, conv) in zip(plan, results)
    ]
    out = train.append(np.array([s.features for s in synthetics]), mnr)
    c_after = out.counts()
    report.update(
        counts_after={train.labels[c]: int(v) for c, v in enumerate(c_after)},
        n_synthetic=len(synthetics),
        n_informative=int(len(inf.indices)),
        informative_minority=int(len(S_min)),
        informative_majority=A_S,
        active_rounds=len(inf.rounds),
        not_converged=int(sum(not s.converged for s in synthetics)),
        mean_iters=float(np.mean([s.iters for s in synthetics])),
        bandwidth_minority=obj.kde_minority.h,
        bandwidth_majority=obj.kde_majority.h,
        seconds_active=t_active,
        seconds_synthesis=t_syn,
        seconds_total=time.perf_counter() - t0,
    )
    return BalanceResult(out, synthetics, report, inf.indices)
