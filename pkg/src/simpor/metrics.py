"""Classification metrics, Wilcoxon signed-rank test, winning times and the
repeated-holdout evaluation harness."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import nnet
from .data import Dataset, min_max_normalize, stratified_split


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int


def confusion(y_true, y_pred, positive) -> ConfusionCounts:
    t = np.asarray(y_true) == positive
    p = np.asarray(y_pred) == positive
    return ConfusionCounts(int(np.sum(t & p)), int(np.sum(~t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)))


def _ratio(a: int, b: int) -> float:
    return a / b if b else 0.0


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    per_class: dict = field(default_factory=dict)
    degenerate: tuple = ()


def f1_macro(y_true, y_pred, classes: Sequence | None = None) -> ClassScores:
    """Macro-averaged precision, recall and F1.

    A class missing from both ``y_true`` and ``y_pred`` scores 0 and is
    listed in ``degenerate``.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0 or y_true.shape != y_pred.shape:
        raise ValueError("need equal-length, non-empty label sequences")
    if classes is None:
        classes = np.unique(np.concatenate([y_true, y_pred])).tolist()
    per, degenerate = {}, []
    for c in classes:
        cc = confusion(y_true, y_pred, c)
        if cc.tp + cc.fp + cc.fn == 0:
            degenerate.append(c)
        p = _ratio(cc.tp, cc.tp + cc.fp)
        r = _ratio(cc.tp, cc.tp + cc.fn)
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        per[c] = (p, r, f)
    vals = np.array(list(per.values()))
    return ClassScores(float(vals[:, 0].mean()), float(vals[:, 1].mean()), float(vals[:, 2].mean()),
                       per, tuple(degenerate))


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(y_true, scores, positive=1) -> float:
    """Area under the ROC curve as the Mann-Whitney rank statistic (ties count 1/2)."""
    pos = np.asarray(y_true) == positive
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes in y_true")
    ranks = average_ranks(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


# ---------------------------------------------------------------- Wilcoxon

@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    n_effective: int
    p_value: float
    w_plus: float
    w_minus: float
    method: str
    reliable: bool

    @property
    def significant_at_0_05(self) -> bool:
        return self.p_value < 0.05


def _exact_cdf(doubled_ranks: np.ndarray, w2: int) -> float:
    """P(W+ <= w) under random signs; ranks and w are doubled to stay integral."""
    total = int(doubled_ranks.sum())
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    for r in doubled_ranks.astype(np.int64):
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[:-r] if r else dist
        dist = 0.5 * (dist + shifted)
    return float(dist[:w2 + 1].sum())


def wilcoxon_signed_rank(a, b, method: str = "auto", exact_max_n: int = 25,
                         continuity: bool = True) -> WilcoxonResult:
    """Two-sided paired signed-rank test on ``a - b`` (zero differences dropped).

    ``W = min(W+, W-)``. The p-value comes from the exact null distribution
    when there are at most ``exact_max_n`` nonzero differences (``auto``),
    otherwise from the normal approximation with tie-corrected variance and
    continuity correction (``continuity=False`` drops the 1/2 shift).
    """
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if d.ndim != 1:
        raise ValueError("paired 1-D inputs required")
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return WilcoxonResult(0.0, 0, 1.0, 0.0, 0.0, "none", False)
    ranks = average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    W = min(w_plus, w_minus)
    if method == "auto":
        method = "exact" if n <= exact_max_n else "normal"
    if method == "exact":
        p = min(1.0, 2.0 * _exact_cdf(np.rint(2 * ranks), int(round(2 * W))))
    elif method == "normal":
        mean = n * (n + 1) / 4.0
        _, t = np.unique(np.abs(d), return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(t ** 3 - t)) / 48.0
        z = max(abs(W - mean) - (0.5 if continuity else 0.0), 0.0) / math.sqrt(var) if var > 0 else 0.0
        p = math.erfc(z / math.sqrt(2.0))
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(W, n, float(min(max(p, 0.0), 1.0)), w_plus, w_minus, method, n >= 5)


def winning_times(table: Mapping[str, Sequence[float]]) -> dict[str, int]:
    """Per dataset (position), +1 for every method attaining the best score."""
    names = list(table)
    M = np.array([np.asarray(table[m], dtype=np.float64) for m in names])
    if M.size == 0:
        raise ValueError("empty score table")
    best = M.max(axis=0)
    return {m: int(np.sum(M[i] == best)) for i, m in enumerate(names)}


# ---------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class TrialResult:
    seed: int
    precision: float
    recall: float
    f1: float
    auc: float
    balance_seconds: float
    n_train: int
    n_synthetic: int


@dataclass(frozen=True)
class MetricsReport:
    method: str
    trials: tuple[TrialResult, ...]

    def mean(self, metric: str) -> float:
        return float(np.mean([getattr(t, metric) for t in self.trials]))

    def std(self, metric: str) -> float:
        return float(np.std([getattr(t, metric) for t in self.trials]))

    @property
    def f1(self) -> float:
        return self.mean("f1")

    @property
    def auc(self) -> float:
        return self.mean("auc")

    def to_dict(self) -> dict:
        out = {"method": self.method, "per_trial": [asdict(t) for t in self.trials]}
        for m in ("precision", "recall", "f1", "auc", "balance_seconds"):
            out[m] = {"mean": self.mean(m), "std": self.std(m)}
        return out


# balancer(train, seed) -> balanced train
Balancer = Callable[[Dataset, int], Dataset]


def score_model(model: nnet.TrainedModel, test: Dataset) -> tuple[float, float, float, float]:
    """(precision, recall, macro F1, AUC on the minority-class probability) on raw test data."""
    proba = model.predict_proba(test.X)
    pred = np.argmax(proba, axis=1)
    s = f1_macro(test.y, pred, classes=list(range(test.n_classes)))
    auc = roc_auc(test.y, proba[:, test.minority], positive=test.minority)
    return s.precision, s.recall, s.f1, auc


def run_trial(balancer: Balancer, dataset: Dataset, classifier: nnet.MlpSpec, seed: int,
              normalize: bool = True, test_fraction: float = 0.2) -> TrialResult:
    split = stratified_split(dataset, test_fraction, seed)
    train, test = split.train, split.test
    if normalize:
        train, tf = min_max_normalize(train)
        test = tf.transform(test)
    t0 = time.perf_counter()
    balanced = balancer(train, seed)
    dt = time.perf_counter() - t0
    model = nnet.train(nnet.with_seed(classifier, seed), balanced)
    p, r, f, auc = score_model(model, test)
    return TrialResult(seed, p, r, f, auc, dt, balanced.n, int(balanced.synthetic.sum()))


def trial_seeds(seed: int, trials: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(trials)]


def _trial_star(args):
    return run_trial(*args)


def evaluate(method: str, balancer: Balancer, dataset: Dataset, trials: int = 5,
             classifier: nnet.MlpSpec | None = None, seed: int = 0, normalize: bool = True,
             workers: int = 1) -> MetricsReport:
    """Repeated stratified 80/20 holdout: balance the training part, fit the
    classifier, score the untouched test part."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    classifier = classifier or nnet.evaluation_spec()
    jobs = [(balancer, dataset, classifier, s, normalize) for s in trial_seeds(seed, trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=min(workers, trials)) as ex:
            results = list(ex.map(_trial_star, jobs))
    else:
        results = [_trial_star(j) for j in jobs]
    return MetricsReport(method, tuple(results))
