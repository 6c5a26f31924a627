"""Entropy-driven, batch-by-batch selection of the informative training subset."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import nnet
from .data import Dataset


@dataclass(frozen=True)
class ActiveConfig:
    informative_portion: float = 0.3
    batch_size: int = 20
    initial_per_class: int = 3
    probe: nnet.MlpSpec = field(default_factory=nnet.probe_spec)
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.informative_portion <= 1:
            raise ValueError("informative_portion must lie in (0, 1]")
        if self.batch_size < 1 or self.initial_per_class < 1:
            raise ValueError("batch_size and initial_per_class must be >= 1")


@dataclass(frozen=True, eq=False)
class InformativeSet:
    indices: np.ndarray
    rounds: tuple[int, ...]
    """Cumulative end offsets into ``indices``; the first entry closes the seed batch."""
    degenerate: bool = False
    entropy_trace: tuple[tuple[float, ...], ...] = field(default=(), repr=False)

    def batches(self) -> list[np.ndarray]:
        starts = (0,) + self.rounds[:-1]
        return [self.indices[a:b] for a, b in zip(starts, self.rounds)]

    def to_json(self) -> str:
        return json.dumps({
            "indices": self.indices.tolist(),
            "rounds": list(self.rounds),
            "degenerate": self.degenerate,
            "entropy_trace": [list(t) for t in self.entropy_trace],
        })


def entropy(probs, tol: float = 1e-6) -> np.ndarray | float:
    """Base-n Shannon entropy of probability rows over n classes, in [0, 1]."""
    p = np.asarray(probs, dtype=np.float64)
    n = p.shape[-1]
    if n < 2:
        raise ValueError("entropy needs at least two classes")
    if np.any(p < -tol) or np.any(np.abs(p.sum(axis=-1) - 1.0) > tol):
        raise ValueError("input is not a probability vector")
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p), 0.0)
    e = np.clip(-terms.sum(axis=-1) / np.log(n), 0.0, 1.0)
    return float(e) if e.ndim == 0 else e


def top_entropy(scores: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` candidates with highest score; ties go to the lower index."""
    order = np.lexsort((candidates, -scores))
    return candidates[order[:k]]


Trainer = Callable[[np.ndarray, np.ndarray, object], object]


def _default_trainer(cfg: ActiveConfig, n_classes: int) -> Trainer:
    def trainer(X, y, previous):
        spec = nnet.with_seed(cfg.probe, cfg.seed)
        return nnet.fit(spec, X, y, n_classes, init=previous)
    return trainer


def select_informative(train: Dataset, cfg: ActiveConfig = ActiveConfig(),
                       trainer: Trainer | None = None) -> InformativeSet:
    """Accumulate high-entropy samples until ``informative_portion`` of ``train``.

    A probe classifier is fit on a random seed batch (``initial_per_class``
    per class), scores all unselected samples, and the ``batch_size`` most
    uncertain are appended. The probe is then fine-tuned on everything
    selected so far and the loop repeats. ``trainer(X, y, previous_model)``
    may replace the probe; it must return an object with ``predict_proba``.
    """
    n = train.n
    target = int(round(cfg.informative_portion * n))
    if cfg.informative_portion >= 1.0:
        return InformativeSet(np.arange(n), (n,))
    rng = np.random.default_rng(cfg.seed)
    seed_idx = []
    for c, idx in train.class_index.items():
        if len(idx) == 0:
            continue
        take = min(cfg.initial_per_class, len(idx))
        seed_idx.append(rng.choice(idx, size=take, replace=False))
    selected = list(np.sort(np.concatenate(seed_idx)))
    rounds = [len(selected)]
    if target < len(selected):
        warnings.warn(f"informative portion {cfg.informative_portion} gives {target} samples, "
                      f"below the seed batch of {len(selected)}", RuntimeWarning, stacklevel=2)
        return InformativeSet(np.array(selected, dtype=np.int64), tuple(rounds), degenerate=True)

    trainer = trainer or _default_trainer(cfg, train.n_classes)
    mask = np.zeros(n, dtype=bool)
    mask[selected] = True
    model = None
    traces = []
    while len(selected) < target and not mask.all():
        sel = np.array(selected, dtype=np.int64)
        model = trainer(train.X[sel], train.y[sel], model)
        remaining = np.flatnonzero(~mask)
        scores = entropy(model.predict_proba(train.X[remaining]))
        batch = top_entropy(scores, remaining, cfg.batch_size)
        traces.append(tuple(float(s) for s in np.sort(scores)[::-1][:len(batch)]))
        selected.extend(batch.tolist())
        mask[batch] = True
        rounds.append(len(selected))
    return InformativeSet(np.array(selected, dtype=np.int64), tuple(rounds), False, tuple(traces))
