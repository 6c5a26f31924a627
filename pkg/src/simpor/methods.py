"""Name -> balancing method registry shared by the evaluation harness and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import baselines
from .balance import SimporConfig, balance
from .data import Dataset

METHOD_NAMES = ("simpor", "ros", "smote", "borderline_smote", "adasyn", "none")


@dataclass(frozen=True)
class MethodBalancer:
    """Picklable ``(train, seed) -> balanced train`` callable."""

    name: str
    simpor: SimporConfig = field(default_factory=SimporConfig)
    k_neighbors: int = 5

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise ValueError(f"unknown method {self.name!r}; choose from {', '.join(METHOD_NAMES)}")

    def run(self, train: Dataset, seed: int):
        """Balanced dataset plus the method's report (and synthetics for simpor)."""
        if self.name == "none":
            return train, {"method": "none", "n_synthetic": 0, "flags": []}, None
        if self.name == "simpor":
            res = balance(train, replace(self.simpor, seed=seed))
            return res.dataset, res.report, res
        out, rep = baselines.oversample(train, baselines.BaselineConfig(self.name, self.k_neighbors, seed))
        return out, rep, None

    def __call__(self, train: Dataset, seed: int) -> Dataset:
        return self.run(train, seed)[0]
