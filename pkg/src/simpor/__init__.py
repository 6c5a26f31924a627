"""Imbalanced-data oversampling toward maximum posterior ratio, with baselines and an evaluation harness."""

from .balance import BalanceResult, SimporConfig, balance
from .data import Dataset, load_csv, make_moon, save_csv

__all__ = ["BalanceResult", "Dataset", "SimporConfig", "balance", "load_csv", "make_moon", "save_csv"]
__version__ = "0.1.0"
