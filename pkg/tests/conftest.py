import numpy as np
import pytest

from simpor.data import Dataset

DATA = __import__("pathlib").Path(__file__).parent / "data"


def blobs(n_major=60, n_minor=12, d=2, gap=2.0, seed=0) -> Dataset:
    """Two Gaussian blobs; class codes 0 (majority) and 1 (minority)."""
    rng = np.random.default_rng(seed)
    A = rng.normal(0.0, 1.0, size=(n_major, d))
    B = rng.normal(gap, 1.0, size=(n_minor, d))
    X = np.vstack([A, B])
    y = np.r_[np.zeros(n_major, int), np.ones(n_minor, int)]
    return Dataset(X, y, ("neg", "pos"))


@pytest.fixture
def small_binary():
    return blobs()


@pytest.fixture
def fast_simpor():
    """SIMPOR config with a small probe so unit tests stay quick."""
    from dataclasses import replace

    from simpor import nnet
    from simpor.active import ActiveConfig
    from simpor.balance import SimporConfig

    probe = replace(nnet.probe_spec(), hidden=(8,), max_epochs=30)
    return SimporConfig(active=ActiveConfig(probe=probe, batch_size=5))


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def verdict():
    """Record one summary line per acceptance criterion."""
    def record(criterion: str, ok: bool, detail: str = "", gating: bool = True):
        status = "PASS" if ok else ("FAIL" if gating else "GAP (non-gating)")
        ACCEPTANCE.append((criterion, status, detail))
        print(f"criterion {criterion}: {status} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, status, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0].split(".")[0])):
        terminalreporter.write_line(f"criterion {crit:>4}  {status:<18} {detail}")
