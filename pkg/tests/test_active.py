from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from simpor import nnet
from simpor.active import ActiveConfig, entropy, select_informative, top_entropy
from simpor.data import Dataset

FAST_PROBE = replace(nnet.probe_spec(), hidden=(8,), max_epochs=40)


def test_entropy_known_values():
    assert entropy([0.9, 0.1]) == pytest.approx(0.4690, abs=5e-5)
    assert entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([1 / 3] * 3) == pytest.approx(1.0)
    np.testing.assert_allclose(entropy([[0.9, 0.1], [0.5, 0.5]]), [0.46899559, 1.0], atol=1e-8)


@pytest.mark.parametrize("bad", [[0.7, 0.7], [-0.1, 1.1], [1.0]])
def test_entropy_rejects_non_simplex(bad):
    with pytest.raises(ValueError):
        entropy(bad)


simplex = arrays(np.float64, st.integers(2, 6), elements=st.floats(0.0, 1.0)).filter(
    lambda a: a.sum() > 1e-3).map(lambda a: a / a.sum())


@settings(max_examples=80, deadline=None)
@given(simplex, st.randoms())
def test_entropy_bounds_and_permutation_invariance(p, rnd):
    e = entropy(p)
    assert 0.0 <= e <= 1.0
    q = p.copy()
    rnd.shuffle(q)
    assert entropy(q) == pytest.approx(e, abs=1e-12)


def test_top_entropy_breaks_ties_by_index():
    scores = np.array([0.5, 0.9, 0.5, 0.9, 0.1])
    cand = np.array([10, 4, 2, 7, 1])
    assert top_entropy(scores, cand, 3).tolist() == [4, 7, 2]


class _Frozen:
    """Probe whose probabilities depend only on x0; training is a no-op."""

    def predict_proba(self, X):
        p = 1.0 / (1.0 + np.exp(-8.0 * (X[:, 0] - 0.3)))
        return np.column_stack([1 - p, p])


def test_frozen_probe_top_k_equivalence():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(200, 2))
    ds = Dataset(X, (X[:, 1] > 0.5).astype(int), ("a", "b"))
    calls = []

    def trainer(Xs, ys, prev):
        calls.append(len(Xs))
        return _Frozen()

    cfg = ActiveConfig(informative_portion=0.4, batch_size=15, seed=2)
    inf = select_informative(ds, cfg, trainer)
    batches = inf.batches()
    chosen = set(batches[0].tolist())
    for b in batches[1:]:
        rest = np.array(sorted(set(range(ds.n)) - chosen))
        e = entropy(_Frozen().predict_proba(X[rest]))
        # brute-force top-k: stable sort on (-entropy, index)
        ref = sorted(zip(-e, rest))[:len(b)]
        assert b.tolist() == [i for _, i in ref]
        chosen |= set(b.tolist())
    assert len(calls) == len(batches) - 1


def test_ip_point_three_on_thousand_samples():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(1000, 2))
    y = (X[:, 0] + 0.5 * rng.normal(size=1000) > 1.0).astype(int)
    ds = Dataset(X, y, ("a", "b"))
    cfg = ActiveConfig(0.3, probe=FAST_PROBE)
    inf = select_informative(ds, cfg)
    assert abs(len(inf.indices) - 300) <= cfg.batch_size
    assert len(set(inf.indices.tolist())) == len(inf.indices)
    assert inf.rounds[0] == 6 and inf.rounds[-1] == len(inf.indices)


def test_selection_concentrates_on_overlap_strip():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1, size=(600, 2))
    p = np.clip((X[:, 0] - 0.4) / 0.2, 0, 1)  # classes mix only for 0.4 < x0 < 0.6
    y = (rng.random(600) < p).astype(int)
    ds = Dataset(X, y, ("a", "b"))
    probe = replace(nnet.probe_spec(), hidden=(10, 10), max_epochs=150, learning_rate=0.02)
    inf = select_informative(ds, ActiveConfig(0.2, probe=probe, seed=5))
    picked = np.concatenate(inf.batches()[1:])
    in_strip = np.mean(np.abs(X[picked, 0] - 0.5) < 0.15)
    assert in_strip > 0.6   # the strip holds 30% of the data


def test_full_portion_returns_everything(small_binary):
    inf = select_informative(small_binary, ActiveConfig(1.0))
    assert inf.indices.tolist() == list(range(small_binary.n))


def test_tiny_portion_is_degenerate(small_binary):
    with pytest.warns(RuntimeWarning):
        inf = select_informative(small_binary, ActiveConfig(0.01))
    assert inf.degenerate and len(inf.indices) == 6


def test_selection_is_seed_deterministic(small_binary):
    cfg = ActiveConfig(0.5, batch_size=5, probe=FAST_PROBE, seed=4)
    a = select_informative(small_binary, cfg)
    b = select_informative(small_binary, cfg)
    assert np.array_equal(a.indices, b.indices)
