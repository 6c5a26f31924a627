import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simpor.data import DataError, Dataset
from simpor.density import KdeModel, PosteriorRatioObjective, empirical_priors, scott_bandwidth
from conftest import blobs


def brute_log_density(P, h, x):
    n, d = P.shape
    dens = sum(np.exp(-0.5 * np.sum((x - p) ** 2) / h**2) for p in P)
    return np.log(dens / (n * (np.sqrt(2 * np.pi) * h) ** d))


def test_scott_rule():
    assert scott_bandwidth(100, 2) == pytest.approx(100 ** (-1 / 6))
    assert scott_bandwidth(1, 5) == 1.0
    with pytest.raises(ValueError):
        scott_bandwidth(0, 2)


def test_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n, d = rng.integers(1, 30), rng.integers(1, 4)
        kde = KdeModel.scott(rng.normal(size=(n, d)))
        x = rng.normal(size=d)
        assert kde.log_density(x) == pytest.approx(brute_log_density(kde.points, kde.h, x), rel=1e-12)


def test_batch_equals_pointwise():
    rng = np.random.default_rng(1)
    kde = KdeModel.scott(rng.normal(size=(20, 3)))
    xs = rng.normal(size=(7, 3))
    np.testing.assert_allclose(kde.log_density(xs), [kde.log_density(x) for x in xs], rtol=1e-14)


def test_no_underflow_far_away():
    kde = KdeModel(np.zeros((3, 8)), 0.1)
    v = kde.log_density(np.full(8, 5.0))
    assert np.isfinite(v)
    assert v == pytest.approx(-0.5 * 8 * 25 / 0.01 - 8 * (np.log(0.1) + 0.5 * np.log(2 * np.pi)))


def test_dimension_mismatch():
    with pytest.raises(DataError):
        KdeModel.scott(np.zeros((3, 2))).log_density(np.zeros(3))


def _objective(seed, d=2):
    return PosteriorRatioObjective.from_dataset(blobs(40, 9, d=d, seed=seed))


def test_gradient_finite_differences():
    rng = np.random.default_rng(2)
    for d in (1, 2, 5):
        obj = _objective(d, d)
        for _ in range(10):
            x = rng.normal(size=d) * 1.5
            g = obj.log_ratio_gradient(x)
            eps = 1e-6
            num = np.array([(obj.log_ratio(x + eps * e) - obj.log_ratio(x - eps * e)) / (2 * eps)
                            for e in np.eye(d)])
            assert np.linalg.norm(num - g) <= 1e-4 * max(1.0, np.linalg.norm(num))


def test_value_and_gradient_consistent():
    obj = _objective(0)
    x = np.array([0.3, 0.4])
    v, g = obj.value_and_gradient(x)
    assert v == obj.log_ratio(x)
    np.testing.assert_array_equal(g, obj.log_ratio_gradient(x))


def test_priors_are_class_frequencies(small_binary):
    pA, pB = empirical_priors(small_binary)
    assert (pA, pB) == (60 / 72, 12 / 72)


def test_literal_ratio_formula_same_argmax():
    ds = blobs(30, 8, seed=3)
    obj = PosteriorRatioObjective.from_dataset(ds)
    A, B = ds.X[ds.y == 0], ds.X[ds.y == 1]
    hA, hB = obj.kde_majority.h, obj.kde_minority.h
    pA, pB = 30 / 38, 8 / 38

    def literal(x):
        kB = sum(np.exp(-np.sum((x - b) ** 2) / (2 * hB**2)) for b in B) / (len(B) * 2 * np.pi * hB**2)
        kA = sum(np.exp(-np.sum((x - a) ** 2) / (2 * hA**2)) for a in A) / (len(A) * 2 * np.pi * hA**2)
        return kB * pB / (kA * pA)

    c, r = B[0], 0.7
    ang = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    pts = c + r * np.column_stack([np.cos(ang), np.sin(ang)])
    lit = np.array([literal(p) for p in pts])
    ours = obj.log_ratio(pts)
    assert np.argmax(lit) == np.argmax(ours)
    np.testing.assert_allclose(np.log(lit), ours, rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.floats(-50, 50), st.floats(-50, 50))
def test_translation_invariance(seed, dx, dy):
    ds = blobs(15, 5, seed=seed)
    shift = np.array([dx, dy])
    a = PosteriorRatioObjective.from_dataset(ds)
    b = PosteriorRatioObjective.from_dataset(Dataset(ds.X + shift, ds.y, ds.labels))
    x = np.random.default_rng(seed).normal(size=2)
    assert b.log_ratio(x + shift) == pytest.approx(a.log_ratio(x), abs=1e-8)


def test_shared_bandwidth_uses_pooled_count(small_binary):
    obj = PosteriorRatioObjective.from_dataset(small_binary, shared_bandwidth=True)
    assert obj.kde_minority.h == obj.kde_majority.h == scott_bandwidth(72, 2)
    per = PosteriorRatioObjective.from_dataset(small_binary)
    assert per.kde_minority.h == scott_bandwidth(12, 2)


def test_invalid_priors():
    k = KdeModel.scott(np.zeros((2, 1)))
    with pytest.raises(ValueError):
        PosteriorRatioObjective(k, k, 0.5, 0.6)
