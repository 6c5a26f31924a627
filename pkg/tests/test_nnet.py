import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simpor import nnet
from simpor.data import DataError
from conftest import blobs


def _fd_check(weights, X, Y, eps=1e-6):
    _, grads = nnet.loss_and_grads(weights, X, Y)
    worst = 0.0
    for li, (W, b) in enumerate(weights):
        for arr, g in ((W, grads[li][0]), (b, grads[li][1])):
            for idx in np.ndindex(arr.shape):
                old = arr[idx]
                arr[idx] = old + eps
                up = nnet.loss_and_grads(weights, X, Y)[0]
                arr[idx] = old - eps
                dn = nnet.loss_and_grads(weights, X, Y)[0]
                arr[idx] = old
                num = (up - dn) / (2 * eps)
                worst = max(worst, abs(num - g[idx]) / max(1.0, abs(num), abs(g[idx])))
    return worst


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    weights = nnet.init_weights([5, 5, 2], rng)
    X = rng.normal(size=(16, 5))
    Y = np.eye(2)[rng.integers(0, 2, 16)]
    assert _fd_check(weights, X, Y) < 1e-4


def test_gradient_deep_net():
    rng = np.random.default_rng(1)
    weights = nnet.init_weights([3, 4, 4, 3], rng)
    X = rng.normal(size=(10, 3))
    Y = np.eye(3)[rng.integers(0, 3, 10)]
    assert _fd_check(weights, X, Y) < 1e-4


def test_zero_weights_give_ln2_loss():
    weights = [(np.zeros((4, 3)), np.zeros(3)), (np.zeros((3, 2)), np.zeros(2))]
    X = np.random.default_rng(0).normal(size=(8, 4))
    Y = np.eye(2)[[0, 1] * 4]
    assert nnet.cross_entropy(nnet.forward(weights, X), Y) == pytest.approx(np.log(2), abs=1e-15)


def test_softmax_rows_sum_to_one_under_large_logits():
    P = nnet.softmax(np.array([[1000.0, 0.0], [-1000.0, 1000.0]]))
    np.testing.assert_allclose(P.sum(axis=1), 1.0)
    assert np.all(np.isfinite(P))


def test_fit_is_deterministic_and_learns_blobs():
    ds = blobs(80, 40, gap=4.0)
    spec = nnet.MlpSpec(hidden=(16,), max_epochs=40, learning_rate=0.01, seed=3)
    a = nnet.train(spec, ds)
    b = nnet.train(spec, ds)
    for (Wa, ba), (Wb, bb) in zip(a.weights, b.weights):
        assert np.array_equal(Wa, Wb) and np.array_equal(ba, bb)
    assert np.mean(a.predict(ds.X) == ds.y) > 0.95
    assert a.loss_history[-1] < a.loss_history[0]


def test_evaluation_defaults():
    s = nnet.evaluation_spec()
    assert s.hidden == (100, 100, 100) and s.max_epochs == 200
    assert s.batch_size == 32 and s.learning_rate == 0.1
    assert s.lr_decay == nnet.LrDecay(0.9, 5, 1e-4)


def test_early_stop_shortens_training():
    ds = blobs(40, 40, gap=6.0)
    spec = nnet.MlpSpec(hidden=(8,), max_epochs=500, learning_rate=0.05, lr_decay=None,
                        early_stop=nnet.EarlyStop(3, 1e-2))
    m = nnet.train(spec, ds)
    assert len(m.loss_history) < 500


def test_warm_start_continues_from_weights():
    ds = blobs(30, 30, gap=3.0)
    spec = nnet.MlpSpec(hidden=(6,), max_epochs=1, learning_rate=1e-12, lr_decay=None)
    first = nnet.train(spec, ds)
    second = nnet.train(nnet.with_seed(spec, 99), ds, init=first)
    np.testing.assert_allclose(second.weights[0][0], first.weights[0][0], atol=1e-9)


def test_dimension_mismatch_raises():
    m = nnet.train(nnet.MlpSpec(hidden=(3,), max_epochs=1), blobs(10, 10))
    with pytest.raises(DataError):
        m.predict_proba(np.zeros((2, 3)))


def test_single_class_rejected():
    with pytest.raises(DataError):
        nnet.fit(nnet.MlpSpec(hidden=(3,), max_epochs=1), np.zeros((4, 2)), np.zeros(4, int), 2)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_loss_raises_training_error():
    X = np.array([[np.inf, 0.0], [0.0, 1.0]])
    with pytest.raises(nnet.TrainingError):
        nnet.fit(nnet.MlpSpec(hidden=(2,), max_epochs=5, learning_rate=0.1), X, np.array([0, 1]))


def test_invalid_spec():
    with pytest.raises(ValueError):
        nnet.MlpSpec(hidden=(0,))
    with pytest.raises(ValueError):
        nnet.MlpSpec(learning_rate=-1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_probabilities_are_a_simplex(seed, k):
    rng = np.random.default_rng(seed)
    w = nnet.init_weights([3, 5, k], rng)
    P = nnet.forward(w, rng.normal(size=(7, 3)) * 10)
    assert np.all(P >= 0)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
