import csv
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from simpor import nnet
from simpor.methods import MethodBalancer
from simpor.metrics import (average_ranks, confusion, evaluate, f1_macro, roc_auc, trial_seeds,
                            wilcoxon_signed_rank, winning_times)
from conftest import DATA, blobs


def f1_oracle(t, p):
    out = []
    for c in sorted(set(t) | set(p)):
        tp = sum(a == c and b == c for a, b in zip(t, p))
        fp = sum(a != c and b == c for a, b in zip(t, p))
        fn = sum(a == c and b != c for a, b in zip(t, p))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        out.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return sum(out) / len(out)


def auc_oracle(y, s):
    pos = [v for v, t in zip(s, y) if t == 1]
    neg = [v for v, t in zip(s, y) if t == 0]
    wins = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in pos for b in neg)
    return wins / (len(pos) * len(neg))


def exact_wilcoxon(d):
    """Enumerate all 2^n sign patterns."""
    d = np.asarray(d, float)
    d = d[d != 0]
    r = stats.rankdata(np.abs(d))
    wp = r[d > 0].sum()
    W = min(wp, r.sum() - wp)
    tot = [sum(ri for ri, s in zip(r, signs) if s) for signs in itertools.product((0, 1), repeat=len(r))]
    tot = np.array(tot)
    lo = np.mean(tot <= W + 1e-9)
    return W, min(1.0, 2 * lo)


def test_confusion_counts():
    c = confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1], 1)
    assert (c.tp, c.fp, c.fn, c.tn) == (2, 1, 1, 1)


def test_f1_against_hand_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.integers(1, 40)
        t, p = rng.integers(0, 2, n), rng.integers(0, 2, n)
        assert f1_macro(t, p).f1 == pytest.approx(f1_oracle(t.tolist(), p.tolist()), abs=1e-12)


def test_f1_known_value():
    s = f1_macro([0, 0, 0, 1], [0, 0, 1, 1])
    assert s.f1 == pytest.approx((0.8 + 2 / 3) / 2)
    assert s.precision == pytest.approx(0.75) and s.recall == pytest.approx(5 / 6)


def test_f1_degenerate_class_listed():
    s = f1_macro([0, 0], [0, 0], classes=[0, 1])
    assert s.degenerate == (1,) and s.f1 == 0.5


def test_average_ranks():
    assert average_ranks([3, 1, 3, 2]).tolist() == [3.5, 1.0, 3.5, 2.0]


def test_auc_against_pair_counting_with_ties():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = rng.integers(2, 60)
        y = rng.integers(0, 2, n)
        y[:2] = [0, 1]
        s = rng.integers(0, 5, n) / 4.0
        assert roc_auc(y, s) == auc_oracle(y.tolist(), s.tolist())


def test_auc_edge_cases():
    assert roc_auc([0, 1], [0.2, 0.9]) == 1.0
    assert roc_auc([0, 1], [0.5, 0.5]) == 0.5
    with pytest.raises(ValueError):
        roc_auc([1, 1], [0.1, 0.2])


def test_wilcoxon_exact_enumeration_small_n():
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = rng.integers(1, 13)
        a = rng.integers(0, 6, n) / 5.0
        b = rng.integers(0, 6, n) / 5.0
        if np.all(a == b):
            continue
        res = wilcoxon_signed_rank(a, b)
        W, p = exact_wilcoxon(a - b)
        assert res.statistic == W
        assert abs(res.p_value - p) <= 0.005
        assert res.p_value == pytest.approx(p, abs=1e-12)


def test_wilcoxon_normal_matches_scipy_for_large_n():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=41), rng.normal(0.3, 1.0, size=41)
    ours = wilcoxon_signed_rank(a, b)
    ref = stats.wilcoxon(a, b, correction=True, method="approx")
    assert ours.method == "normal"
    assert ours.statistic == ref.statistic
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), min_size=1, max_size=40))
def test_wilcoxon_swap_invariance(pairs):
    a = np.array([p[0] for p in pairs], float)
    b = np.array([p[1] for p in pairs], float)
    x, y = wilcoxon_signed_rank(a, b), wilcoxon_signed_rank(b, a)
    assert x.p_value == pytest.approx(y.p_value) and x.statistic == y.statistic
    assert 0.0 <= x.p_value <= 1.0


def test_wilcoxon_all_ties():
    r = wilcoxon_signed_rank([1, 2], [1, 2])
    assert r.p_value == 1.0 and r.n_effective == 0 and not r.reliable


def _reference_table(name):
    with open(DATA / f"table_{name}.csv") as fh:
        rows = list(csv.DictReader(fh))
    return {m: [float(r[m]) for r in rows] for m in rows[0] if m != "dataset"}


def test_wilcoxon_reproduces_reference_p_values_without_continuity():
    with open(DATA / "table_wilcoxon.csv") as fh:
        reference = list(csv.DictReader(fh))
    for metric in ("f1", "auc"):
        t = _reference_table(metric)
        for row in reference:
            p = wilcoxon_signed_rank(t["SIMPOR"], t[row["method"]], continuity=False).p_value
            assert p == pytest.approx(float(row[f"{metric}_p"]), rel=0.01)


def test_winning_times_ties_count_for_all():
    wt = winning_times({"a": [1.0, 0.5, 0.9], "b": [1.0, 0.7, 0.1], "c": [0.2, 0.7, 0.3]})
    assert wt == {"a": 2, "b": 2, "c": 1}


def test_trial_seeds_stable():
    assert trial_seeds(0, 5) == trial_seeds(0, 5)
    assert len(set(trial_seeds(0, 5))) == 5


def test_evaluate_is_deterministic_and_parallel_safe():
    ds = blobs(60, 15, gap=2.5)
    clf = nnet.MlpSpec(hidden=(8,), max_epochs=20)
    one = evaluate("smote", MethodBalancer("smote"), ds, 2, clf, seed=4)
    two = evaluate("smote", MethodBalancer("smote"), ds, 2, clf, seed=4, workers=2)
    assert [t.f1 for t in one.trials] == [t.f1 for t in two.trials]
    assert [t.auc for t in one.trials] == [t.auc for t in two.trials]
    t = one.trials[0]
    assert t.n_train == 96 and t.n_synthetic == 36
    d = one.to_dict()
    assert set(d["f1"]) == {"mean", "std"} and len(d["per_trial"]) == 2
