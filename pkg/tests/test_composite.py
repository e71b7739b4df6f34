import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import composite_naive
from composite_silhouette.composite import (CompositeConfig, RawTrial, WeightTransform, collect_trials, combine,
                                            decompose, run_trials, weight_from_discrepancy)
from composite_silhouette.data import SyntheticSpec, generate_synthetic

pair = st.tuples(st.floats(-1, 1), st.floats(-1, 1))
trial_sets = st.lists(pair, min_size=2, max_size=50)


def raw(pairs):
    return [RawTrial(b + 1, None, a, c) for b, (a, c) in enumerate(pairs)]


def test_worked_example():
    # three trials, hand-computed
    pairs = [(0.6, 0.4), (0.5, 0.6), (0.7, 0.7)]
    r = combine(3, raw(pairs))
    d = [0.2, -0.1, 0.0]
    dmax = 0.2
    expected = []
    for (a, c), dl in zip(pairs, d):
        w = (1 + math.tanh(dl / (dmax + 1e-10))) / 2
        expected.append(w * a + (1 - w) * c)
    assert r.s_mm == pytest.approx(sum(expected) / 3, abs=1e-15)
    assert r.delta_max == pytest.approx(0.2)
    assert r.trials[0].weight == pytest.approx((1 + math.tanh(1.0)) / 2, abs=1e-9)
    assert r.trials[2].weight == 0.5
    assert r.mean_micro == pytest.approx(0.6) and r.mean_macro == pytest.approx(17 / 30)


def test_all_equal_scores_weight_half():
    r = combine(2, raw([(0.3, 0.3)] * 5))
    assert all(t.weight == 0.5 for t in r.trials)
    assert r.s_mm == pytest.approx(0.3) and r.std_composite == 0


@settings(max_examples=200)
@given(trial_sets)
def test_matches_naive_definition(pairs):
    r = combine(2, raw(pairs))
    ref, per = composite_naive([a for a, _ in pairs], [c for _, c in pairs])
    assert r.s_mm == pytest.approx(ref, abs=1e-12)
    np.testing.assert_allclose([t.composite for t in r.trials], per, atol=1e-12)


@settings(max_examples=200)
@given(trial_sets, st.sampled_from(["tanh", "linear", "sigmoid(1)", "sigmoid(3)", "step"]),
       st.sampled_from(["pooled", "split"]))
def test_convex_and_antisymmetric(pairs, name, mode):
    tr = WeightTransform.parse(name)
    r = combine(2, raw(pairs), tr, normalization_mode=mode)
    for t in r.trials:
        assert 0 <= t.weight <= 1
        lo, hi = min(t.s_micro, t.s_macro), max(t.s_micro, t.s_macro)
        assert lo - 1e-12 <= t.composite <= hi + 1e-12
        mid, corr = decompose(t)
        assert t.composite == pytest.approx(mid + corr, abs=1e-12)
    # swapping micro and macro mirrors every weight
    swapped = combine(2, raw([(c, a) for a, c in pairs]), tr, normalization_mode=mode)
    for t, u in zip(r.trials, swapped.trials):
        assert t.weight + u.weight == pytest.approx(1.0, abs=1e-12)
        assert t.composite == pytest.approx(u.composite, abs=1e-12)


@given(st.floats(-5, 5))
def test_transforms(x):
    for name in ("tanh", "linear", "sigmoid(2)", "step"):
        z, w = weight_from_discrepancy(x, WeightTransform.parse(name))
        assert -1 <= z <= 1 and w == pytest.approx((1 + z) / 2)
    _, w = weight_from_discrepancy(x, WeightTransform.parse("sigmoid(2)"))
    assert w == pytest.approx(1 / (1 + math.exp(-2 * x)), abs=1e-12)
    assert weight_from_discrepancy(x, WeightTransform("step"))[0] == np.sign(x)
    assert weight_from_discrepancy(x, WeightTransform("linear"))[0] == max(-1.0, min(1.0, x))


def test_transform_parsing():
    assert WeightTransform.parse("sigmoid(2.5)") == WeightTransform("sigmoid", 2.5)
    assert WeightTransform.parse("sigmoid(2.5)").name == "sigmoid(2.5)"
    assert WeightTransform.parse("tanh").name == "tanh"
    with pytest.raises(ValueError):
        WeightTransform.parse("cosh")
    with pytest.raises(ValueError):
        WeightTransform("sigmoid", 0.0)


def test_split_mode_uses_first_half_for_normalizer():
    pairs = [(0.9, 0.1), (0.5, 0.4), (0.6, 0.5), (0.3, 0.2)]
    r = combine(2, raw(pairs), normalization_mode="split")
    assert r.B == 2 and len(r.calibration) == 2
    assert r.delta_max == pytest.approx(0.8)
    assert [t.trial_id for t in r.trials] == [3, 4]
    assert r.trials[0].delta_norm == pytest.approx(0.1 / 0.8)


def test_config_validation():
    with pytest.raises(ValueError):
        CompositeConfig(B=1)
    with pytest.raises(ValueError):
        CompositeConfig(normalization_mode="median")
    with pytest.raises(ValueError):
        CompositeConfig(epsilon=0)


def test_run_trials_deterministic_and_thread_invariant():
    dm = generate_synthetic(SyntheticSpec("S3", seed=0, scale=0.2))
    a = run_trials(dm, 3, CompositeConfig(B=6), seed=4)
    b = run_trials(dm, 3, CompositeConfig(B=6, workers=3), seed=4)
    assert a.s_mm == b.s_mm
    assert [t.composite for t in a.trials] == [t.composite for t in b.trials]
    c = run_trials(dm, 3, CompositeConfig(B=6), seed=5)
    assert c.s_mm != a.s_mm


def test_subsamples_shared_across_k():
    dm = generate_synthetic(SyntheticSpec("S1", seed=0, scale=0.05))
    t3 = collect_trials(dm, 3, 4, 200, seed=1)
    t4 = collect_trials(dm, 4, 4, 200, seed=1)
    for a, b in zip(t3, t4):
        np.testing.assert_array_equal(a.indices, b.indices)


def test_run_trials_rejects_tiny_subsample():
    dm = generate_synthetic(SyntheticSpec("S1", seed=0, scale=0.05))
    with pytest.raises(ValueError):
        run_trials(dm, 5, CompositeConfig(B=3, m=8))
    with pytest.raises(ValueError):
        run_trials(dm, 1)


def test_recovers_true_k_on_separated_blobs():
    dm = generate_synthetic(SyntheticSpec("S1", seed=0, scale=0.1))
    scores = {k: run_trials(dm, k, CompositeConfig(B=5), seed=0).s_mm for k in (3, 4, 5, 6, 7)}
    assert max(scores, key=scores.get) == 5
