import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.metrics import silhouette_samples as sk_samples

from _oracles import macro_naive, micro_naive, silhouette_naive
from composite_silhouette import _rng
from composite_silhouette.cluster import kmeans
from composite_silhouette.silhouette import macro_silhouette, micro_macro, micro_silhouette, silhouette_samples


def random_instance(rng, n_max=64, d_max=5, k_max=6):
    k = int(rng.integers(2, k_max + 1))
    n = int(rng.integers(k, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    x = rng.normal(size=(n, d)) * rng.uniform(0.1, 5)
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(labels)
    return x, labels


def test_hand_computed_example():
    # 1-D: clusters {0, 1} and {4}; singleton scores 0
    x = np.array([[0.0], [1.0], [4.0]])
    s = silhouette_samples(x, [0, 0, 1])
    # point 0: a=1, b=4 -> 0.75; point 1: a=1, b=3 -> 2/3
    np.testing.assert_allclose(s, [0.75, 2 / 3, 0.0])
    assert micro_silhouette(s) == pytest.approx((0.75 + 2 / 3) / 3)
    assert macro_silhouette(s, [0, 0, 1]) == pytest.approx(((0.75 + 2 / 3) / 2) / 2)


def test_matches_naive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(60):
        x, labels = random_instance(rng)
        s = silhouette_samples(x, labels)
        ref = silhouette_naive(x, labels)
        np.testing.assert_allclose(s, ref, atol=1e-9, rtol=0)
        assert micro_silhouette(s) == pytest.approx(micro_naive(ref), abs=1e-9)
        assert macro_silhouette(s, labels) == pytest.approx(macro_naive(ref, labels), abs=1e-9)


def test_matches_sklearn():
    rng = np.random.default_rng(12)
    for _ in range(20):
        x, labels = random_instance(rng, n_max=300, d_max=8, k_max=8)
        np.testing.assert_allclose(silhouette_samples(x, labels), sk_samples(x, labels), atol=1e-9)


def test_accepts_partition():
    x = np.random.default_rng(0).normal(size=(80, 3))
    p = kmeans(x, 3, _rng.stream(0))
    a = micro_macro(x, p)
    b = micro_macro(x, p.labels)
    assert a == b


def test_duplicates_give_zero_not_nan():
    x = np.zeros((6, 2))
    s = silhouette_samples(x, [0, 0, 0, 1, 1, 1])
    assert np.all(s == 0)


def test_errors():
    x = np.zeros((4, 2))
    with pytest.raises(ValueError, match="2 non-empty"):
        silhouette_samples(x, [0, 0, 0, 0])
    with pytest.raises(ValueError, match="empty cluster"):
        silhouette_samples(x, [0, 0, 2, 2])
    with pytest.raises(ValueError, match="covers"):
        silhouette_samples(x, [0, 1])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_values_bounded(seed):
    x, labels = random_instance(np.random.default_rng(seed))
    s = silhouette_samples(x, labels)
    assert np.all(s >= -1) and np.all(s <= 1)
    assert -1 <= macro_silhouette(s, labels) <= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_invariant_to_rigid_motion_and_scale(seed):
    rng = np.random.default_rng(seed)
    x, labels = random_instance(rng)
    q, _ = np.linalg.qr(rng.normal(size=(x.shape[1], x.shape[1])))
    y = 3.7 * x @ q + rng.normal(size=x.shape[1])
    np.testing.assert_allclose(silhouette_samples(x, labels), silhouette_samples(y, labels), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_invariant_to_label_permutation(seed):
    rng = np.random.default_rng(seed)
    x, labels = random_instance(rng)
    perm = rng.permutation(labels.max() + 1)
    s1 = silhouette_samples(x, labels)
    s2 = silhouette_samples(x, perm[labels])
    np.testing.assert_allclose(s1, s2, atol=1e-12)
    assert macro_silhouette(s1, labels) == pytest.approx(macro_silhouette(s2, perm[labels]), abs=1e-12)
