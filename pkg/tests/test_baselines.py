import math

import numpy as np
import pytest
from sklearn.metrics import calinski_harabasz_score, davies_bouldin_score

from _oracles import calinski_harabasz_naive, davies_bouldin_naive
from composite_silhouette.baselines import (averaged_full_data_index, averaged_full_data_indices, best_k,
                                            calinski_harabasz, davies_bouldin, elbow_select, gap_statistic)
from composite_silhouette.data import SyntheticSpec, generate_synthetic


def instances(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(k + 1, 65))
        x = rng.normal(size=(n, int(rng.integers(1, 6))))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
        yield x, labels


def test_ch_db_match_oracles():
    for x, labels in instances(3, 60):
        assert calinski_harabasz(x, labels) == pytest.approx(calinski_harabasz_naive(x, labels), rel=1e-9)
        assert calinski_harabasz(x, labels) == pytest.approx(calinski_harabasz_score(x, labels), rel=1e-9)
        assert davies_bouldin(x, labels) == pytest.approx(davies_bouldin_naive(x, labels), rel=1e-9)
        assert davies_bouldin(x, labels) == pytest.approx(davies_bouldin_score(x, labels), rel=1e-9)


def test_degenerate_indices():
    x = np.array([[0.0, 0], [0, 0], [1, 1], [1, 1]])
    assert math.isinf(calinski_harabasz(x, [0, 0, 1, 1]))
    with pytest.raises(ValueError, match="coincident"):
        davies_bouldin(np.array([[0.0], [2], [1], [1]]), [0, 0, 1, 1])


def test_best_k_directions_and_ties():
    assert best_k({2: 1.0, 3: 3.0, 4: 3.0}) == 3
    assert best_k({2: 1.0, 3: 0.5, 4: 0.5}, maximize=False) == 3


def test_elbow_second_difference():
    assert elbow_select({2: 100, 3: 50, 4: 10, 5: 8, 6: 7}) == 4
    with pytest.raises(ValueError):
        elbow_select({2: 1, 3: 0.5})


@pytest.fixture(scope="module")
def s1_small():
    return generate_synthetic(SyntheticSpec("S1", seed=2, scale=0.05))


def test_full_data_averages_on_blobs(s1_small):
    out = averaged_full_data_indices(s1_small, range(2, 9), ["micro", "macro", "CH", "DB", "EL"], repeats=2, seed=0)
    assert set(out) == {"avg_Sm", "avg_SM", "avg_CH", "avg_DB", "avg_EL"}
    for name in ("avg_Sm", "avg_SM", "avg_CH", "avg_DB"):
        assert out[name].selected == 5, name
    assert out["avg_DB"].direction == "minimize"
    single = averaged_full_data_index(s1_small, range(2, 9), "micro", repeats=2, seed=0)
    assert single.per_k == out["avg_Sm"].per_k
    with pytest.raises(ValueError):
        averaged_full_data_indices(s1_small, [2, 3], ["gap"], 1, 0)


def test_gap_statistic_on_blobs(s1_small):
    g = gap_statistic(s1_small, range(2, 9), n_refs=5, seed=0)
    assert g.selected == 5
    assert set(g.notes["s_k"]) == set(range(2, 9))
    assert all(v >= 0 for v in g.notes["s_k"].values())
