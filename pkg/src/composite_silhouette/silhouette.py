"""Per-point Silhouette values and their micro/macro averages.

Distances are exact Euclidean and never materialized as an ``m x m`` matrix:
for every point the kernel streams one row of distances and reduces it into
per-cluster sums, so memory stays at ``O(m * k)``.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .cluster import Partition


@numba.njit(cache=True, nogil=True, fastmath={"reassoc", "contract"})
def _cluster_distance_sums(xt, starts):
    """Sum of distances from each point to every cluster.

    ``xt`` is the ``d x m`` transposed data with points grouped by cluster;
    cluster ``c`` occupies columns ``starts[c]:starts[c + 1]``. Each point's
    accumulators are filled in a fixed order, independent of other points.
    """
    d, m = xt.shape
    k = starts.shape[0] - 1
    out = np.zeros((m, k))
    row = np.empty(m)
    for i in range(m):
        row[:] = 0.0
        for t in range(d):
            xi = xt[t, i]
            coord = xt[t]
            for j in range(m):
                diff = xi - coord[j]
                row[j] += diff * diff
        for c in range(k):
            acc = 0.0
            for j in range(starts[c], starts[c + 1]):
                acc += math.sqrt(row[j])
            out[i, c] = acc
    return out


def _labels_of(p, n):
    labels = p.labels if isinstance(p, Partition) else np.asarray(p)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ValueError(f"partition covers {labels.shape[0]} points, data has {n}")
    return labels


def silhouette_samples(x, p) -> np.ndarray:
    """Silhouette value of every point under partition ``p`` (labels or ``Partition``).

    Members of singleton clusters score 0.
    """
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D array")
    n = x.shape[0]
    labels = _labels_of(p, n)
    k = int(labels.max()) + 1 if n else 0
    sizes = np.bincount(labels, minlength=k)
    if np.count_nonzero(sizes) < 2:
        raise ValueError("silhouette needs at least 2 non-empty clusters")
    if np.any(sizes == 0):
        raise ValueError(f"empty cluster(s) {np.flatnonzero(sizes == 0).tolist()}")

    order = np.argsort(labels, kind="stable")
    starts = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(sizes, out=starts[1:])
    xt = np.ascontiguousarray(x[order].T)
    sums = np.empty((n, k))
    sums[order] = _cluster_distance_sums(xt, starts)

    rows = np.arange(n)
    own_size = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[rows, labels] / (own_size - 1)
        mean_other = sums / sizes[None, :]
    mean_other[rows, labels] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(n)
    ok = (own_size > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    np.clip(s, -1.0, 1.0, out=s)
    return s


def micro_silhouette(s) -> float:
    """Mean over all points."""
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty silhouette vector")
    return float(s.mean())


def macro_silhouette(s, p) -> float:
    """Mean over clusters of the within-cluster mean, each cluster weighted equally."""
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty silhouette vector")
    labels = _labels_of(p, s.shape[0])
    k = p.k if isinstance(p, Partition) else int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=k)
    if np.any(sizes == 0):
        raise ValueError(f"empty cluster(s) {np.flatnonzero(sizes == 0).tolist()}")
    per_cluster = np.bincount(labels, weights=s, minlength=k) / sizes
    return float(per_cluster.mean())


def micro_macro(x, p) -> tuple[float, float]:
    s = silhouette_samples(x, p)
    return micro_silhouette(s), macro_silhouette(s, p)
