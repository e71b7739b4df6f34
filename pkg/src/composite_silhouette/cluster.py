"""Lloyd's k-means with k-means++ seeding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol

import numpy as np

from . import _rng


@dataclass(frozen=True)
class Partition:
    """Assignment of each clustered observation to one of ``k`` non-empty clusters."""

    labels: np.ndarray
    k: int
    centroids: np.ndarray
    inertia: float
    n_iter: int = 0
    # objective after every assignment step, in order
    history: tuple = field(default=(), repr=False)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


class Clusterer(Protocol):
    def __call__(self, x: np.ndarray, k: int, rng: np.random.Generator) -> Partition: ...


def _sq_dists(x: np.ndarray, x_sq: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = x_sq[:, None] - 2.0 * (x @ centers.T) + np.einsum("ij,ij->i", centers, centers)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator, n_local_trials: int | None = None) -> np.ndarray:
    """Greedy k-means++ seeding.

    Each new center is the best (lowest potential) of ``n_local_trials``
    candidates drawn with probability proportional to the squared distance to
    the nearest center chosen so far.
    """
    n = x.shape[0]
    if n_local_trials is None:
        n_local_trials = 2 + int(math.log(k))
    x_sq = np.einsum("ij,ij->i", x, x)
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    closest = _sq_dists(x, x_sq, centers[:1])[:, 0]
    potential = closest.sum()
    for c in range(1, k):
        if potential > 0:
            draws = rng.random(n_local_trials) * potential
            cand = np.searchsorted(np.cumsum(closest), draws)
            np.minimum(cand, n - 1, out=cand)
        else:
            # all remaining mass is zero (duplicates); fall back to uniform picks
            cand = rng.integers(n, size=n_local_trials)
        cand_d2 = _sq_dists(x, x_sq, x[cand])
        np.minimum(cand_d2, closest[:, None], out=cand_d2)
        pots = cand_d2.sum(axis=0)
        best = int(np.argmin(pots))
        centers[c] = x[cand[best]]
        closest = cand_d2[:, best]
        potential = pots[best]
    return centers


def _repair_empty(x, labels, centers, d2, k):
    """Move each empty cluster's centroid onto the worst-fitted point of a multi-point cluster."""
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return labels, centers
    labels = labels.copy()
    centers = centers.copy()
    own = d2[np.arange(len(labels)), labels].copy()
    for c in empty:
        movable = counts[labels] > 1
        cand = np.where(movable, own, -1.0)
        p = int(np.argmax(cand))
        counts[labels[p]] -= 1
        labels[p] = c
        counts[c] = 1
        centers[c] = x[p]
        own[p] = -1.0
    return labels, centers


def _means(x, labels, k, fallback):
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    out = fallback.copy()
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz, None]
    return out


def kmeans(x, k: int, rng: np.random.Generator, max_iter: int = 300, rel_tol: float = 1e-6) -> Partition:
    """Cluster the rows of ``x`` into ``k`` non-empty groups.

    Iterates until the relative inertia improvement drops below ``rel_tol``,
    the assignment stops changing, or ``max_iter`` is reached.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("kmeans needs a non-empty 2-D array")
    n = x.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= {n}, got {k}")

    x_sq = np.einsum("ij,ij->i", x, x)
    centers = kmeans_plusplus(x, k, rng)
    labels = None
    prev = math.inf
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_dists(x, x_sq, centers)
        new_labels = np.argmin(d2, axis=1)
        new_labels, centers = _repair_empty(x, new_labels, centers, d2, k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        diff = x - centers[labels]
        inertia = float(np.einsum("ij,ij->", diff, diff))
        history.append(inertia)
        centers = _means(x, labels, k, centers)
        if inertia == 0.0 or (prev - inertia) < rel_tol * prev:
            break
        prev = inertia

    centers = _means(x, labels, k, centers)
    diff = x - centers[labels]
    inertia = float(np.einsum("ij,ij->", diff, diff))
    return Partition(labels.astype(np.int64), k, centers, inertia, n_iter, tuple(history))


@dataclass(frozen=True)
class KMeans:
    """Default partitioner used on every subsample."""

    max_iter: int = 300
    rel_tol: float = 1e-6

    def __call__(self, x, k, rng):
        return kmeans(x, k, rng, self.max_iter, self.rel_tol)


def inertia_curve(data, ks: Iterable[int], repeats: int, seed: int, clusterer: Clusterer | None = None) -> dict[int, float]:
    """Mean full-data inertia per candidate ``k`` over ``repeats`` seeded runs."""
    clusterer = clusterer or KMeans()
    x = np.ascontiguousarray(getattr(data, "values", data), dtype=np.float64)
    ks = list(ks)
    if not ks:
        raise ValueError("empty candidate set")
    out = {}
    for k in ks:
        runs = [clusterer(x, k, _rng.stream(seed, _rng.FULL_DATA, k, r)).inertia for r in range(repeats)]
        out[k] = float(np.mean(runs))
    return out
