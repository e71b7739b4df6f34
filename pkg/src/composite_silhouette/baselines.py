"""Comparison criteria: full-data index averages, elbow and gap statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _rng
from .cluster import Clusterer, KMeans, Partition
from .silhouette import macro_silhouette, micro_silhouette, silhouette_samples

# CLI-facing baseline names -> report names
BASELINE_NAMES = {
    "micro": "avg_Sm",
    "macro": "avg_SM",
    "CH": "avg_CH",
    "DB": "avg_DB",
    "EL": "avg_EL",
    "gap": "GAPs",
}
DIRECTIONS = {
    "avg_Sm": "maximize",
    "avg_SM": "maximize",
    "avg_CH": "maximize",
    "avg_DB": "minimize",
    "avg_EL": "select",
    "GAPs": "select",
    "mean_sub_micro": "maximize",
    "mean_sub_macro": "maximize",
}


@dataclass(frozen=True)
class BaselineValue:
    index_name: str
    per_k: dict
    selected: int
    direction: str
    notes: dict = field(default_factory=dict)


def best_k(values: Mapping[int, float], maximize: bool = True) -> int:
    """Extremal candidate; ties go to the smallest ``k``."""
    if not values:
        raise ValueError("no candidates")
    ks = sorted(values)
    sign = 1.0 if maximize else -1.0
    best = ks[0]
    for k in ks[1:]:
        if sign * values[k] > sign * values[best]:
            best = k
    return best


def _labels(p):
    return np.asarray(p.labels if isinstance(p, Partition) else p, dtype=np.int64)


def calinski_harabasz(x, p) -> float:
    """Between/within dispersion ratio; ``inf`` when every cluster is a point mass."""
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    labels = _labels(p)
    n = x.shape[0]
    k = int(labels.max()) + 1
    if k < 2:
        raise ValueError("Calinski-Harabasz needs k >= 2")
    if n <= k:
        raise ValueError(f"Calinski-Harabasz needs more points ({n}) than clusters ({k})")
    sizes = np.bincount(labels, minlength=k)
    centroids = np.zeros((k, x.shape[1]))
    np.add.at(centroids, labels, x)
    centroids /= sizes[:, None]
    grand = x.mean(axis=0)
    between = float(np.sum(sizes * np.sum((centroids - grand) ** 2, axis=1)))
    within = float(np.sum((x - centroids[labels]) ** 2))
    if within == 0.0:
        return math.inf
    return (between / (k - 1)) / (within / (n - k))


def davies_bouldin(x, p) -> float:
    """Mean over clusters of the worst scatter-to-separation ratio (lower is better)."""
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    labels = _labels(p)
    k = int(labels.max()) + 1
    if k < 2:
        raise ValueError("Davies-Bouldin needs k >= 2")
    sizes = np.bincount(labels, minlength=k)
    centroids = np.zeros((k, x.shape[1]))
    np.add.at(centroids, labels, x)
    centroids /= sizes[:, None]
    scatter = np.bincount(labels, weights=np.linalg.norm(x - centroids[labels], axis=1), minlength=k) / sizes
    sep = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    iu = np.triu_indices(k, 1)
    zero = np.flatnonzero(sep[iu] == 0.0)
    if zero.size:
        i, j = iu[0][zero[0]], iu[1][zero[0]]
        raise ValueError(f"clusters {i} and {j} have coincident centroids")
    ratio = (scatter[:, None] + scatter[None, :]) / np.where(sep == 0, np.inf, sep)
    np.fill_diagonal(ratio, -np.inf)
    return float(ratio.max(axis=1).mean())


def averaged_full_data_indices(data, ks: Iterable[int], indices: Sequence[str], repeats: int, seed: int,
                               clusterer: Clusterer | None = None) -> dict[str, BaselineValue]:
    """Average several indices over the same ``repeats`` full-data clusterings per ``k``.

    ``indices`` uses the short names of :data:`BASELINE_NAMES` (``gap`` excluded).
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    clusterer = clusterer or KMeans()
    x = np.ascontiguousarray(getattr(data, "values", data), dtype=np.float64)
    wanted = list(dict.fromkeys(indices))
    bad = [w for w in wanted if w not in BASELINE_NAMES or w == "gap"]
    if bad:
        raise ValueError(f"unknown full-data index {bad}")
    ks = sorted(ks)
    sums = {w: {} for w in wanted}
    notes: dict[str, dict] = {w: {} for w in wanted}
    for k in ks:
        acc = {w: [] for w in wanted}
        for r in range(repeats):
            part = clusterer(x, k, _rng.stream(seed, _rng.FULL_DATA, k, r))
            if "micro" in acc or "macro" in acc:
                s = silhouette_samples(x, part)
                if "micro" in acc:
                    acc["micro"].append(micro_silhouette(s))
                if "macro" in acc:
                    acc["macro"].append(macro_silhouette(s, part))
            if "CH" in acc:
                acc["CH"].append(calinski_harabasz(x, part))
            if "DB" in acc:
                acc["DB"].append(davies_bouldin(x, part))
            if "EL" in acc:
                acc["EL"].append(part.inertia)
        for w in wanted:
            vals = acc[w]
            if w == "CH" and any(math.isinf(v) for v in vals):
                notes[w].setdefault("infinite_at", []).append(k)
            sums[w][k] = float(np.mean(vals))

    out = {}
    for w in wanted:
        name = BASELINE_NAMES[w]
        direction = DIRECTIONS[name]
        if w == "EL":
            selected = elbow_select(sums[w]) if len(ks) >= 3 else ks[0]
        else:
            selected = best_k(sums[w], maximize=direction == "maximize")
        out[name] = BaselineValue(name, sums[w], selected, direction, notes[w])
    return out


def averaged_full_data_index(data, ks, index: str, repeats: int, seed: int, clusterer: Clusterer | None = None) -> BaselineValue:
    return next(iter(averaged_full_data_indices(data, ks, [index], repeats, seed, clusterer).values()))


def elbow_select(curve: Mapping[int, float]) -> int:
    """Candidate with the largest discrete second difference of the inertia curve."""
    ks = sorted(curve)
    if len(ks) < 3:
        raise ValueError("elbow selection needs at least 3 candidates")
    second = {ks[i]: curve[ks[i - 1]] - 2.0 * curve[ks[i]] + curve[ks[i + 1]] for i in range(1, len(ks) - 1)}
    return best_k(second, maximize=True)


def _log_w(inertia: float) -> float:
    return math.log(max(inertia, np.finfo(float).tiny))


def gap_statistic(data, ks: Iterable[int], n_refs: int = 10, seed: int = 0, clusterer: Clusterer | None = None) -> BaselineValue:
    """Gap statistic with uniform bounding-box references and the one-standard-error rule."""
    if n_refs < 2:
        raise ValueError("n_refs must be >= 2")
    clusterer = clusterer or KMeans()
    x = np.ascontiguousarray(getattr(data, "values", data), dtype=np.float64)
    ks = sorted(ks)
    lo, hi = x.min(axis=0), x.max(axis=0)
    refs = [_rng.stream(seed, _rng.GAP_REFERENCE, r + 1).uniform(lo, hi, size=x.shape) for r in range(n_refs)]

    gap, sk = {}, {}
    for k in ks:
        log_w = _log_w(clusterer(x, k, _rng.stream(seed, _rng.GAP_REFERENCE, 0, k)).inertia)
        ref_log = np.array([
            _log_w(clusterer(ref, k, _rng.stream(seed, _rng.GAP_REFERENCE, r + 1, k)).inertia)
            for r, ref in enumerate(refs)
        ])
        gap[k] = float(ref_log.mean() - log_w)
        sk[k] = float(ref_log.std() * math.sqrt(1.0 + 1.0 / n_refs))

    selected = None
    for a, b in zip(ks, ks[1:]):
        if gap[a] >= gap[b] - sk[b]:
            selected = a
            break
    fallback = selected is None
    if fallback:
        selected = best_k(gap)
    return BaselineValue("GAPs", gap, selected, "select", {"s_k": sk, "fallback_argmax": fallback})
