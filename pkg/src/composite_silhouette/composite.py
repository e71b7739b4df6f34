"""Composite Silhouette for a fixed number of clusters.

Each trial clusters a random subsample and records its micro- and
macro-averaged Silhouette. The per-trial discrepancy ``delta = micro - macro``
is normalized by the largest absolute discrepancy among the trials, mapped to
``z`` in ``(-1, 1)`` (``tanh`` by default), and turned into the convex weight
``w = (1 + z) / 2`` on the micro score. The score for ``k`` is the mean of the
per-trial combinations ``w * micro + (1 - w) * macro``.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _rng
from .cluster import Clusterer, KMeans
from .data import DataMatrix, draw_subsample, subsample_size
from .silhouette import macro_silhouette, micro_silhouette, silhouette_samples

TRANSFORMS = ("tanh", "linear", "sigmoid", "step")
NORMALIZATION_MODES = ("pooled", "split")


@dataclass(frozen=True)
class WeightTransform:
    """Map from normalized discrepancy to the weight on the micro score."""

    kind: str = "tanh"
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.kind!r}; expected one of {TRANSFORMS}")
        if self.kind == "sigmoid" and not self.alpha > 0:
            raise ValueError("sigmoid alpha must be positive")

    @classmethod
    def parse(cls, text: str, alpha: float = 1.0) -> "WeightTransform":
        """``"tanh"``, ``"linear"``, ``"step"``, ``"sigmoid"`` or ``"sigmoid(2.5)"``."""
        match = re.fullmatch(r"\s*sigmoid\s*\(\s*([^)]+)\)\s*", text)
        if match:
            return cls("sigmoid", float(match.group(1)))
        return cls(text.strip(), alpha)

    @property
    def name(self) -> str:
        if self.kind == "sigmoid":
            return f"sigmoid({self.alpha:g})"
        return self.kind


def weight_from_discrepancy(delta_norm, transform: WeightTransform = WeightTransform()):
    """Return ``(z, w)`` for a normalized discrepancy (scalar or array).

    ``w`` is always ``(1 + z) / 2``; for the sigmoid ``z`` is back-derived from
    ``w = 1 / (1 + exp(-alpha * delta_norm))``.
    """
    dn = np.asarray(delta_norm, dtype=np.float64)
    if transform.kind == "tanh":
        z = np.tanh(dn)
    elif transform.kind == "linear":
        # only bites in split mode, where |delta_norm| may exceed 1
        z = np.clip(dn, -1.0, 1.0)
    elif transform.kind == "sigmoid":
        # 2 * sigmoid(a x) - 1 == tanh(a x / 2), exact symmetry w(-x) = 1 - w(x)
        z = np.tanh(0.5 * transform.alpha * dn)
    else:
        z = np.sign(dn)
    w = 0.5 * (1.0 + z)
    if np.ndim(delta_norm) == 0:
        return float(z), float(w)
    return z, w


@dataclass(frozen=True)
class SubsampleTrial:
    trial_id: int
    indices: Optional[np.ndarray]
    s_micro: float
    s_macro: float
    delta: float
    delta_norm: float
    z: float
    weight: float
    composite: float


@dataclass(frozen=True)
class RawTrial:
    """Clustering outcome of one subsample, before any weighting."""

    trial_id: int
    indices: Optional[np.ndarray]
    s_micro: float
    s_macro: float


@dataclass(frozen=True)
class CompositeResult:
    k: int
    trials: tuple
    s_mm: float
    mean_micro: float
    mean_macro: float
    std_composite: float
    delta_max: float
    transform: WeightTransform = WeightTransform()
    epsilon: float = 1e-10
    normalization_mode: str = "pooled"
    # split mode only: trials that set delta_max but are not scored
    calibration: tuple = ()

    @property
    def B(self) -> int:
        return len(self.trials)

    @property
    def stderr(self) -> float:
        return self.std_composite / math.sqrt(self.B)


@dataclass(frozen=True)
class CompositeConfig:
    B: int = 25
    # subsample size; None picks subsample_size(n, k)
    m: Optional[int] = None
    transform: WeightTransform = WeightTransform()
    epsilon: float = 1e-10
    normalization_mode: str = "pooled"
    clusterer: Clusterer = field(default_factory=KMeans)
    workers: int = 1

    def __post_init__(self):
        if self.B < 2:
            raise ValueError(f"B must be at least 2, got {self.B}")
        if self.normalization_mode not in NORMALIZATION_MODES:
            raise ValueError(f"normalization_mode must be one of {NORMALIZATION_MODES}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


def score_trials(raw: Sequence[RawTrial], delta_max: float, transform: WeightTransform, epsilon: float) -> list[SubsampleTrial]:
    """Weight and combine trials against a given normalizer."""
    micro = np.array([t.s_micro for t in raw])
    macro = np.array([t.s_macro for t in raw])
    delta = micro - macro
    delta_norm = delta / (delta_max + epsilon)
    z, w = weight_from_discrepancy(delta_norm, transform)
    composite = w * micro + (1.0 - w) * macro
    return [
        SubsampleTrial(t.trial_id, t.indices, float(micro[i]), float(macro[i]), float(delta[i]),
                       float(delta_norm[i]), float(z[i]), float(w[i]), float(composite[i]))
        for i, t in enumerate(raw)
    ]


def combine(k: int, raw: Sequence[RawTrial], transform: WeightTransform = WeightTransform(),
            epsilon: float = 1e-10, normalization_mode: str = "pooled") -> CompositeResult:
    """Aggregate raw trials into the composite score.

    ``pooled`` normalizes by the largest discrepancy among all trials. ``split``
    takes the normalizer from the first half of the trials and scores only the
    second half, so the scored terms are independent given the normalizer.
    """
    raw = list(raw)
    if normalization_mode == "pooled":
        calib, scored = [], raw
    elif normalization_mode == "split":
        half = len(raw) // 2
        calib, scored = raw[:half], raw[half:]
    else:
        raise ValueError(f"unknown normalization mode {normalization_mode!r}")
    if len(scored) < 1 or (normalization_mode == "split" and not calib):
        raise ValueError(f"not enough trials ({len(raw)}) for {normalization_mode} normalization")

    source = calib if calib else scored
    delta_max = float(max(abs(t.s_micro - t.s_macro) for t in source))
    trials = score_trials(scored, delta_max, transform, epsilon)
    calibration = tuple(score_trials(calib, delta_max, transform, epsilon)) if calib else ()

    comp = np.array([t.composite for t in trials])
    micro = np.array([t.s_micro for t in trials])
    macro = np.array([t.s_macro for t in trials])
    return CompositeResult(
        k=k,
        trials=tuple(trials),
        s_mm=float(comp.mean()),
        mean_micro=float(micro.mean()),
        mean_macro=float(macro.mean()),
        std_composite=float(comp.std(ddof=1)) if len(comp) > 1 else 0.0,
        delta_max=delta_max,
        transform=transform,
        epsilon=epsilon,
        normalization_mode=normalization_mode,
        calibration=calibration,
    )


def evaluate_trial(x: np.ndarray, k: int, m: int, seed: int, b: int, clusterer: Clusterer | None = None) -> RawTrial:
    """Cluster subsample ``b`` and score it.

    The subsample depends on ``(seed, b)`` only, so every candidate ``k`` sees
    the same subsamples; the clustering stream depends on ``(seed, k, b)``.
    """
    clusterer = clusterer or KMeans()
    sub = draw_subsample(x.shape[0], m, _rng.stream(seed, _rng.SUBSAMPLE, b), trial_id=b)
    xs = x[sub.indices]
    part = clusterer(xs, k, _rng.stream(seed, _rng.KMEANS, k, b))
    s = silhouette_samples(xs, part)
    return RawTrial(b, sub.indices, micro_silhouette(s), macro_silhouette(s, part))


def collect_trials(data, k: int, B: int, m: int, seed: int, clusterer: Clusterer | None = None,
                   workers: int = 1, first_trial: int = 1) -> list[RawTrial]:
    """Run trials ``first_trial .. first_trial + B - 1`` (in trial order)."""
    x = np.ascontiguousarray(getattr(data, "values", data), dtype=np.float64)
    ids = range(first_trial, first_trial + B)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda b: evaluate_trial(x, k, m, seed, b, clusterer), ids))
    return [evaluate_trial(x, k, m, seed, b, clusterer) for b in ids]


def check_subsample_size(m: int, k: int) -> None:
    if m < max(2 * k, 4):
        raise ValueError(f"subsample size {m} too small for k={k}; need at least {max(2 * k, 4)}")


def run_trials(data: DataMatrix, k: int, cfg: CompositeConfig = CompositeConfig(), seed: int = 0) -> CompositeResult:
    """Composite Silhouette of ``k`` over ``cfg.B`` subsampled clusterings."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    n = data.n_rows if isinstance(data, DataMatrix) else len(data)
    m = cfg.m if cfg.m is not None else subsample_size(n, k)
    check_subsample_size(m, k)
    raw = collect_trials(data, k, cfg.B, m, seed, cfg.clusterer, cfg.workers)
    return combine(k, raw, cfg.transform, cfg.epsilon, cfg.normalization_mode)


def decompose(trial: SubsampleTrial) -> tuple[float, float]:
    """Split a trial's composite into the micro/macro midpoint and the discrepancy correction."""
    midpoint = 0.5 * (trial.s_micro + trial.s_macro)
    correction = 0.5 * trial.delta * trial.z
    return midpoint, correction
