"""Convergence and runtime-scaling experiments, plus table/chart output."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import _rng
from .cluster import Clusterer, KMeans
from .composite import WeightTransform, check_subsample_size, collect_trials, combine
from .data import DataMatrix, subsample_size
from .silhouette import silhouette_samples


@dataclass(frozen=True)
class ConvergenceRow:
    B: int
    rep: int
    abs_error: float


@dataclass(frozen=True)
class RuntimeRow:
    n: int
    method: str
    seconds: float


DEFAULT_B_GRID = tuple(range(10, 201, 10))


def convergence_study(data: DataMatrix, k: int, B_max: int = 200, B_grid: Sequence[int] = DEFAULT_B_GRID,
                      reps: int = 25, seed: int = 0, m: Optional[int] = None,
                      transform: WeightTransform = WeightTransform(), epsilon: float = 1e-10,
                      clusterer: Clusterer | None = None, workers: int = 1) -> list[ConvergenceRow]:
    """Error of the composite computed from ``B`` of ``B_max`` pooled trials.

    The pool of ``B_max`` clustered subsamples is computed once. Each cell
    draws ``B`` trial ids without replacement and recomputes the composite,
    including the subset's own normalizer, from the cached micro/macro scores.
    """
    B_grid = sorted(set(int(b) for b in B_grid))
    if not B_grid:
        raise ValueError("B grid is empty")
    if B_max < B_grid[-1]:
        raise ValueError(f"B_max={B_max} is below the largest grid value {B_grid[-1]}")
    if B_grid[0] < 2:
        raise ValueError("grid values must be >= 2")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    m = subsample_size(data.n_rows, k) if m is None else m
    check_subsample_size(m, k)
    pool = collect_trials(data, k, B_max, m, seed, clusterer, workers)
    reference = combine(k, pool, transform, epsilon).s_mm

    rows = []
    for B in B_grid:
        for rep in range(1, reps + 1):
            rng = _rng.stream(seed, _rng.CONVERGENCE, B, rep)
            # sorted ids keep the trial order, so B == B_max reproduces the pool exactly
            pick = np.sort(rng.choice(B_max, size=B, replace=False))
            est = combine(k, [pool[i] for i in pick], transform, epsilon).s_mm
            rows.append(ConvergenceRow(B, rep, abs(est - reference)))
    return rows


def convergence_summary(rows: Iterable[ConvergenceRow]) -> dict[int, dict[str, float]]:
    """Median and interquartile range of the error for each ``B``."""
    by_b: dict[int, list[float]] = {}
    for r in rows:
        by_b.setdefault(r.B, []).append(r.abs_error)
    out = {}
    for B in sorted(by_b):
        q1, med, q3 = np.percentile(by_b[B], [25, 50, 75])
        out[B] = {"median": float(med), "q1": float(q1), "q3": float(q3), "iqr": float(q3 - q1)}
    return out


def gaussian_blobs(n: int, k: int = 5, d: int = 10, seed: int = 0, spread: float = 10.0) -> DataMatrix:
    """Isotropic unit-variance blobs around ``k`` fixed random centers.

    The centers depend on ``(seed, k, d)`` only, so every ``n`` shares the
    same cluster structure.
    """
    centers = _rng.stream(seed, _rng.RUNTIME, 0, k, d).uniform(-spread, spread, size=(k, d))
    rng = _rng.stream(seed, _rng.RUNTIME, 1, n)
    labels = rng.integers(0, k, size=n)
    x = centers[labels] + rng.standard_normal((n, d))
    return DataMatrix(x, labels)


def _time_composite(data: DataMatrix, k: int, B: int, m: int, seed: int, clusterer) -> float:
    t0 = time.perf_counter()
    combine(k, collect_trials(data, k, B, m, seed, clusterer))
    return time.perf_counter() - t0


def _time_full(data: DataMatrix, k: int, seed: int, clusterer) -> float:
    t0 = time.perf_counter()
    x = data.values
    part = clusterer(x, k, _rng.stream(seed, _rng.FULL_DATA, k, 0))
    silhouette_samples(x, part)
    return time.perf_counter() - t0


def runtime_benchmark(n_grid: Sequence[int], k: int = 5, d: int = 10, B: int = 20,
                      subsample_cap: Optional[int] = 2000, seed: int = 0,
                      methods: Sequence[str] = ("composite", "full_silhouette"),
                      clusterer: Clusterer | None = None) -> list[RuntimeRow]:
    """Wall-clock time of one composite evaluation vs one full-data Silhouette.

    Both methods run single-threaded. Data generation is not timed, and one
    small warm-up run precedes the measurements.
    """
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise ValueError("n grid is empty")
    unknown = set(methods) - {"composite", "full_silhouette"}
    if unknown:
        raise ValueError(f"unknown method(s) {sorted(unknown)}")
    clusterer = clusterer or KMeans()

    def m_for(n):
        m = subsample_size(n, k)
        return m if subsample_cap is None else min(m, int(subsample_cap))

    warm = gaussian_blobs(max(4 * k, 200), k, d, seed)
    _time_composite(warm, k, 2, m_for(warm.n_rows), seed, clusterer)
    _time_full(warm, k, seed, clusterer)

    rows = []
    for n in n_grid:
        data = gaussian_blobs(n, k, d, seed)
        if "composite" in methods:
            rows.append(RuntimeRow(n, "composite", _time_composite(data, k, B, m_for(n), seed, clusterer)))
        if "full_silhouette" in methods:
            rows.append(RuntimeRow(n, "full_silhouette", _time_full(data, k, seed, clusterer)))
    return rows


# ---------------------------------------------------------------------------
# output

def format_number(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.9g" % float(v)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """CSV with ``\\n`` line endings and 9 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(v) for v in row])
    return path


def write_convergence_csv(rows: Sequence[ConvergenceRow], path) -> Path:
    return write_table(path, ("B", "rep", "abs_error"), ((r.B, r.rep, r.abs_error) for r in rows))


def write_runtime_csv(rows: Sequence[RuntimeRow], path) -> Path:
    return write_table(path, ("n", "method", "seconds"), ((r.n, r.method, r.seconds) for r in rows))


def svg_line_chart(series: Mapping[str, tuple[Sequence[float], Sequence[float]]], path, title: str = "",
                   xlabel: str = "", ylabel: str = "", log_x: bool = False, log_y: bool = False,
                   width: int = 640, height: int = 400) -> Path:
    """Write a bare-bones SVG line chart, one polyline per series."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    left, right, top, bottom = 70, 20, 40, 50

    def tf(v, log):
        v = np.asarray(v, dtype=float)
        return np.log10(np.maximum(v, 1e-300)) if log else v

    xs = np.concatenate([tf(x, log_x) for x, _ in series.values()])
    ys = np.concatenate([tf(y, log_y) for _, y in series.values()])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(v):
        return left + (v - x0) / (x1 - x0) * (width - left - right)

    def py(v):
        return height - bottom - (v - y0) / (y1 - y0) * (height - top - bottom)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle">{title}</text>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel}{" (log10)" if log_x else ""}</text>',
        f'<text x="15" y="{height / 2}" text-anchor="middle" transform="rotate(-90 15 {height / 2})">{ylabel}{" (log10)" if log_y else ""}</text>',
    ]
    for val, anchor in ((x0, "start"), (x1, "end")):
        parts.append(f'<text x="{px(val):.1f}" y="{height - bottom + 15}" text-anchor="{anchor}">{val:.3g}</text>')
    for val in (y0, y1):
        parts.append(f'<text x="{left - 5}" y="{py(val):.1f}" text-anchor="end">{val:.3g}</text>')
    for i, (name, (x, y)) in enumerate(series.items()):
        color = colors[i % len(colors)]
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(tf(x, log_x), tf(y, log_y)))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        parts.append(f'<text x="{width - right - 5}" y="{top + 15 * (i + 1)}" text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path
