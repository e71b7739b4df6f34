"""Observation matrices, CSV I/O, synthetic benchmarks and subsampling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _rng


class DataError(ValueError):
    """Raised for unreadable or malformed input data."""


@dataclass(frozen=True)
class DataMatrix:
    """Immutable ``N x d`` matrix of finite reals with optional labels."""

    values: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise DataError(f"expected a 2-D matrix, got shape {values.shape}")
        if values.shape[0] < 2:
            raise DataError(f"need at least 2 rows, got {values.shape[0]}")
        if values.shape[1] < 1:
            raise DataError("need at least 1 feature column")
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.array(self.labels, copy=True)
            if labels.shape != (values.shape[0],):
                raise DataError(
                    f"label count {labels.shape[0] if labels.ndim else 0} "
                    f"does not match row count {values.shape[0]}"
                )
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def take(self, indices) -> np.ndarray:
        """Rows ``indices`` as a contiguous array."""
        return np.ascontiguousarray(self.values[np.asarray(indices)])


def load_csv(path, has_header: bool = False, label_column: Optional[str] = None) -> DataMatrix:
    """Read a comma-separated numeric file.

    ``label_column`` names a header column to strip from the features and keep
    as ground-truth labels; it requires ``has_header``. Errors name the
    offending 1-based file row and column.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not valid UTF-8: {exc}") from exc

    header = None
    first_line = 1
    if has_header:
        if not rows:
            raise DataError(f"{path} is empty")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        first_line = 2

    label_idx = None
    if label_column is not None:
        if header is None:
            raise DataError("label_column requires a header row")
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not found in header {header}")
        label_idx = header.index(label_column)

    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(rows)}")

    width = len(header) if header is not None else len(rows[0])
    features, labels = [], []
    for i, row in enumerate(rows):
        line = first_line + i
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} cells, expected {width}")
        parsed = []
        for j, cell in enumerate(row):
            if j == label_idx:
                labels.append(cell.strip())
                continue
            try:
                value = float(cell)
            except ValueError:
                col = header[j] if header is not None else str(j + 1)
                raise DataError(
                    f"{path}: non-numeric cell {cell!r} at row {line}, column {col}"
                ) from None
            if not math.isfinite(value):
                col = header[j] if header is not None else str(j + 1)
                raise DataError(f"{path}: non-finite cell {cell!r} at row {line}, column {col}")
            parsed.append(value)
        features.append(parsed)

    label_arr = None
    if label_idx is not None:
        label_arr = np.array(labels)
        try:
            as_int = label_arr.astype(np.int64)
            if np.all(as_int.astype(str) == label_arr):
                label_arr = as_int
        except ValueError:
            pass
    return DataMatrix(np.array(features, dtype=np.float64), label_arr)


def write_csv(matrix: DataMatrix, path) -> None:
    """Write features (and a trailing ``label`` column when present) with a header."""
    path = Path(path)
    names = [f"x{j}" for j in range(matrix.n_cols)]
    if matrix.labels is not None:
        names.append("label")
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(matrix.n_rows):
            row = [repr(float(v)) for v in matrix.values[i]]
            if matrix.labels is not None:
                row.append(str(matrix.labels[i]))
            writer.writerow(row)


def standardize(matrix: DataMatrix) -> DataMatrix:
    """Center each column and scale it to unit population standard deviation.

    Constant columns become all zeros.
    """
    x = matrix.values
    mean = x.mean(axis=0)
    centered = x - mean
    sd = np.sqrt(np.mean(centered**2, axis=0))
    out = np.zeros_like(x)
    ok = sd > 0
    out[:, ok] = centered[:, ok] / sd[ok]
    return DataMatrix(out, matrix.labels)


# ---------------------------------------------------------------------------
# synthetic benchmarks

@dataclass(frozen=True)
class SyntheticSpec:
    spec_id: str
    seed: int = 0
    dimension: int = field(default=2, init=False)
    # multiplies every cluster size; 1.0 reproduces the benchmark sizes
    scale: float = 1.0


def _even_split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _place_tiers(sigmas: Sequence[float], factor: float = 5.0) -> np.ndarray:
    radius = int(math.ceil(2.0 * factor * max(sigmas) * math.sqrt(len(sigmas))))
    g = np.arange(-radius, radius + 1, dtype=np.float64)
    pts = np.array([(x, y) for x in g for y in g])
    order = np.lexsort((np.arctan2(pts[:, 1], pts[:, 0]), np.hypot(pts[:, 0], pts[:, 1])))
    pts = pts[order]
    centers, spreads = [], []
    for s in sigmas:
        for p in pts:
            if all(math.dist(p, c) >= factor * (s + sc) for c, sc in zip(centers, spreads)):
                centers.append(p)
                spreads.append(s)
                break
        else:  # pragma: no cover - the grid is sized to always fit
            raise RuntimeError("grid too small for tier layout")
    return np.array(centers)


_S4_SIZES = [1500, 1500, 300, 300, 80, 80, 80, 80, 80, 30, 30, 30]
_S4_SIGMAS = [2.2, 2.2, 1.2, 1.2, 0.9, 0.9, 0.9, 0.9, 0.9, 0.6, 0.6, 0.6]


def synthetic_layout(spec_id: str) -> tuple[list[int], list[float], np.ndarray]:
    """Cluster sizes, spreads and centers of a benchmark."""
    if spec_id == "S1":
        sizes = [2000] * 5
        sigmas = [0.5] * 5
        centers = np.array([(0.0, 0.0), (7.0, 0.0), (0.0, 7.0), (7.0, 7.0), (3.5, -6.5)])
    elif spec_id == "S2":
        sizes = _even_split(10_000, 6)
        sigmas = [0.9] * 6
        # four clusters on a square plus two outliers on either side
        side, reach = 5.4, 12.0
        mid = side / 2
        centers = np.array([
            (0.0, 0.0), (side, 0.0), (0.0, side), (side, side),
            (mid + reach, mid), (mid - reach, mid),
        ])
    elif spec_id == "S3":
        sizes = [1000, 1000, 100, 100, 100]
        sigmas = [1.8, 1.8, 0.5, 0.5, 0.5]
        centers = np.array([(-2.5, 0.0), (2.5, 0.0), (-12.0, 12.0), (0.0, 15.0), (12.0, 12.0)])
    elif spec_id == "S4":
        sizes = list(_S4_SIZES)
        sigmas = list(_S4_SIGMAS)
        centers = _place_tiers(sigmas)
    else:
        raise ValueError(f"unknown synthetic benchmark {spec_id!r}; expected one of S1, S2, S3, S4")
    return sizes, sigmas, centers


def generate_synthetic(spec: SyntheticSpec) -> DataMatrix:
    """Draw an isotropic 2-D Gaussian mixture benchmark (labels populated)."""
    sizes, sigmas, centers = synthetic_layout(spec.spec_id)
    if spec.scale != 1.0:
        sizes = [max(2, int(round(n * spec.scale))) for n in sizes]
    rng = _rng.stream(spec.seed, _rng.SYNTHETIC)
    blocks = [rng.normal(loc=c, scale=s, size=(n, 2)) for c, s, n in zip(centers, sigmas, sizes)]
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return DataMatrix(np.vstack(blocks), labels)


def parse_synthetic_id(text: str, seed: int = 0) -> SyntheticSpec:
    """``"S1"`` or a reduced variant such as ``"S1-small"`` (one fifth of the points)."""
    base, _, variant = text.partition("-")
    if variant not in ("", "small"):
        raise ValueError(f"unknown synthetic variant {text!r}")
    if base not in ("S1", "S2", "S3", "S4"):
        raise ValueError(f"unknown synthetic benchmark {text!r}; expected one of S1, S2, S3, S4")
    return SyntheticSpec(base, seed=seed, scale=0.2 if variant == "small" else 1.0)


# ---------------------------------------------------------------------------
# subsampling

@dataclass(frozen=True)
class SubsampleIndices:
    indices: np.ndarray
    trial_id: int

    def __len__(self):
        return len(self.indices)


def draw_subsample(n: int, m: int, rng: np.random.Generator, trial_id: int = 1) -> SubsampleIndices:
    """``m`` distinct row indices out of ``n``, uniformly without replacement (sorted)."""
    if m > n:
        raise ValueError(f"subsample size {m} exceeds dataset size {n}")
    if m < 2:
        raise ValueError(f"subsample size must be at least 2, got {m}")
    idx = np.sort(rng.choice(n, size=m, replace=False))
    return SubsampleIndices(idx, trial_id)


def subsample_size(n: int, k_max: int) -> int:
    """Automatic subsample size: a size-dependent fraction, floored at 30 points per cluster."""
    if n <= 2000:
        phi = 0.8
    elif n <= 20_000:
        phi = 0.6
    else:
        phi = 0.4
    return min(n, max(int(math.floor(phi * n)), 30 * k_max))
