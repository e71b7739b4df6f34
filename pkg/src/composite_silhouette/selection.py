"""Candidate sweeps, selection rules and concentration bounds."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from . import baselines as _baselines
from .baselines import BaselineValue, best_k
from .composite import CompositeConfig, CompositeResult, RawTrial, WeightTransform, check_subsample_size, collect_trials, combine
from .data import DataMatrix, subsample_size


def candidate_set(ks: Iterable[int]) -> tuple[int, ...]:
    """Sorted, de-duplicated candidate counts, each at least 2."""
    out = tuple(sorted(set(int(k) for k in ks)))
    if not out:
        raise ValueError("candidate set is empty")
    if out[0] < 2:
        raise ValueError(f"candidate cluster counts must be >= 2, got {out[0]}")
    return out


def centered_candidates(k_ref: int, radius: int = 5) -> tuple[int, ...]:
    """``{max(2, k_ref - radius), ..., k_ref + radius}``."""
    return candidate_set(range(max(2, k_ref - radius), k_ref + radius + 1))


def parse_candidates(text: str) -> tuple[int, ...]:
    """``"2..10"`` (inclusive range) or ``"2,3,5"``."""
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return candidate_set(range(lo, hi + 1))
    try:
        return candidate_set(int(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ValueError(f"bad candidate list {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# selection rules

def _score_and_stderr(v):
    if isinstance(v, CompositeResult):
        return v.s_mm, v.stderr
    if isinstance(v, tuple):
        return float(v[0]), float(v[1])
    return float(v), 0.0


def select_k(per_k: Mapping[int, object], rule: str = "argmax", c: float = 1.0) -> int:
    """Pick a candidate by ``argmax`` of the score or by its lower confidence bound.

    Values may be :class:`CompositeResult`, a bare score, or a
    ``(score, standard_error)`` pair. ``lcb`` maximizes ``score - c * stderr``
    with ``stderr = std_composite / sqrt(B)``. Ties go to the smallest ``k``.
    """
    if not per_k:
        raise ValueError("no candidates to select from")
    pairs = {k: _score_and_stderr(v) for k, v in per_k.items()}
    if rule == "argmax":
        return best_k({k: s for k, (s, _) in pairs.items()})
    if rule == "lcb":
        return best_k({k: s - c * se for k, (s, se) in pairs.items()})
    raise ValueError(f"unknown rule {rule!r}; expected 'argmax' or 'lcb'")


# ---------------------------------------------------------------------------
# concentration bounds

def hoeffding_halfwidth(B: int, delta: float, n_candidates: Optional[int] = None) -> float:
    """Halfwidth of the ``1 - delta`` Hoeffding interval for a mean of ``B`` terms in ``[-1, 1]``.

    With ``n_candidates`` the union bound over the candidate set is applied.
    """
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    count = 1 if n_candidates is None else int(n_candidates)
    if count < 1:
        raise ValueError("n_candidates must be >= 1")
    return math.sqrt(2.0 * math.log(2.0 * count / delta) / B)


def min_subsamples_for_margin(gamma: float, delta: float, n_candidates: int) -> int:
    """Smallest ``B`` with ``B >= 8 / gamma**2 * ln(2 |K| / delta)``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    bound = 8.0 / gamma**2 * math.log(2.0 * n_candidates / delta)
    return max(1, math.ceil(bound))


# ---------------------------------------------------------------------------
# sweep

@dataclass(frozen=True)
class SelectionReport:
    per_k: dict
    selected: dict
    rule_params: dict = field(default_factory=dict)
    baselines: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    m: int = 0

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(sorted(self.per_k))


def resolve_subsample_size(n: int, ks: Sequence[int], m: Optional[int] = None) -> int:
    k_max = max(ks)
    m = subsample_size(n, k_max) if m is None else int(m)
    if m > n:
        raise ValueError(f"subsample size {m} exceeds dataset size {n}")
    for k in ks:
        if m < 2 * k:
            raise ValueError(f"subsample size {m} too small for candidate k={k} (needs >= {2 * k})")
    check_subsample_size(m, k_max)
    return m


def collect_sweep(data: DataMatrix, ks: Sequence[int], cfg: CompositeConfig, seed: int) -> tuple[int, dict[int, list[RawTrial]]]:
    """Raw trials for every candidate with a shared subsample size."""
    ks = candidate_set(ks)
    m = resolve_subsample_size(data.n_rows, ks, cfg.m)
    raw = {k: collect_trials(data, k, cfg.B, m, seed, cfg.clusterer, cfg.workers) for k in ks}
    return m, raw


def build_report(raw: Mapping[int, Sequence[RawTrial]], cfg: CompositeConfig, m: int, lcb_c: float = 1.0,
                 baseline_values: Optional[Mapping[str, BaselineValue]] = None, bound_delta: float = 0.05) -> SelectionReport:
    ks = sorted(raw)
    per_k = {k: combine(k, raw[k], cfg.transform, cfg.epsilon, cfg.normalization_mode) for k in ks}
    selected = {
        "argmax": select_k(per_k, "argmax"),
        "lcb": select_k(per_k, "lcb", lcb_c),
        "mean_sub_micro": best_k({k: r.mean_micro for k, r in per_k.items()}),
        "mean_sub_macro": best_k({k: r.mean_macro for k, r in per_k.items()}),
    }
    baseline_values = dict(baseline_values or {})
    for name, value in baseline_values.items():
        selected[name] = value.selected
    n_scored = per_k[ks[0]].B
    bounds = {
        "delta": bound_delta,
        "fixed_k_halfwidth": hoeffding_halfwidth(n_scored, bound_delta),
        "uniform_halfwidth": hoeffding_halfwidth(n_scored, bound_delta, len(ks)),
    }
    return SelectionReport(per_k, selected, {"lcb_c": lcb_c}, baseline_values, bounds, m)


def compute_baselines(data: DataMatrix, ks: Sequence[int], names: Iterable[str], repeats: int, seed: int,
                      clusterer=None, gap_refs: int = 10) -> dict[str, BaselineValue]:
    names = list(dict.fromkeys(names))
    unknown = [n for n in names if n not in _baselines.BASELINE_NAMES]
    if unknown:
        raise ValueError(f"unknown baseline(s) {unknown}; expected {sorted(_baselines.BASELINE_NAMES)}")
    out = {}
    full = [n for n in names if n != "gap"]
    if full:
        out.update(_baselines.averaged_full_data_indices(data, ks, full, repeats, seed, clusterer))
    if "gap" in names:
        out["GAPs"] = _baselines.gap_statistic(data, ks, gap_refs, seed, clusterer)
    return out


def sweep(data: DataMatrix, ks: Iterable[int], cfg: CompositeConfig = CompositeConfig(), seed: int = 0,
          lcb_c: float = 1.0, baselines: Iterable[str] = (), baseline_repeats: Optional[int] = None) -> SelectionReport:
    """Evaluate every candidate and apply all selection rules.

    ``baselines`` takes short names (``micro``, ``macro``, ``CH``, ``DB``,
    ``EL``, ``gap``); full-data averages use ``cfg.B`` runs unless
    ``baseline_repeats`` is given.
    """
    ks = candidate_set(ks)
    m, raw = collect_sweep(data, ks, cfg, seed)
    base = compute_baselines(data, ks, baselines, baseline_repeats or cfg.B, seed, cfg.clusterer)
    return build_report(raw, cfg, m, lcb_c, base)


def sweep_transforms(data: DataMatrix, ks: Iterable[int], transforms: Sequence[WeightTransform],
                     cfg: CompositeConfig = CompositeConfig(), seed: int = 0, lcb_c: float = 1.0) -> dict[str, SelectionReport]:
    """One report per transform, all built from the same clustered subsamples."""
    ks = candidate_set(ks)
    m, raw = collect_sweep(data, ks, cfg, seed)
    return {t.name: build_report(raw, replace(cfg, transform=t), m, lcb_c) for t in transforms}


# ---------------------------------------------------------------------------
# serialization

def report_to_dict(report: SelectionReport, config: Optional[dict] = None) -> dict:
    """JSON-ready trace of a sweep: every trial's scores, weights and composite."""
    per_k = []
    for k in report.ks:
        r = report.per_k[k]
        per_k.append({
            "k": k,
            "s_mm": r.s_mm,
            "mean_micro": r.mean_micro,
            "mean_macro": r.mean_macro,
            "std": r.std_composite,
            "delta_max": r.delta_max,
            "trials": [
                {"b": t.trial_id, "s_micro": t.s_micro, "s_macro": t.s_macro, "delta": t.delta,
                 "weight": t.weight, "composite": t.composite}
                for t in r.trials
            ],
        })
    doc = {"config": dict(config or {}), "per_k": per_k, "selected": dict(report.selected)}
    doc["config"].setdefault("m", report.m)
    doc["config"].setdefault("lcb_c", report.rule_params.get("lcb_c", 1.0))
    if report.baselines:
        doc["baselines"] = {
            name: {"per_k": {str(k): v for k, v in b.per_k.items()}, "selected": b.selected, "direction": b.direction}
            for name, b in report.baselines.items()
        }
    if report.bounds:
        doc["bounds"] = dict(report.bounds)
    return doc


def reselect(doc: Mapping) -> dict[str, int]:
    """Recompute the composite-based selections from a serialized report."""
    per_k = {}
    for entry in doc["per_k"]:
        B = len(entry["trials"])
        per_k[int(entry["k"])] = (entry["s_mm"], entry["std"] / math.sqrt(B))
    c = float(doc.get("config", {}).get("lcb_c", 1.0))
    return {
        "argmax": select_k(per_k, "argmax"),
        "lcb": select_k(per_k, "lcb", c),
        "mean_sub_micro": best_k({int(e["k"]): e["mean_micro"] for e in doc["per_k"]}),
        "mean_sub_macro": best_k({int(e["k"]): e["mean_macro"] for e in doc["per_k"]}),
    }
