"""Relative-exogeneity and leakage diagnostics on observed samples."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data_io import Dataset
from .errors import NoLabeledRows, TooFewObservations, ValidationError
from .stats import CRITICAL_VALUE, ols, sample_moments, tstat

INF_RATIO = math.inf


def _floor_pow_45(t: int) -> int:
    """floor(t ** 0.8) in exact integer arithmetic."""
    n = int(t**0.8)
    while (n + 1) ** 5 <= t**4:
        n += 1
    while n**5 > t**4:
        n -= 1
    return n


@dataclass(frozen=True)
class WindowPlan:
    n_p: int
    m_p: int
    m_c: int
    n_c: int


def window_plan(t_p: int, t_c: int) -> WindowPlan:
    """Window length n_p = floor(t_p^(4/5)), the same number of windows in both samples."""
    if t_p < 2:
        raise TooFewObservations(2, t_p, "policy sample")
    if t_c < t_p:
        raise ValidationError(f"control sample ({t_c}) smaller than policy sample ({t_p})")
    n_p = _floor_pow_45(t_p)
    m_p = t_p // n_p
    return WindowPlan(n_p=n_p, m_p=m_p, m_c=m_p, n_c=t_c // m_p)


@dataclass(frozen=True)
class VarianceRatioRow:
    window_index: int | None  # None marks the full-sample row
    var_treatment: float
    var_control: float
    ratio: float
    mean_treatment: float = 0.0
    mean_control: float = 0.0
    n_treatment: int = 0
    n_control: int = 0


def _ratio(num: float, den: float, where: str) -> float:
    if den > 0:
        return num / den
    warnings.warn(f"zero control variance in {where}; ratio reported as inf", RuntimeWarning)
    return INF_RATIO


def _row(idx, treat: np.ndarray, ctl: np.ndarray) -> VarianceRatioRow:
    mt, vt = sample_moments(treat)
    mc, vc = sample_moments(ctl)
    where = "full sample" if idx is None else f"window {idx}"
    return VarianceRatioRow(idx, vt, vc, _ratio(vt, vc, where), mt, mc, treat.size, ctl.size)


def subsample_variances(ds: Dataset) -> list[VarianceRatioRow]:
    """Policy-variable variances over consecutive disjoint windows, plus the full sample.

    Windows cover the first m*n observations of each sample; the remainder
    only enters the full-sample row (last in the list).
    """
    d_p, d_c = ds.policy().d, ds.control().d
    plan = window_plan(d_p.size, d_c.size)
    if plan.n_p < 2 or plan.n_c < 2:
        raise TooFewObservations(2, min(plan.n_p, plan.n_c), "variance window")
    rows = []
    for k in range(plan.m_p):
        treat = d_p[k * plan.n_p : (k + 1) * plan.n_p]
        ctl = d_c[k * plan.n_c : (k + 1) * plan.n_c]
        rows.append(_row(k + 1, treat, ctl))
    rows.append(_row(None, d_p, d_c))
    return rows


def pooled_moments(rows: Sequence[VarianceRatioRow], which: str = "treatment") -> tuple[float, float]:
    """Recombine per-window means/variances into the moments of the windows' union."""
    n = np.array([getattr(r, f"n_{which}") for r in rows], dtype=float)
    m = np.array([getattr(r, f"mean_{which}") for r in rows])
    v = np.array([getattr(r, f"var_{which}") for r in rows])
    total = n.sum()
    mean = float(np.sum(n * m) / total)
    ss = float(np.sum((n - 1) * v) + np.sum(n * (m - mean) ** 2))
    return mean, ss / (total - 1)


def pre_announcement_variances(
    ds: Dataset, buckets: Sequence[int] = (1, 2, 3), min_rows: int = 4
) -> dict[int, float | None]:
    """Variance of d among control days 1, 2, 3 weeks before the next announcement.

    Buckets with fewer than ``min_rows`` rows map to None.
    """
    ctl = ds.control()
    labelled = [(wb, d) for wb, d in zip(ctl.weeks_before, ctl.d) if wb is not None]
    if not labelled:
        raise NoLabeledRows("no control rows carry weeks_before")
    out: dict[int, float | None] = {}
    for b in buckets:
        vals = np.array([d for wb, d in labelled if wb == b])
        out[b] = sample_moments(vals)[1] if vals.size >= min_rows else None
    return out


@dataclass(frozen=True)
class LadderRow:
    j: int  # reports rho_j, from the regression of D_{t-j+1} on D_{t-j}
    rho_hat: float
    se: float
    significant_5pct: bool
    n: int = 0


def ladder_pairs(pre_paths: np.ndarray, depth: int = 6) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Build the regression pairs from pre-announcement paths.

    ``pre_paths[a, k]`` is D at offset k before announcement a (column 0 is
    the announcement itself). Offset j pairs (D_{t-j}, D_{t-j-1}) pooled over
    announcements.
    """
    paths = np.asarray(pre_paths, dtype=float)
    if paths.ndim != 2 or paths.shape[1] < depth + 1:
        raise ValidationError(f"need a 2-D array with at least {depth + 1} offsets per announcement")
    return {j: (paths[:, j], paths[:, j + 1]) for j in range(depth)}


def ladder_from_dataset(ds: Dataset, depth: int = 6) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Ladder pairs from a dataset: each policy row and the ``depth`` rows before it.

    Rows of both labels are merged in date order; announcements with fewer
    than ``depth`` earlier rows are skipped.
    """
    obs = ds.observations
    d = np.array([o.d for o in obs])
    paths = [
        d[i - depth : i + 1][::-1]
        for i, o in enumerate(obs)
        if o.label.value == "Policy" and i >= depth
    ]
    if not paths:
        raise TooFewObservations(depth + 1, len(obs), "pre-announcement history")
    return ladder_pairs(np.array(paths), depth)


def autoregression_ladder(
    d_by_offset: Mapping[int, tuple[np.ndarray, np.ndarray]], min_obs: int = 8
) -> list[LadderRow]:
    """Pooled OLS of D_{t-j} on D_{t-j-1} for each offset j; rows carry rho_{j+1}."""
    rows = []
    for j in sorted(d_by_offset):
        lhs, rhs = (np.asarray(a, dtype=float) for a in d_by_offset[j])
        if lhs.size < min_obs:
            warnings.warn(f"offset {j}: {lhs.size} observations < {min_obs}; row omitted", RuntimeWarning)
            continue
        fit = ols(lhs, rhs)
        t = tstat(fit.slope, fit.se_hc1)
        rows.append(LadderRow(j + 1, fit.slope, fit.se_hc1, bool(abs(t) > CRITICAL_VALUE), fit.n))
    return rows


@dataclass(frozen=True)
class VarianceComparisonRow:
    name: str
    variance: float
    ratio: float


def variance_comparison(series: Mapping[str, Sequence[float]]) -> list[VarianceComparisonRow]:
    """Sample variances (divisor n-1) and their ratio to the first-named series."""
    items = list(series.items())
    if not items:
        raise ValidationError("no series given")
    rows = []
    base = None
    for name, values in items:
        values = np.asarray(values, dtype=float)
        if values.size < 2:
            raise TooFewObservations(2, values.size, f"series {name!r}")
        var = sample_moments(values)[1]
        if base is None:
            base = var
        rows.append(VarianceComparisonRow(name, var, _ratio(var, base, f"series {name!r}")))
    return rows


# --------------------------------------------------------------------------
# CSV renderers


def _csv(header, rows, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(x) -> str:
    return "" if x is None else f"{x:.6g}"


def panel_a_csv(rows: Sequence[VarianceRatioRow], header_lines=()) -> str:
    body = [
        ["full" if r.window_index is None else r.window_index, _g(r.var_treatment), _g(r.var_control), _g(r.ratio)]
        for r in rows
    ]
    return _csv(["window", "var_treatment", "var_control", "ratio"], body, header_lines)


def panel_b_csv(variances: Mapping[int, float | None], header_lines=()) -> str:
    body = [[k, _g(v)] for k, v in sorted(variances.items())]
    return _csv(["weeks_before", "variance"], body, header_lines)


def panel_c_csv(rows: Sequence[LadderRow], header_lines=()) -> str:
    body = [[r.j, _g(r.rho_hat), _g(r.se), int(r.significant_5pct), r.n] for r in rows]
    return _csv(["j", "rho_hat", "se", "significant_5pct", "n"], body, header_lines)


def variance_table_csv(rows: Sequence[VarianceComparisonRow], header_lines=()) -> str:
    body = [[r.name, _g(r.variance), _g(r.ratio)] for r in rows]
    return _csv(["series", "variance", "ratio_to_first"], body, header_lines)
