"""Monte Carlo sensitivity analysis of the event-study estimator to endogeneity.

Calibrate a simulated regression Y~ = beta0 * D~ + u~ to the control and
policy samples, then compare the estimator under endogeneity of strength rho
(and policy variance inflated by a factor 1 + delta) against the
endogeneity-free "oracle" regression.

Random numbers: every replication r draws its policy path from substream
(seed, POLICY, r) and its error path from (seed, ERRORS, r). These streams
do not depend on rho or delta, so every cell of a report is evaluated on
the same underlying draws (common random numbers).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import rng
from .data_io import Criterion, Dataset, EndogeneityForm, RunConfig, _coerce
from .errors import EmptySample, NegativeDelta, NotBracketed, TooFewObservations, ValidationError
from .stats import ar1_fit, batch_slopes, sample_moments

BETA0 = 0.99
DELTA_MAX = 1024.0


@dataclass(frozen=True)
class Calibration:
    y_c_mean: float
    y_c_var: float
    y_c_rho1: float
    y_c_rho1_significant: bool
    d_c_mean: float
    d_c_var: float
    d_c_rho1: float
    d_c_rho1_significant: bool
    y_p_var: float
    d_p_var: float
    sigma_u_tilde2: float
    t_p: int
    beta0: float = BETA0

    def __post_init__(self):
        if self.t_p < 3:
            raise ValidationError("t_p must be at least 3")
        if min(self.d_c_var, self.d_p_var, self.y_p_var, self.sigma_u_tilde2) <= 0:
            raise ValidationError("calibration variances must be positive")
        lhs = self.sigma_u_tilde2 * self.d_p_var
        rhs = self.y_p_var * self.d_c_var
        if abs(lhs - rhs) > 1e-12 * abs(rhs):
            raise ValidationError("sigma_u_tilde2 inconsistent with the sample variances")
        for name in ("y_c_rho1", "d_c_rho1"):
            if getattr(self, name.replace("rho1", "rho1_significant")) and abs(getattr(self, name)) >= 1:
                raise ValidationError(f"{name} must lie inside (-1, 1) to simulate an AR(1)")

    @property
    def variance_ratio(self) -> float:
        return self.d_p_var / self.d_c_var

    @property
    def sigma_ratio(self) -> float:
        """sigma_u~ / sigma_D,C: the asymptotic bias per unit of rho at delta = 0."""
        return math.sqrt(self.sigma_u_tilde2 / self.d_c_var)

    @classmethod
    def synthetic(
        cls,
        t_p: int,
        variance_ratio: float,
        sigma_ratio: float,
        d_c_var: float = 1.0,
        d_c_mean: float = 0.0,
        beta0: float = BETA0,
        d_c_rho1: float = 0.0,
        y_c_rho1: float = 0.0,
    ) -> "Calibration":
        """Calibration from headline ratios instead of data.

        An AR coefficient counts as significant when it is non-zero.
        """
        d_p_var = variance_ratio * d_c_var
        sigma_u_tilde2 = sigma_ratio**2 * d_c_var
        return cls(
            y_c_mean=0.0,
            y_c_var=sigma_u_tilde2,
            y_c_rho1=y_c_rho1,
            y_c_rho1_significant=y_c_rho1 != 0,
            d_c_mean=d_c_mean,
            d_c_var=d_c_var,
            d_c_rho1=d_c_rho1,
            d_c_rho1_significant=d_c_rho1 != 0,
            y_p_var=sigma_u_tilde2 * d_p_var / d_c_var,
            d_p_var=d_p_var,
            sigma_u_tilde2=sigma_u_tilde2,
            t_p=t_p,
            beta0=beta0,
        )


def calibrate(ds: Dataset, beta0: float = BETA0) -> Calibration:
    """Moments of both samples; AR(1) fits and their significance on the control sample."""
    pol, ctl = ds.policy(), ds.control()
    for label, pair in (("Policy", pol), ("Control", ctl)):
        if len(pair) == 0:
            raise EmptySample(label)
        if len(pair) < 4:
            raise TooFewObservations(4, len(pair), f"{label} sample")
    y_c_mean, y_c_var = sample_moments(ctl.y)
    d_c_mean, d_c_var = sample_moments(ctl.d)
    y_ar, d_ar = ar1_fit(ctl.y), ar1_fit(ctl.d)
    _, y_p_var = sample_moments(pol.y)
    _, d_p_var = sample_moments(pol.d)
    return Calibration(
        y_c_mean=y_c_mean,
        y_c_var=y_c_var,
        y_c_rho1=y_ar.rho,
        y_c_rho1_significant=y_ar.significant_5pct,
        d_c_mean=d_c_mean,
        d_c_var=d_c_var,
        d_c_rho1=d_ar.rho,
        d_c_rho1_significant=d_ar.significant_5pct,
        y_p_var=y_p_var,
        d_p_var=d_p_var,
        sigma_u_tilde2=y_p_var * d_c_var / d_p_var,
        t_p=len(pol),
        beta0=beta0,
    )


# --------------------------------------------------------------------------
# simulation steps


@lru_cache(maxsize=4)
def _normals(seed: int, tag: int, rows: int, cols: int) -> np.ndarray:
    out = rng.standard_normal_rows(seed, tag, rows, cols)
    out.flags.writeable = False
    return out


def _ar1_paths(innov: np.ndarray, rho: float, drift: float) -> np.ndarray:
    """x_t = drift + rho * x_{t-1} + innov_t with x_0 = 0."""
    out = np.empty_like(innov)
    prev = np.zeros(innov.shape[0])
    for t in range(innov.shape[1]):
        prev = drift + rho * prev + innov[:, t]
        out[:, t] = prev
    return out


def draw_policy(c: Calibration, seed: int, replications: int | None = None) -> np.ndarray:
    """Simulated policy series of length t_p (one row per replication if requested).

    i.i.d. N(D_C mean, D_C var) unless the control AR(1) coefficient is
    significant, in which case an AR(1) with the same stationary variance
    started at zero.
    """
    rows = 1 if replications is None else replications
    z = _normals(seed, rng.POLICY, rows, c.t_p)
    sd = math.sqrt(c.d_c_var)
    if c.d_c_rho1_significant:
        r = c.d_c_rho1
        out = _ar1_paths(math.sqrt(1 - r * r) * sd * z, r, (1 - r) * c.d_c_mean)
    else:
        out = c.d_c_mean + sd * z
    return out[0] if replications is None else out


def _eta(c: Calibration, seed: int, rows: int) -> np.ndarray:
    z = _normals(seed, rng.ERRORS, rows, c.t_p)
    sd = math.sqrt(c.sigma_u_tilde2)
    if c.y_c_rho1_significant:
        r = c.y_c_rho1
        return _ar1_paths(math.sqrt(1 - r * r) * sd * z, r, 0.0)
    return sd * z


def draw_errors(
    c: Calibration,
    rho: float,
    form: EndogeneityForm | str,
    d_tilde: np.ndarray,
    seed: int,
) -> np.ndarray:
    """Regression errors correlated (Linear) or nonlinearly dependent (Quadratic) with ``d_tilde``.

    ``d_tilde`` is one series or a (replications, t_p) batch; row r uses the
    error substream of replication r.
    """
    form = _coerce(EndogeneityForm, form)
    if form is EndogeneityForm.LINEAR and abs(rho) > 1:
        raise ValidationError("rho must lie in [-1, 1]")
    if form is EndogeneityForm.QUADRATIC and abs(rho) >= 1:
        raise ValidationError("rho must lie in (-1, 1) for quadratic endogeneity")
    d = np.asarray(d_tilde, dtype=float)
    batch = np.atleast_2d(d)
    if batch.shape[1] != c.t_p:
        raise ValidationError(f"d_tilde rows must have length t_p={c.t_p}")
    eta = _eta(c, seed, batch.shape[0])
    dev = batch - c.d_c_mean
    if form is EndogeneityForm.QUADRATIC:
        dev = dev * dev
    u = rho * c.sigma_ratio * dev + math.sqrt(1 - rho * rho) * eta
    return u if d.ndim == 2 else u[0]


def scale_policy(d_tilde, delta: float, center: float) -> np.ndarray:
    """Inflate the variance about ``center`` by the factor 1 + delta."""
    if delta < 0:
        raise NegativeDelta(f"delta must be non-negative, got {delta}")
    d = np.asarray(d_tilde, dtype=float)
    return center + (d - center) * math.sqrt(1.0 + delta)


@dataclass(frozen=True)
class CellStats:
    rho: float
    delta: float
    bias: float
    mae: float
    mse: float
    replications: int
    bias_se: float = 0.0

    def criterion(self, which: Criterion | str) -> float:
        return self.mse if _coerce(Criterion, which) is Criterion.MSE else self.mae


def _summarize(rho: float, delta: float, err: np.ndarray) -> CellStats:
    n = err.size
    return CellStats(
        rho=float(rho),
        delta=float(delta),
        bias=float(np.mean(err)),
        mae=float(np.mean(np.abs(err))),
        mse=float(np.mean(err * err)),
        replications=n,
        bias_se=float(np.std(err, ddof=1) / math.sqrt(n)),
    )


def cell_estimates(
    c: Calibration,
    rho: float,
    delta: float,
    form: EndogeneityForm | str,
    replications: int,
    seed: int,
) -> np.ndarray:
    """OLS slope of every replication, in replication order."""
    if replications < 100:
        raise ValidationError("replications must be at least 100")
    d = draw_policy(c, seed, replications)
    u = draw_errors(c, rho, form, d, seed)
    d_delta = scale_policy(d, delta, c.d_c_mean)
    y = c.beta0 * d_delta + u
    return batch_slopes(y, d_delta)


def run_cell(
    c: Calibration,
    rho: float,
    delta: float,
    form: EndogeneityForm | str = EndogeneityForm.LINEAR,
    replications: int = 5000,
    seed: int = 0,
) -> CellStats:
    est = cell_estimates(c, rho, delta, form, replications, seed)
    return _summarize(rho, delta, est - c.beta0)


def run_oracle(c: Calibration, form=EndogeneityForm.LINEAR, replications: int = 5000, seed: int = 0):
    """The endogeneity-free benchmark: rho = 0, delta = 0."""
    return run_cell(c, 0.0, 0.0, form, replications, seed)


def asymptotic_bias(c: Calibration, rho: float, delta: float) -> float:
    """Large-t_p bias of the event-study slope under linear endogeneity."""
    return rho * c.sigma_ratio / math.sqrt(1.0 + delta)


# --------------------------------------------------------------------------
# threshold searches


def _geometric_grid(delta_max: float) -> list[float]:
    grid = [0.0, 1.0]
    while grid[-1] * 2 <= delta_max:
        grid.append(grid[-1] * 2)
    if grid[-1] < delta_max:
        grid.append(float(delta_max))
    return grid


def find_delta_star(
    c: Calibration,
    rho: float,
    form: EndogeneityForm | str = EndogeneityForm.LINEAR,
    criterion: Criterion | str = Criterion.MSE,
    replications: int = 5000,
    seed: int = 0,
    delta_max: float = DELTA_MAX,
    rel_tol: float = 0.01,
) -> float:
    """Smallest delta at which the endogenous cell is no worse than the oracle.

    Scans 0, 1, 2, 4, ... up to ``delta_max``, then bisects the first
    crossing until the bracket is narrower than ``rel_tol`` of its upper end.
    Returns the upper end, which is known to satisfy the criterion.
    """
    if rho == 0:
        return 0.0
    target = run_oracle(c, form, replications, seed).criterion(criterion)

    def ok(delta: float) -> bool:
        return run_cell(c, rho, delta, form, replications, seed).criterion(criterion) <= target

    prev = None
    for g in _geometric_grid(delta_max):
        if ok(g):
            if prev is None:
                return g
            lo, hi = prev, g
            break
        prev = g
    else:
        raise NotBracketed(
            f"criterion still above the oracle at delta_max={delta_max} for rho={rho}"
        )
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def find_rho_star(
    c: Calibration,
    form: EndogeneityForm | str = EndogeneityForm.LINEAR,
    criterion: Criterion | str = Criterion.MSE,
    replications: int = 5000,
    seed: int = 0,
    tol: float = 1e-4,
) -> float:
    """Largest rho in [0, 1] whose cell at the observed variance ratio matches the oracle.

    The policy variance is inflated to the observed policy-sample variance,
    i.e. delta = d_p_var / d_c_var - 1.
    """
    form = _coerce(EndogeneityForm, form)
    delta = c.variance_ratio - 1.0
    if delta < 0:
        raise NegativeDelta(
            f"policy variance below control variance (ratio {c.variance_ratio:.4g})"
        )
    target = run_oracle(c, form, replications, seed).criterion(criterion)

    def gap(rho: float) -> float:
        return run_cell(c, rho, delta, form, replications, seed).criterion(criterion) - target

    rho_hi = 1.0 if form is EndogeneityForm.LINEAR else 1.0 - 1e-9
    if gap(0.0) > 0:
        raise NotBracketed("even rho = 0 is worse than the oracle")
    if gap(rho_hi) <= 0:
        return rho_hi
    lo, hi = 0.0, rho_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


# --------------------------------------------------------------------------
# full report


@dataclass(frozen=True)
class SensitivityReport:
    oracle: CellStats
    cells: list[CellStats]
    delta_star: list[tuple[float, float | None]]
    sigma_d_star: list[tuple[float, float | None]]
    rho_star: float | None
    calibration: Calibration
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "calibration": asdict(self.calibration),
            "oracle": asdict(self.oracle),
            "cells": [asdict(cell) for cell in self.cells],
            "delta_star": [{"rho": r, "delta_star": d} for r, d in self.delta_star],
            "sigma_d_star": [{"rho": r, "sigma_d_star": s} for r, s in self.sigma_d_star],
            "rho_star": self.rho_star,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def cells_csv(self, header_lines: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "rho", "delta", "bias", "mae", "mse"])
        for name, cell in [("oracle", self.oracle)] + [("event_study", c) for c in self.cells]:
            w.writerow([name] + [f"{v:.6g}" for v in (cell.rho, cell.delta, cell.bias, cell.mae, cell.mse)])
        return buf.getvalue()

    def delta_star_csv(self, header_lines: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rho", "delta_star", "sigma_d_star"])
        for (rho, d), (_, s) in zip(self.delta_star, self.sigma_d_star):
            w.writerow([f"{rho:.6g}", "" if d is None else f"{d:.6g}", "" if s is None else f"{s:.6g}"])
        return buf.getvalue()


def sensitivity_report(c: Calibration, config: RunConfig) -> SensitivityReport:
    form, crit = config.endogeneity_form, config.criterion
    reps, seed = config.replications, config.seed
    oracle = run_oracle(c, form, reps, seed)
    cells = [
        run_cell(c, rho, delta, form, reps, seed)
        for rho in config.rho_grid
        for delta in config.delta_grid
    ]
    delta_star: list[tuple[float, float | None]] = []
    for rho in config.rho_grid:
        try:
            ds = find_delta_star(c, rho, form, crit, reps, seed, config.delta_max)
        except NotBracketed:
            ds = None
        delta_star.append((rho, ds))
    sigma_d_star = [(rho, None if d is None else c.d_c_var * (1 + d)) for rho, d in delta_star]
    rho_star = None
    if config.rho_star and c.variance_ratio >= 1:
        try:
            rho_star = find_rho_star(c, form, crit, reps, seed)
        except NotBracketed:
            rho_star = None
    cfg = {
        "seed": seed,
        "replications": reps,
        "rho_grid": list(config.rho_grid),
        "delta_grid": list(config.delta_grid),
        "criterion": crit.value,
        "endogeneity_form": form.value,
        "beta0": c.beta0,
        "delta_max": config.delta_max,
    }
    return SensitivityReport(oracle, cells, delta_star, sigma_d_star, rho_star, c, cfg)
