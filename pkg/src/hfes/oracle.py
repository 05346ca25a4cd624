"""Monte Carlo checks of the event-study estimand's identification results.

Everything here works on the normalized scale: with sigma the sample standard
deviation of the simulated policy draws,

    D~ = D / sigma,    Y~(d) = Y(sigma * d) / sigma,

so the marginal causal effect dY~(d)/dd equals phi_yd'(sigma * d) and the
regression estimand Cov(Y, D)/Var(D) equals mean(Y~ * (D~ - mean D~)).
The support [d_lo, d_hi] is the empirical range of D~. Sample moments use
divisor n so that the in-sample weights integrate to one exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dgp import PotentialDraws, PotentialOutcomeSpec, simulate_potential_system
from .errors import DegenerateDraws, ValidationError

DEFAULT_GRID = 401


class McEstimate(NamedTuple):
    value: float
    se: float


@dataclass(frozen=True)
class WeightCurve:
    grid: np.ndarray
    weights: np.ndarray
    se: np.ndarray
    integral: float

    def min_standardized(self) -> float:
        """Smallest w/se over grid points with positive MC error."""
        ok = self.se > 0
        return float(np.min(self.weights[ok] / self.se[ok])) if ok.any() else 0.0


@dataclass(frozen=True)
class DecompositionReport:
    sigma_e2: float
    beta_es: float
    wmce: float
    delta: float
    gap: float
    mc_se_gap: float


def trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    dx = np.diff(x)
    return float(np.sum(0.5 * dx * (y[1:] + y[:-1])))


def normalize(draws) -> tuple[np.ndarray, float]:
    """Scale draws to unit sample variance (divisor n); returns (D~, sigma)."""
    d = np.asarray(draws, dtype=float)
    if d.ndim != 1 or d.size < 2:
        raise ValidationError("need a one-dimensional array of at least two draws")
    sigma = float(np.std(d))
    if not sigma > 0:
        raise DegenerateDraws("draws have zero variance")
    return d / sigma, sigma


def _grid(d_tilde: np.ndarray, grid_size: int) -> np.ndarray:
    return np.linspace(float(d_tilde.min()), float(d_tilde.max()), grid_size)


def estimate_weights(d_draws, grid_size: int = DEFAULT_GRID) -> WeightCurve:
    """Sample analogue of E[1{d <= D~}(D~ - E D~)] on a grid over the draws' range.

    Draws are rescaled to unit sample variance first (a no-op for draws that
    are already normalized).
    """
    if grid_size < 50:
        raise ValidationError("grid_size must be at least 50")
    d, _ = normalize(d_draws)
    n = d.size
    s = np.sort(d)
    c = s - s.mean()
    # suffix sums: tail[k] = sum_{i >= k} c_i, with tail[n] = 0
    tail = np.concatenate([np.cumsum(c[::-1])[::-1], [0.0]])
    tail2 = np.concatenate([np.cumsum((c * c)[::-1])[::-1], [0.0]])
    grid = _grid(s, grid_size)
    idx = np.searchsorted(s, grid, side="left")
    w = tail[idx] / n
    second = tail2[idx] / n
    se = np.sqrt(np.maximum(second - w * w, 0.0) / n)
    return WeightCurve(grid=grid, weights=w, se=se, integral=trapezoid(w, grid))


def _draws(spec: PotentialOutcomeSpec, n_draws: int, seed: int) -> PotentialDraws:
    if n_draws < 2:
        raise ValidationError("n_draws must be at least 2")
    return simulate_potential_system(spec, n_draws, seed)


def _parts(draws: PotentialDraws, grid_size: int):
    spec = draws.spec
    d_tilde, sigma = normalize(draws.d)
    centered = d_tilde - d_tilde.mean()
    n = d_tilde.size
    curve = estimate_weights(d_tilde, grid_size)
    d_lo = float(d_tilde.min())

    beta_terms = draws.y / sigma * centered
    # Y~(d_lo) per draw
    base_terms = draws.outcome(sigma * d_lo) / sigma * centered
    mce = spec.phi_yd.derivative(sigma * curve.grid)
    wmce = trapezoid(mce * curve.weights, curve.grid)
    # per-draw integral of the MCE from d_lo to D~_i, used for the MC error only
    rise = (spec.phi_yd(sigma * d_tilde) - spec.phi_yd(sigma * d_lo)) / sigma
    wmce_terms = rise * centered

    def se(terms):
        return float(np.std(terms) / math.sqrt(n))

    return (
        McEstimate(float(np.mean(beta_terms)), se(beta_terms)),
        McEstimate(wmce, se(wmce_terms)),
        McEstimate(float(np.mean(base_terms)), se(base_terms)),
    )


def weighted_mce(
    spec: PotentialOutcomeSpec, n_draws: int, grid_size: int = DEFAULT_GRID, seed: int = 0
) -> McEstimate:
    """Trapezoid integral of the analytic MCE against the estimated weights."""
    return _parts(_draws(spec, n_draws, seed), grid_size)[1]


def selection_bias(spec: PotentialOutcomeSpec, n_draws: int, seed: int = 0) -> McEstimate:
    """MC estimate of E[Y~(d_lo)(D~ - E D~)] with d_lo the smallest normalized draw."""
    draws = _draws(spec, n_draws, seed)
    d_tilde, sigma = normalize(draws.d)
    centered = d_tilde - d_tilde.mean()
    terms = draws.outcome(sigma * float(d_tilde.min())) / sigma * centered
    return McEstimate(float(np.mean(terms)), float(np.std(terms) / math.sqrt(d_tilde.size)))


def decomposition_check(
    spec: PotentialOutcomeSpec, n_draws: int, grid_size: int = DEFAULT_GRID, seed: int = 0
) -> DecompositionReport:
    """Compare the regression estimand with weighted MCE plus selection bias.

    ``mc_se_gap`` combines the three component standard errors as if they
    were independent, which bounds the noise of the gap from above.
    """
    beta, wmce, delta = _parts(_draws(spec, n_draws, seed), grid_size)
    gap = beta.value - (wmce.value + delta.value)
    se_gap = math.sqrt(beta.se**2 + wmce.se**2 + delta.se**2)
    return DecompositionReport(spec.sigma_e2, beta.value, wmce.value, delta.value, gap, se_gap)


def exogeneity_sweep(
    spec: PotentialOutcomeSpec,
    sigma_e2_list: Sequence[float],
    n_draws: int,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID,
) -> list[DecompositionReport]:
    """One decomposition per policy-shock variance, all on the same base draws."""
    values = [float(v) for v in sigma_e2_list]
    if not values or any(v <= 0 for v in values):
        raise ValidationError("sigma_e2 values must be positive")
    if values != sorted(values):
        raise ValidationError("sigma_e2 values must be ascending")
    return [decomposition_check(spec.with_sigma_e2(v), n_draws, grid_size, seed) for v in values]


SWEEP_COLUMNS = ("sigma_e2", "beta_es", "delta", "wmce", "gap", "mc_se_gap")


def sweep_to_csv(rows: Sequence[DecompositionReport], header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([f"{getattr(row, name):.6g}" for name in SWEEP_COLUMNS])
    return buf.getvalue()
