"""Scalar statistics: moments, simple OLS with intercept, HC1/HAC variances, AR(1)."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BandwidthTooLarge,
    DegenerateRegressor,
    LengthMismatch,
    TooFewObservations,
    ValidationError,
)

CRITICAL_VALUE = 1.96


def _as_series(x, name: str = "series") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    return arr


def sample_moments(x) -> tuple[float, float]:
    """Mean and variance (divisor n-1)."""
    x = _as_series(x)
    if x.size < 2:
        raise TooFewObservations(2, x.size)
    mean = float(np.mean(x))
    var = float(np.sum((x - mean) ** 2) / (x.size - 1))
    return mean, var


@dataclass(frozen=True)
class OlsFit:
    intercept: float
    slope: float
    residuals: np.ndarray
    se_hc1: float
    n: int
    se_hac: float | None = None
    hac_bandwidth: int | None = None

    @property
    def se(self) -> float:
        """HAC standard error when one was requested, HC1 otherwise."""
        return self.se_hac if self.se_hac is not None else self.se_hc1

    def ci95(self, use_hac: bool | None = None) -> tuple[float, float]:
        se = self.se if use_hac is None else (self.se_hac if use_hac else self.se_hc1)
        return self.slope - CRITICAL_VALUE * se, self.slope + CRITICAL_VALUE * se


def _centered(x: np.ndarray) -> tuple[np.ndarray, float]:
    xc = x - np.mean(x)
    return xc, float(np.sum(xc * xc))


def ols(y, x, hac_bandwidth: int | None = None) -> OlsFit:
    """Regress ``y`` on ``x`` with an intercept.

    The HC1 standard error is always filled in; pass ``hac_bandwidth`` to
    also get a Bartlett-kernel HAC standard error.
    """
    y = _as_series(y, "y")
    x = _as_series(x, "x")
    if y.size != x.size:
        raise LengthMismatch(f"y has {y.size} observations, x has {x.size}")
    if x.size < 3:
        raise TooFewObservations(3, x.size, "regression")
    if np.ptp(x) == 0:
        raise DegenerateRegressor("regressor has zero variance")
    xc, sxx = _centered(x)
    ybar = float(np.mean(y))
    slope = float(np.sum(xc * (y - ybar)) / sxx)
    intercept = ybar - slope * float(np.mean(x))
    resid = y - intercept - slope * x
    fit = OlsFit(intercept, slope, resid, 0.0, int(x.size))
    fit = replace(fit, se_hc1=float(np.sqrt(hc1_variance(fit, x))))
    if hac_bandwidth is not None:
        fit = replace(
            fit,
            se_hac=float(np.sqrt(hac_variance(fit, x, hac_bandwidth))),
            hac_bandwidth=int(hac_bandwidth),
        )
    return fit


def hc1_variance(fit: OlsFit, x) -> float:
    """White variance of the slope with the n/(n-2) small-sample factor."""
    x = _as_series(x, "x")
    n = x.size
    xc, sxx = _centered(x)
    meat = float(np.sum(xc**2 * fit.residuals**2))
    return n / (n - 2) * meat / sxx**2


def hac_variance(fit: OlsFit, x, bandwidth: int) -> float:
    """Newey-West (Bartlett) variance of the slope; HC0 at ``bandwidth=0``."""
    x = _as_series(x, "x")
    n = x.size
    if bandwidth < 0:
        raise ValidationError("bandwidth must be non-negative")
    if bandwidth >= n:
        raise BandwidthTooLarge(f"bandwidth {bandwidth} must be below n={n}")
    xc, sxx = _centered(x)
    s = xc * fit.residuals
    lrv = float(np.sum(s * s))
    for j in range(1, bandwidth + 1):
        w = 1.0 - j / (bandwidth + 1.0)
        lrv += 2.0 * w * float(np.sum(s[j:] * s[:-j]))
    return lrv / sxx**2


@dataclass(frozen=True)
class Ar1Fit:
    rho: float
    se: float
    tstat: float
    significant_5pct: bool
    intercept: float = 0.0
    n: int = 0


def tstat(estimate: float, se: float) -> float:
    if se > 0:
        return estimate / se
    if estimate == 0:
        return 0.0
    return float(np.copysign(np.inf, estimate))


def ar1_fit(x) -> Ar1Fit:
    """OLS of x_t on x_{t-1} with intercept; HC1 two-sided 5% test."""
    x = _as_series(x)
    if x.size < 4:
        raise TooFewObservations(4, x.size, "AR(1) fit")
    fit = ols(x[1:], x[:-1])
    t = tstat(fit.slope, fit.se_hc1)
    return Ar1Fit(fit.slope, fit.se_hc1, t, bool(abs(t) > CRITICAL_VALUE), fit.intercept, fit.n)


# --------------------------------------------------------------------------
# row-wise helpers for Monte Carlo batches (one replication per row)


def batch_slopes(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """OLS-with-intercept slope of each row of ``y`` on the same row of ``x``."""
    xc = x - x.mean(axis=-1, keepdims=True)
    yc = y - y.mean(axis=-1, keepdims=True)
    return np.sum(xc * yc, axis=-1) / np.sum(xc * xc, axis=-1)


def batch_ols_hc1(y: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise slopes and HC1 standard errors."""
    n = x.shape[-1]
    xc = x - x.mean(axis=-1, keepdims=True)
    yc = y - y.mean(axis=-1, keepdims=True)
    sxx = np.sum(xc * xc, axis=-1)
    slope = np.sum(xc * yc, axis=-1) / sxx
    resid = yc - slope[..., None] * xc
    var = n / (n - 2) * np.sum(xc**2 * resid**2, axis=-1) / sxx**2
    return slope, np.sqrt(var)
