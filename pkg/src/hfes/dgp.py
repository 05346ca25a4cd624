"""Data-generating processes.

* the linear simultaneous system (outcome equation plus policy reaction),
* the separable nonparametric potential-outcome system,
* the policy-shock process with information leakage before announcements.

All primitive shocks are Gaussian. Shocks are drawn as standard normals and
then scaled, so two calls that share a seed share their random numbers even
when the variances differ.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Mapping

import numpy as np

from . import rng
from .errors import ScheduleTooShort, SingularSystem, ValidationError

# --------------------------------------------------------------------------
# linear simultaneous system


@dataclass(frozen=True)
class LinearSemParams:
    """Y = beta*D + Z'gamma1 + u,  D = alpha*Y + Z'gamma2 + e."""

    beta: float
    alpha: float
    gamma1: tuple[float, ...] = (0.0,)
    gamma2: tuple[float, ...] = (0.0,)
    sigma_u2: float = 1.0
    sigma_e2: float = 1.0
    sigma_z2: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "sigma_z2"):
            value = getattr(self, name)
            value = (float(value),) if np.isscalar(value) else tuple(float(v) for v in value)
            object.__setattr__(self, name, value)
        if not len(self.gamma1) == len(self.gamma2) == len(self.sigma_z2):
            raise ValidationError("gamma1, gamma2 and sigma_z2 must have the same length")
        if min(self.sigma_u2, self.sigma_e2, *self.sigma_z2) <= 0:
            raise ValidationError("all variances must be positive")
        if abs(1.0 - self.alpha * self.beta) < 1e-12:
            raise SingularSystem("1 - alpha*beta is zero; the system has no reduced form")

    def population_slope(self) -> float:
        """Cov(Y, D) / Var(D) implied by the reduced form."""
        g1 = np.asarray(self.gamma1)
        g2 = np.asarray(self.gamma2)
        sz = np.asarray(self.sigma_z2)
        var_a = float(np.sum(g1**2 * sz)) + self.sigma_u2  # A = Z'gamma1 + u
        var_b = float(np.sum(g2**2 * sz))  # B = Z'gamma2
        cov_ab = float(np.sum(g1 * g2 * sz))
        k = 1.0 - self.alpha * self.beta
        cov_a_d = (self.alpha * var_a + cov_ab) / k
        var_d = (self.alpha**2 * var_a + 2 * self.alpha * cov_ab + var_b + self.sigma_e2) / k**2
        return self.beta + cov_a_d / var_d


@dataclass(frozen=True)
class LinearSemDraws:
    y: np.ndarray
    d: np.ndarray
    z: np.ndarray  # (n, k)
    u: np.ndarray
    e: np.ndarray


def simulate_linear_sem(p: LinearSemParams, n: int, seed: int) -> LinearSemDraws:
    k = len(p.gamma1)
    g = rng.substream(seed, rng.SHOCKS)
    std = g.standard_normal((2 + k, n))
    u = math.sqrt(p.sigma_u2) * std[0]
    e = math.sqrt(p.sigma_e2) * std[1]
    z = (np.sqrt(np.asarray(p.sigma_z2))[:, None] * std[2:]).T
    zg1 = z @ np.asarray(p.gamma1)
    zg2 = z @ np.asarray(p.gamma2)
    d = (p.alpha * (zg1 + u) + zg2 + e) / (1.0 - p.alpha * p.beta)
    y = p.beta * d + zg1 + u
    return LinearSemDraws(y=y, d=d, z=z, u=u, e=e)


# --------------------------------------------------------------------------
# potential-outcome system


@dataclass(frozen=True)
class Linear:
    b: float

    def __call__(self, d):
        return self.b * np.asarray(d, dtype=float)

    def derivative(self, d):
        return np.full_like(np.asarray(d, dtype=float), self.b)

    def scaled(self, c: float) -> "Linear":
        return Linear(c * self.b)


@dataclass(frozen=True)
class Quadratic:
    b: float
    c: float

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return self.b * d + self.c * d * d

    def derivative(self, d):
        return self.b + 2.0 * self.c * np.asarray(d, dtype=float)

    def scaled(self, s: float) -> "Quadratic":
        return Quadratic(s * self.b, s * self.c)


@dataclass(frozen=True)
class Logistic:
    """a / (1 + exp(-k d))."""

    a: float
    k: float

    def _sig(self, d):
        return 0.5 * (1.0 + np.tanh(0.5 * self.k * np.asarray(d, dtype=float)))

    def __call__(self, d):
        return self.a * self._sig(d)

    def derivative(self, d):
        s = self._sig(d)
        return self.a * self.k * s * (1.0 - s)

    def scaled(self, c: float) -> "Logistic":
        return Logistic(c * self.a, self.k)


DoseResponse = Linear | Quadratic | Logistic
_FORMS = {"linear": Linear, "quadratic": Quadratic, "logistic": Logistic}


@dataclass(frozen=True)
class PotentialOutcomeSpec:
    """Separable potential-outcome system.

    Y(d) = phi_yd(d) + lambda_z*Z + lambda_u*u
    D    = e + kappa_z*Z + kappa_u*u,    e ~ N(0, sigma_e2)
    """

    phi_yd: DoseResponse
    lambda_z: float = 0.0
    lambda_u: float = 0.0
    kappa_z: float = 0.0
    kappa_u: float = 0.0
    sigma_e2: float = 1.0
    sigma_u2: float = 1.0
    sigma_z2: float = 1.0

    def __post_init__(self):
        if min(self.sigma_e2, self.sigma_u2, self.sigma_z2) <= 0:
            raise ValidationError("all variances must be positive")

    @property
    def exogenous(self) -> bool:
        return self.kappa_z == 0 and self.kappa_u == 0

    @property
    def sigma_d2(self) -> float:
        """Population Var(D)."""
        return self.sigma_e2 + self.kappa_z**2 * self.sigma_z2 + self.kappa_u**2 * self.sigma_u2

    def selection_bias_linear(self) -> float:
        """Population selection bias Cov(lambda'(Z,u), D) / Var(D)."""
        cov = self.lambda_z * self.kappa_z * self.sigma_z2 + self.lambda_u * self.kappa_u * self.sigma_u2
        return cov / self.sigma_d2

    def with_sigma_e2(self, sigma_e2: float) -> "PotentialOutcomeSpec":
        return replace(self, sigma_e2=float(sigma_e2))

    def scaled_outcome(self, c: float) -> "PotentialOutcomeSpec":
        """Same system with every potential outcome multiplied by ``c``."""
        return replace(
            self, phi_yd=self.phi_yd.scaled(c), lambda_z=c * self.lambda_z, lambda_u=c * self.lambda_u
        )

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "phi_yd"}
        form = type(self.phi_yd).__name__.lower()
        out["phi_yd"] = {"form": form, **asdict(self.phi_yd)}
        return out

    @classmethod
    def from_mapping(cls, data: Mapping) -> "PotentialOutcomeSpec":
        data = dict(data)
        try:
            phi = dict(data.pop("phi_yd"))
        except KeyError:
            raise ValidationError("spec needs a [phi_yd] table")
        form = str(phi.pop("form", "")).lower()
        if form not in _FORMS:
            raise ValidationError(f"phi_yd.form must be one of {sorted(_FORMS)}")
        try:
            dose = _FORMS[form](**{k: float(v) for k, v in phi.items()})
            return cls(phi_yd=dose, **{k: float(v) for k, v in data.items()})
        except TypeError as exc:
            raise ValidationError(f"bad spec fields: {exc}")


@dataclass(frozen=True)
class PotentialDraws:
    spec: PotentialOutcomeSpec
    z: np.ndarray
    u: np.ndarray
    e: np.ndarray
    d: np.ndarray
    y: np.ndarray

    def outcome(self, d) -> np.ndarray:
        """Potential outcome Y(d) of every draw at the policy value(s) ``d``."""
        s = self.spec
        return s.phi_yd(d) + s.lambda_z * self.z + s.lambda_u * self.u

    @property
    def baseline(self) -> np.ndarray:
        """The non-policy part lambda_z*Z + lambda_u*u of each draw."""
        return self.spec.lambda_z * self.z + self.spec.lambda_u * self.u


def simulate_potential_system(spec: PotentialOutcomeSpec, n: int, seed: int) -> PotentialDraws:
    std = rng.substream(seed, rng.SHOCKS).standard_normal((3, n))
    z = math.sqrt(spec.sigma_z2) * std[0]
    u = math.sqrt(spec.sigma_u2) * std[1]
    e = math.sqrt(spec.sigma_e2) * std[2]
    d = e + spec.kappa_z * z + spec.kappa_u * u
    y = spec.phi_yd(d) + spec.lambda_z * z + spec.lambda_u * u
    return PotentialDraws(spec=spec, z=z, u=u, e=e, d=d, y=y)


# --------------------------------------------------------------------------
# leakage


class LeakMode(str, Enum):
    NONE = "None"
    INVERSE = "Inverse"


@dataclass(frozen=True)
class LeakageParams:
    """Policy-shock schedule between two announcements.

    ``sigma_sched[i]`` is the shock scale of window i; the previous
    announcement sits just before window 0 and the next one at
    ``announcement_index`` (default: the last window).
    """

    sigma_sched: tuple[float, ...]
    leak_mode: LeakMode = LeakMode.NONE
    theta: tuple[float, ...] = (0.5,)
    announcement_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma_sched", tuple(float(s) for s in self.sigma_sched))
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        object.__setattr__(self, "leak_mode", LeakMode(self.leak_mode))
        if not self.theta:
            raise ValidationError("theta needs at least one coefficient (q >= 1)")
        if not all(math.isfinite(t) for t in self.theta):
            raise ValidationError("theta must be finite")
        if any(s <= 0 for s in self.sigma_sched):
            raise ValidationError("sigma_sched must be positive")
        if len(self.sigma_sched) <= self.q:
            raise ScheduleTooShort(
                f"schedule of length {len(self.sigma_sched)} must exceed q={self.q}"
            )
        idx = self.announcement_index
        if idx is None:
            object.__setattr__(self, "announcement_index", len(self.sigma_sched) - 1)
        elif not 0 <= idx < len(self.sigma_sched):
            raise ValidationError("announcement_index outside the schedule")

    @property
    def q(self) -> int:
        return len(self.theta)

    def phi(self) -> np.ndarray:
        """Leakage parameter per window."""
        sigma = np.asarray(self.sigma_sched)
        if self.leak_mode is LeakMode.NONE:
            return np.ones_like(sigma)
        phi = 1.0 / sigma
        # leakage cannot start in the q windows right after an announcement
        phi[: self.q] = 1.0
        a = self.announcement_index
        phi[a + 1 : a + 1 + self.q] = 1.0
        return phi


def simulate_leakage_paths(p: LeakageParams, n_paths: int, seed: int) -> np.ndarray:
    """``(n_paths, len(schedule))`` array of policy shocks e_t.

    Path i depends only on (seed, i), so a longer run extends a shorter one.
    """
    length, q = len(p.sigma_sched), p.q
    v = rng.standard_normal_rows(seed, rng.LEAKAGE, n_paths, length + q)
    sigma = np.asarray(p.sigma_sched)
    phi = p.phi()
    ma = np.zeros((n_paths, length))
    for j, th in enumerate(p.theta, start=1):
        ma += th * v[:, q - j : q - j + length]
    return phi * sigma * v[:, q:] + (1.0 - phi) * ma


def simulate_leakage_path(p: LeakageParams, seed: int) -> np.ndarray:
    return simulate_leakage_paths(p, 1, seed)[0]


def leakage_limit_variance(theta) -> float:
    """Announcement-window shock variance in the full-leakage limit."""
    return 1.0 + float(np.sum(np.square(theta)))


# --------------------------------------------------------------------------
# dumping simulated samples in the data-io schema


def simulated_dataset(
    y_policy,
    d_policy,
    y_control,
    d_control,
    start: dt.date = dt.date(2000, 1, 3),
    weeks_before=None,
):
    """Interleave simulated policy/control draws on a synthetic daily calendar.

    Policy rows get dates start, start+1, ...; control rows follow after the
    last policy date. Only date identity matters to the loader.
    """
    from .data_io import Dataset, Label

    n_p, n_c = len(d_policy), len(d_control)
    dates = [start + dt.timedelta(days=i) for i in range(n_p + n_c)]
    labels = [Label.POLICY] * n_p + [Label.CONTROL] * n_c
    wb = [None] * n_p + (list(weeks_before) if weeks_before is not None else [None] * n_c)
    return Dataset.from_arrays(
        dates,
        np.concatenate([np.asarray(y_policy, float), np.asarray(y_control, float)]),
        np.concatenate([np.asarray(d_policy, float), np.asarray(d_control, float)]),
        labels,
        wb,
    )
