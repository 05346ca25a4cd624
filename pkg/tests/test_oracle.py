import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfes.dgp import Linear, Logistic, PotentialOutcomeSpec, Quadratic
from hfes.errors import DegenerateDraws, ValidationError
from hfes.oracle import (
    SWEEP_COLUMNS,
    decomposition_check,
    estimate_weights,
    exogeneity_sweep,
    normalize,
    selection_bias,
    sweep_to_csv,
    trapezoid,
    weighted_mce,
)

N = 10**6
ENDOG = dict(lambda_z=0.5, lambda_u=1.0, kappa_z=0.5, kappa_u=1.0)


def test_two_point_weights():
    d = np.array([-1.0, 1.0] * 500)
    curve = estimate_weights(d)
    inner = (curve.grid > -1) & (curve.grid <= 1)
    assert np.allclose(curve.weights[inner], 0.5)
    assert curve.weights[0] == pytest.approx(0.0, abs=1e-12)
    assert curve.integral == pytest.approx(1.0, abs=0.01)


def test_normal_weights_match_density(rng):
    curve = estimate_weights(rng.standard_normal(N))
    w0 = np.interp(0.0, curve.grid, curve.weights)
    assert w0 == pytest.approx(1 / math.sqrt(2 * math.pi), abs=0.005)
    # closed form E[D; D >= d] = pdf(d) across the bulk of the range
    bulk = np.abs(curve.grid) < 3
    pdf = np.exp(-0.5 * curve.grid[bulk] ** 2) / math.sqrt(2 * math.pi)
    assert np.max(np.abs(curve.weights[bulk] - pdf)) < 0.005


def test_weight_validation():
    with pytest.raises(DegenerateDraws):
        estimate_weights(np.ones(100))
    with pytest.raises(ValidationError):
        estimate_weights(np.arange(100.0), grid_size=10)


def test_normalize_unit_variance(rng):
    d, sigma = normalize(3.0 * rng.standard_normal(1000) + 2.0)
    assert np.std(d) == pytest.approx(1.0)
    assert sigma == pytest.approx(3.0, rel=0.1)


def test_trapezoid_exact_for_lines():
    x = np.linspace(0, 2, 11)
    assert trapezoid(3 * x + 1, x) == pytest.approx(8.0)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["normal", "uniform", "t5", "exponential", "bimodal"]),
    st.integers(0, 2**32 - 1),
    st.floats(0.1, 100.0),
)
def test_weights_nonnegative_and_unit_mass(dist, seed, scale):
    g = np.random.default_rng(seed)
    n = 20000
    draws = {
        "normal": lambda: g.standard_normal(n),
        "uniform": lambda: g.uniform(-1, 1, n),
        "t5": lambda: np.clip(g.standard_t(5, n), -6, 6),
        "exponential": lambda: g.exponential(1.0, n),
        "bimodal": lambda: np.concatenate([g.normal(-2, 0.3, n // 2), g.normal(2, 0.3, n // 2)]),
    }[dist]()
    curve = estimate_weights(scale * draws)
    assert np.all(curve.weights >= -1e-12)
    assert curve.integral == pytest.approx(1.0, abs=0.01)


def test_linear_exogenous_weighted_mce_equals_slope():
    spec = PotentialOutcomeSpec(Linear(1.4), lambda_z=0.3, lambda_u=0.7)
    rep = decomposition_check(spec, N, seed=1)
    wm = weighted_mce(spec, N, seed=1)
    assert wm.value == pytest.approx(rep.wmce)
    assert abs(rep.beta_es - rep.wmce) <= 4 * rep.mc_se_gap
    assert abs(rep.delta) <= 4 * rep.mc_se_gap


def test_quadratic_symmetric_stein_oracle():
    # Gaussian D: E[phi'(D) w] reduces to the linear coefficient because the curvature term is odd
    spec = PotentialOutcomeSpec(Quadratic(0.8, 0.6))
    wm = weighted_mce(spec, N, seed=2)
    assert wm.value == pytest.approx(0.8, abs=max(4 * wm.se, 0.01))


def test_zero_dose_response():
    wm = weighted_mce(PotentialOutcomeSpec(Linear(0.0)), N, seed=3)
    assert wm.value == 0.0


def test_selection_bias_exogenous_is_zero():
    spec = PotentialOutcomeSpec(Quadratic(1.0, 0.5), lambda_z=1.0, lambda_u=1.0)
    sb = selection_bias(spec, N, seed=4)
    assert abs(sb.value) <= 3 * sb.se


def test_selection_bias_endogenous_closed_form():
    spec = PotentialOutcomeSpec(Linear(1.0), lambda_u=0.8, kappa_u=0.6, sigma_u2=1.5, sigma_e2=1.0)
    sb = selection_bias(spec, N, seed=5)
    closed = 0.8 * 0.6 * 1.5 / spec.sigma_d2
    assert sb.value > 0
    assert sb.value == pytest.approx(closed, abs=4 * sb.se)


def test_selection_bias_vanishes_with_large_shock_variance():
    spec = PotentialOutcomeSpec(Linear(1.0), lambda_u=0.8, kappa_u=0.6)
    small = selection_bias(spec, N, seed=6)
    large = selection_bias(spec.with_sigma_e2(1e4), N, seed=6)
    assert abs(large.value) * 100 <= abs(small.value) + 4 * large.se * 100


SPECS = {
    "linear-exog": PotentialOutcomeSpec(Linear(1.0), lambda_z=0.5, lambda_u=1.0),
    "linear-endog": PotentialOutcomeSpec(Linear(1.0), **ENDOG),
    "quadratic-exog": PotentialOutcomeSpec(Quadratic(1.0, 0.25), lambda_z=0.5, lambda_u=1.0),
    "quadratic-endog": PotentialOutcomeSpec(Quadratic(1.0, 0.25), **ENDOG),
    "logistic-exog": PotentialOutcomeSpec(Logistic(2.0, 1.5), lambda_z=0.5, lambda_u=1.0),
    "logistic-endog": PotentialOutcomeSpec(Logistic(2.0, 1.5), **ENDOG),
}


@pytest.mark.parametrize("name", sorted(SPECS))
def test_decomposition_identity(name):
    rep = decomposition_check(SPECS[name], N, seed=11)
    assert abs(rep.gap) <= 4 * rep.mc_se_gap
    if name.endswith("endog"):
        assert rep.delta > 0


@pytest.mark.parametrize("c", [-2.0, 0.5, 3.0])
def test_scale_equivariance(c):
    spec = SPECS["quadratic-endog"]
    base = decomposition_check(spec, 10**5, seed=12)
    scaled = decomposition_check(spec.scaled_outcome(c), 10**5, seed=12)
    for name in ("beta_es", "wmce", "delta"):
        assert getattr(scaled, name) == pytest.approx(c * getattr(base, name), rel=1e-9, abs=1e-12)


def test_sweep_delta_strictly_decreasing_and_inverse_variance():
    spec = SPECS["linear-endog"]
    rows = exogeneity_sweep(spec, [1, 10, 100, 1000], 10**5, seed=13)
    deltas = [abs(r.delta) for r in rows]
    assert all(a > b for a, b in zip(deltas, deltas[1:]))
    # linear case: beta_es - b = C / sigma_D^2 with C the confounding covariance
    c_cov = 0.5 * 0.5 + 1.0 * 1.0
    for r in rows:
        sd2 = spec.with_sigma_e2(r.sigma_e2).sigma_d2
        assert abs(r.beta_es - 1.0) <= 1.5 * c_cov / sd2 + 4 * r.mc_se_gap


def test_sweep_exogenous_delta_near_zero():
    rows = exogeneity_sweep(SPECS["linear-exog"], [1, 10, 100], 10**5, seed=14)
    for r in rows:
        assert abs(r.delta) <= 4 * r.mc_se_gap


def test_sweep_requires_ascending():
    with pytest.raises(ValidationError):
        exogeneity_sweep(SPECS["linear-exog"], [10, 1], 1000)
    with pytest.raises(ValidationError):
        exogeneity_sweep(SPECS["linear-exog"], [0, 1], 1000)


def test_sweep_csv_layout():
    rows = exogeneity_sweep(SPECS["linear-endog"], [1, 10], 1000, seed=1)
    text = sweep_to_csv(rows, ["provenance"])
    lines = text.splitlines()
    assert lines[0] == "# provenance"
    assert lines[1].split(",") == list(SWEEP_COLUMNS)
    assert lines[1] == "sigma_e2,beta_es,delta,wmce,gap,mc_se_gap"
    assert len(lines) == 4


def test_order_insensitive_reduction(rng):
    d = rng.standard_normal(10**5)
    a = estimate_weights(d)
    b = estimate_weights(rng.permutation(d))
    assert np.allclose(a.weights, b.weights, rtol=0, atol=1e-12)
    assert a.integral == pytest.approx(b.integral, abs=1e-12)
