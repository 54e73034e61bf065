import math

import numpy as np
import pytest

from sizewinding.largeq import (ContourKind, LargeQParams, ScramblonPropagator,
                                dressed_two_point, otoc, solve_velocity,
                                strength_density, strength_weighted_integral,
                                thermal_cosine, velocity_residual,
                                velocity_tolerance, vertex_moment)

# beta*J that inverts the velocity equation exactly at v = 0.6
BETA_J_V06 = math.pi * 0.6 / math.cos(0.3 * math.pi)   # 3.20687801...
COS_POW = math.cos(0.3 * math.pi) ** 0.5               # 0.76667154...


@pytest.fixture(scope="module")
def params():
    return LargeQParams(delta=0.25, v=0.6, beta=2 * math.pi, prefactor_c=1.0)


# ---------------------------------------------------------------- velocity

def test_velocity_inverts_exactly_at_v06():
    assert solve_velocity(BETA_J_V06) == pytest.approx(0.6, abs=1e-12)


def test_velocity_spec_coupling_value():
    # 3.206758 is slightly off the exact inversion; root frozen from a
    # high-precision Newton iteration
    assert solve_velocity(3.206758) == pytest.approx(0.5999902265747, abs=1e-10)


@pytest.mark.parametrize("beta_j", np.geomspace(1e-3, 1e4, 15))
def test_velocity_residual_contract(beta_j):
    v = solve_velocity(float(beta_j))
    assert 0.0 < v < 1.0
    assert abs(velocity_residual(v, float(beta_j))) < 1e-12


def test_velocity_residual_conditioning_floor():
    # beyond beta*J ~ 2e4 the 1e-12 target is below float granularity; the
    # solver still converges to the representable optimum
    v = solve_velocity(1e6)
    assert abs(velocity_residual(v, 1e6)) < velocity_tolerance(1e6)


def test_velocity_small_coupling_limit():
    bj = 1e-4
    assert solve_velocity(bj) == pytest.approx(bj / math.pi, rel=1e-6)


def test_velocity_strong_coupling_limit():
    v = solve_velocity(1e6)
    assert 1.0 - v < 3e-6


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_velocity_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        solve_velocity(bad)


# ---------------------------------------------------------------- params

def test_params_validation():
    with pytest.raises(ValueError):
        LargeQParams(delta=0.0, v=0.6, beta=1.0)
    with pytest.raises(ValueError):
        LargeQParams(delta=0.6, v=0.6, beta=1.0)
    with pytest.raises(ValueError):
        LargeQParams(delta=0.25, v=1.0, beta=1.0)
    with pytest.raises(ValueError):
        LargeQParams(delta=0.25, v=0.6, beta=0.0)
    with pytest.raises(ValueError):
        LargeQParams(delta=0.25, v=0.6, beta=1.0, prefactor_c=0.0)


def test_params_coupling_consistency():
    p = LargeQParams.from_coupling(0.25, BETA_J_V06, 2 * math.pi)
    assert p.v == pytest.approx(0.6, abs=1e-12)
    with pytest.raises(ValueError, match="inconsistent"):
        LargeQParams(delta=0.25, v=0.5, beta=1.0, coupling_beta_j=BETA_J_V06)


def test_chaos_bound(params):
    # kappa = 2 pi v / beta <= 2 pi / beta for every valid parameter set
    for v in (0.01, 0.3, 0.6, 0.99):
        p = LargeQParams(delta=0.25, v=v, beta=2.0)
        assert p.kappa <= 2 * math.pi / p.beta + 1e-15


def test_lambda0_values(params):
    assert params.lambda0(0.0) == pytest.approx(1.0)
    p18 = LargeQParams(delta=0.25, v=0.6, beta=2 * math.pi, prefactor_c=18.0)
    assert p18.lambda0(0.0) == pytest.approx(1.0 / 18.0, rel=1e-14)
    assert p18.lambda0(p18.scrambling_time()) == pytest.approx(1.0, rel=1e-12)
    # v = 0.6, beta = 2 pi gives kappa = 0.6; t = 9 and C = 18
    assert p18.lambda0(9.0) == pytest.approx(math.exp(5.4) / 18.0, rel=1e-13)
    assert p18.lambda0(9.0) == pytest.approx(12.300357, abs=1e-6)


def test_lambda0_overflow(params):
    with pytest.raises(OverflowError):
        params.lambda0(1e6)


def test_contextual_prefactor():
    p = LargeQParams(delta=0.25, v=0.6, beta=2 * math.pi)
    assert p.resolved_c() == 1.0
    assert p.resolved_c(18) == 18.0
    assert p.lambda0(0.0, 18) == pytest.approx(1.0 / 18.0)


# ---------------------------------------------------------------- contour

def test_contour_kinds(params):
    beta = params.beta
    std, wind = ContourKind.STANDARD_SIZE, ContourKind.WINDING_SIZE
    assert std.tau12(beta) == 0.0
    assert wind.tau12(beta) == beta / 2
    assert std.tau34(beta) == wind.tau34(beta) == beta / 2
    assert std.propagator_phase(params) == 1.0
    ph = wind.propagator_phase(params)
    assert abs(ph) == pytest.approx(1.0, abs=1e-14)
    # kappa beta / 4 = pi v / 2
    assert np.angle(ph) == pytest.approx(math.pi * 0.6 / 2, abs=1e-14)


def test_propagator_validation(params):
    with pytest.raises(ValueError):
        ScramblonPropagator(lambda0=-1.0)
    with pytest.raises(ValueError):
        ScramblonPropagator(lambda0=1.0, phase=2.0)
    prop = ScramblonPropagator.at_time(params, 2.0, ContourKind.WINDING_SIZE)
    assert prop.lambda0 == pytest.approx(math.exp(0.6 * 2.0))
    assert prop.value == pytest.approx(prop.phase * prop.lambda0)


# ---------------------------------------------------------------- vertex functions

def test_thermal_cosine_endpoints(params):
    assert thermal_cosine(0.0, 0.0, params) == pytest.approx(
        math.cos(0.3 * math.pi), abs=1e-15)
    assert thermal_cosine(params.beta / 2, 0.0, params) == pytest.approx(
        1.0, abs=1e-14)


def test_strength_density_rejects_origin(params):
    with pytest.raises(ValueError, match="singular"):
        strength_density(0.0, 0.0, 0.0, params)


def test_strength_density_positive(params):
    # real and non-negative for real strengths at every imaginary-time offset
    y = np.linspace(1e-6, 100.0, 400)
    for tau in (0.0, params.beta / 4, params.beta / 2):
        vals = strength_density(y, tau, 0.0, params)
        assert np.all(np.abs(np.imag(vals)) < 1e-14 * np.abs(vals))
        assert np.all(np.real(vals) >= 0.0)


def test_strength_density_normalization(params):
    total = strength_weighted_integral(lambda y: 1.0, params, winding=False)
    assert total == pytest.approx(1.0, rel=1e-10)
    total_w = strength_weighted_integral(lambda y: 1.0, params, winding=True)
    assert total_w == pytest.approx(COS_POW, rel=1e-10)
    assert total_w == pytest.approx(0.766672, abs=1e-6)


def test_dressed_two_point_values(params):
    beta = params.beta
    assert dressed_two_point(0.0, beta / 2, 0.0, params) == pytest.approx(
        COS_POW, abs=1e-12)
    assert dressed_two_point(0.0, beta / 2, 0.0, params) == pytest.approx(
        0.766672, abs=1e-6)
    z = np.linspace(0.0, 50.0, 200)
    vals = np.real(dressed_two_point(z, beta / 2, 0.0, params))
    assert np.all(np.diff(vals) < 0.0)
    assert dressed_two_point(1e8, beta / 2, 0.0, params) == pytest.approx(
        0.0, abs=1e-3)


@pytest.mark.parametrize("delta", [0.05, 0.25, 0.5])
@pytest.mark.parametrize("v", [0.05, 0.6, 0.95])
def test_dressed_two_point_bounded(delta, v):
    p = LargeQParams(delta=delta, v=v, beta=2 * math.pi)
    val = dressed_two_point(0.0, p.beta / 2, 0.0, p)
    assert 0.0 < np.real(val) < 1.0


def test_dressed_two_point_branch_cut(params):
    with pytest.raises(ValueError, match="branch cut"):
        dressed_two_point(-2.0, params.beta / 2, 0.0, params)


def test_vertex_moment_values(params):
    assert vertex_moment(0, 0.0, 0.0, params) == pytest.approx(1.0, abs=1e-14)
    assert vertex_moment(0, params.beta / 2, 0.0, params) == pytest.approx(
        COS_POW, abs=1e-14)
    assert vertex_moment(1, 0.0, 0.0, params) == pytest.approx(
        2 * 0.25 / math.cos(0.3 * math.pi), abs=1e-13)
    assert vertex_moment(1, 0.0, 0.0, params) == pytest.approx(0.850651, abs=1e-6)
    with pytest.raises(ValueError):
        vertex_moment(-1, 0.0, 0.0, params)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
@pytest.mark.parametrize("tau_frac", [0.0, 0.25, 0.5])
def test_vertex_moment_matches_quadrature(params, m, tau_frac):
    tau = tau_frac * params.beta
    closed = vertex_moment(m, tau, 0.0, params)
    # independent route: quadrature of y^m against the strength density;
    # for intermediate tau the density decays at rate Re cos(pi v (1/2 - tau/beta))
    a = thermal_cosine(tau, 0.0, params)
    pref = math.cos(0.3 * math.pi) ** 0.5 / math.gamma(0.5)
    from sizewinding.quadrature import converge_panels, graded_edges
    two_d = 0.5
    u_max = ((45.0 + 12.0 * m) / np.real(a)) ** two_d

    def eval_fn(u, w):
        y = u ** (1.0 / two_d)
        return (pref / two_d) * np.sum(w * y ** m * np.exp(-a * y))

    quad = converge_panels(eval_fn, graded_edges(u_max, 48), tol=1e-11)
    assert abs(quad - closed) / abs(closed) < 1e-8


# ---------------------------------------------------------------- otoc

def test_otoc_zero_propagator(params):
    prop = ScramblonPropagator(lambda0=0.0)
    val = otoc(prop, ContourKind.STANDARD_SIZE, params)
    assert val == pytest.approx(COS_POW, rel=1e-10)
    # winding contour at lambda = 0 factorizes into both zeroth moments
    val_w = otoc(ScramblonPropagator(lambda0=0.0, phase=np.exp(0.3j * math.pi)),
                 ContourKind.WINDING_SIZE, params)
    assert val_w == pytest.approx(COS_POW ** 2, rel=1e-10)


def test_otoc_monotone_decreasing(params):
    lam = [0.01, 0.1, 1.0, 10.0, 100.0]
    vals = [otoc(ScramblonPropagator(lambda0=l), ContourKind.STANDARD_SIZE,
                 params).real for l in lam]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    big = otoc(ScramblonPropagator(lambda0=1e8), ContourKind.STANDARD_SIZE,
               params)
    assert abs(big) < 1e-3
