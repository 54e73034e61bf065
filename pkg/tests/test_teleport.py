import math
from itertools import combinations

import numpy as np
import pytest

from sizewinding.ed import (SizeDistribution, SykParams, build_hamiltonian,
                            build_majorana_ops, dressed_operator,
                            sample_couplings, size_decompose)
from sizewinding.teleport import (DoubledSystem, TeleportResult,
                                  coupling_expectation, scan_coupling,
                                  teleport_exact, teleport_from_q,
                                  thermal_size_distribution)


@pytest.fixture(scope="module")
def syk8():
    return SykParams(n_majorana=8, q=4, beta=2 * math.pi, base_seed=5)


@pytest.fixture(scope="module")
def h8(syk8):
    return build_hamiltonian(sample_couplings(syk8, 0))


@pytest.fixture(scope="module")
def system8(h8):
    return DoubledSystem(h8, 8)


def _synthetic(p, q, beta=0.0, t=0.0):
    n = len(p) - 1
    return SizeDistribution(n_values=np.arange(n + 1), p=np.asarray(p, float),
                            q=np.asarray(q, complex), t=t, beta=beta)


# ---------------------------------------------------------------- result type

def test_result_rejects_super_unitary():
    with pytest.raises(ValueError):
        TeleportResult(t=0.0, g=0.0, f_value=1.1, v_expectation=0.0, n=4,
                       method="from_q")


# ---------------------------------------------------------------- doubled system

def test_doubled_guard_and_convention(h8):
    with pytest.raises(ValueError):
        DoubledSystem(np.eye(128, dtype=complex), 14)
    with pytest.raises(ValueError, match="convention violation"):
        DoubledSystem(h8, 8, h_right=h8 + 1e-6 * np.eye(16))
    ok = DoubledSystem(h8, 8, h_right=h8.conj())
    assert np.array_equal(ok.h_right, h8.conj())


def test_reference_state_properties(system8):
    # unit norm, annihilated by every c_j, commutes with the Hamiltonian
    assert np.linalg.norm(system8.epr) == pytest.approx(1.0, abs=1e-12)
    w = math.sqrt(system8.dim) * system8.epr
    assert np.abs(w @ w.conj().T - np.eye(system8.dim)).max() < 1e-10


def test_coupling_eigenvalues_on_size_sectors():
    p = SykParams(n_majorana=6, q=4, beta=1.0, base_seed=2)
    sys6 = DoubledSystem(build_hamiltonian(sample_couplings(p, 0)), 6)
    for n in range(7):
        for sub in combinations(range(6), n):
            psi = sys6.epr.copy()
            for j in reversed(sub):
                psi = sys6.chi[j] @ psi
            assert np.allclose(sys6.apply_coupling(psi), (2 * n - 6) * psi,
                               atol=1e-10)


# ---------------------------------------------------------------- <V>

def test_v_expectation_infinite_temperature(h8):
    assert coupling_expectation(h8, 0.0, 8) == pytest.approx(-8.0, abs=1e-12)


def test_v_expectation_bounds_and_identity(h8, syk8):
    v = coupling_expectation(h8, syk8.beta, 8)
    assert -8.0 <= v <= 8.0
    rho_dist = thermal_size_distribution(h8, syk8.beta, 8)
    single_side = -8.0 + 2.0 * rho_dist.mean_size()
    assert v == pytest.approx(single_side, abs=1e-10)


# ---------------------------------------------------------------- from_q

def test_from_q_zero_coupling_sums_q():
    p = np.array([0.0, 0.5, 0.0, 0.5, 0.0])
    q = p * np.exp(1j * np.array([0.0, 0.3, 0.0, -0.2, 0.0]))
    dist = _synthetic(p, q)
    res = teleport_from_q(dist, 0.0, -4.0)
    assert res.f_value == pytest.approx(np.sum(q))


def test_from_q_triangle_bound():
    rng = np.random.default_rng(3)
    p = rng.random(9)
    p /= p.sum()
    q = p * np.exp(1j * rng.uniform(-np.pi, np.pi, 9))
    dist = _synthetic(p, q)
    for g in np.linspace(-2.0, 2.0, 21):
        assert abs(teleport_from_q(dist, float(g), -8.0).f_value) <= 1.0 + 1e-12


def test_perfect_winding_attains_unit_signal():
    alpha = 0.35
    p = np.array([0.0, 0.3, 0.0, 0.4, 0.0, 0.2, 0.0, 0.1, 0.0])
    q = p * np.exp(2j * alpha * np.arange(9))
    dist = _synthetic(p, q)
    res = teleport_from_q(dist, -alpha, -8.0)
    assert abs(res.f_value) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- exact

@pytest.mark.parametrize("n", [4, 6, 8])
def test_exact_equals_from_q_at_zero_coupling(n):
    p = SykParams(n_majorana=n, q=4, beta=2 * math.pi, base_seed=5)
    h = build_hamiltonian(sample_couplings(p, 0))
    ops = build_majorana_ops(n)
    system = DoubledSystem(h, n)
    for t in (0.0, 1.0, 3.0):
        dist = size_decompose(dressed_operator(h, p.beta, t, 1, ops), n,
                              t=t, beta=p.beta)
        exact = system.correlator(p.beta, t, 0.0, 1)
        assert abs(exact.f_value - dist.total_q()) < 1e-12


def test_exact_infinite_temperature_unimodular():
    p = SykParams(n_majorana=8, q=4, beta=0.0, base_seed=5)
    for g in (0.0, 0.7, 2.1):
        res = teleport_exact(p, 0.0, g)
        assert abs(res.f_value) == pytest.approx(1.0, abs=1e-10)


def test_factorization_gap_shrinks_at_late_times(syk8, h8, system8):
    # the from-Q form drops a crossed correlation that dephases with time;
    # the gap is reported, and for this seed it shrinks between t=2 and t=10
    ops = build_majorana_ops(8)
    v_exp = system8.v_expectation(syk8.beta)
    gaps = {}
    for t in (2.0, 10.0):
        dist = size_decompose(dressed_operator(h8, syk8.beta, t, 1, ops), 8,
                              t=t, beta=syk8.beta)
        exact = system8.correlator(syk8.beta, t, 0.2, 1).f_value
        approx = teleport_from_q(dist, 0.2, v_exp).f_value
        gaps[t] = abs(exact - approx)
    assert gaps[10.0] < gaps[2.0]
    assert gaps[10.0] < 0.5


def test_exact_probe_guard(system8, syk8):
    with pytest.raises(ValueError):
        system8.correlator(syk8.beta, 1.0, 0.0, 9)


# ---------------------------------------------------------------- scans

def test_scan_flat_phase_peaks_at_zero():
    p = np.array([0.0, 0.6, 0.0, 0.4])
    dist = _synthetic(p, p.astype(complex))
    results, g_peak = scan_coupling(dist, np.linspace(-1, 1, 81), -4.0)
    assert g_peak == pytest.approx(0.0, abs=1e-12)
    assert len(results) == 81


def test_scan_locates_synthetic_winding():
    alpha = 0.35
    p = np.array([0.0, 0.3, 0.0, 0.4, 0.0, 0.2, 0.0, 0.1, 0.0])
    q = p * np.exp(2j * alpha * np.arange(9))
    dist = _synthetic(p, q)
    grid = np.linspace(-1.0, 1.0, 401)
    _, g_peak = scan_coupling(dist, grid, -8.0)
    assert abs(g_peak - (-alpha)) <= (grid[1] - grid[0]) + 1e-12


def test_scan_sign_matches_winding_slope():
    # disorder-averaged run: the optimal coupling must oppose half the
    # per-length winding slope
    from sizewinding.ed import run_ensemble
    p = SykParams(n_majorana=12, q=4, script_j=3.206758 / (2 * math.pi),
                  beta=2 * math.pi, base_seed=1)
    res = run_ensemble(p, (9.0,), 8, n_jobs=2)
    mean = res.mean_distribution(0)
    odd = np.arange(1, 13, 2)
    slope_n = np.polyfit(odd, np.unwrap(np.angle(mean.q[odd])), 1)[0]
    _, g_peak = scan_coupling(mean, np.linspace(-1.5, 1.5, 601),
                              res.mean_v_expectation)
    assert np.sign(g_peak) == np.sign(-slope_n / 2.0)
