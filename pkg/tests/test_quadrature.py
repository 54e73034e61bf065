import numpy as np
import pytest

from sizewinding.errors import NumericalError
from sizewinding.quadrature import (converge_panels, gauss_legendre,
                                    graded_edges, integrate, panel_nodes,
                                    refine_edges)


def test_gauss_legendre_cached_and_exact_for_polynomials():
    x, w = gauss_legendre(8)
    assert len(x) == 8
    # degree-15 polynomial integrated exactly on [-1, 1]
    assert np.sum(w * x ** 14) == pytest.approx(2.0 / 15.0, rel=1e-14)


def test_panel_weights_sum_to_interval_length():
    edges = graded_edges(3.0, 10)
    _, w = panel_nodes(edges, order=12)
    assert np.sum(w) == pytest.approx(3.0, rel=1e-14)


def test_refine_edges_doubles_panels():
    edges = np.array([0.0, 1.0, 4.0])
    out = refine_edges(edges)
    assert np.allclose(out, [0.0, 0.5, 1.0, 2.5, 4.0])


def test_graded_edges_validation():
    with pytest.raises(ValueError):
        graded_edges(-1.0, 10)
    with pytest.raises(ValueError):
        graded_edges(1.0, 1)


def test_integrate_smooth():
    assert integrate(np.sin, 0.0, np.pi, tol=1e-12) == pytest.approx(2.0, rel=1e-11)
    val = integrate(lambda x: np.exp(1j * x), 0.0, 1.0, tol=1e-12)
    assert val == pytest.approx(np.sin(1.0) + 1j * (1 - np.cos(1.0)), rel=1e-11)


def test_converge_panels_reports_achieved_tolerance():
    # a kink the low-order rule cannot settle within one round
    def eval_fn(nodes, weights):
        return np.sum(weights * np.abs(nodes - np.sqrt(2) / 2))

    with pytest.raises(NumericalError, match="achieved"):
        converge_panels(eval_fn, np.array([0.0, 1.0]), order=2, tol=1e-15,
                        max_rounds=3)


def test_converge_panels_vector_valued():
    edges = np.linspace(0.0, 1.0, 5)

    def eval_fn(nodes, weights):
        return np.array([np.sum(weights * nodes ** k) for k in range(3)])

    val = converge_panels(eval_fn, edges, order=8, tol=1e-13)
    assert np.allclose(val, [1.0, 0.5, 1.0 / 3.0], rtol=1e-12)
