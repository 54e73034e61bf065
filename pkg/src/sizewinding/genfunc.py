"""Laplace-transform generating functions of the size distributions.

The generating function at Laplace variable nu is the strength-density
integral of exp[(nu^2 / 8N)(1 - f^2) - (nu / 2)(1 - f)] with f the dressed
two-point function at the contour-dependent propagator; it is the exact
Gaussian moment generating function of the finite-N distributions, so the
two modules must agree to quadrature accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import ContinuousDistribution, finite_n_distribution
from .errors import NumericalError
from .largeq import ContourKind, LargeQParams, strength_weighted_integral


@dataclass(frozen=True)
class GeneratingFunctionSample:
    """One evaluation of a generating function."""

    nu: complex
    t: float
    kind: ContourKind
    value: complex
    n: int


def generating_function(nu: complex, t: float, kind: ContourKind,
                        params: LargeQParams, n: int,
                        tol: float = 1e-12) -> complex:
    """Generating function of the (winding) size distribution at variable nu.

    Valid for |nu| <= N, where the quadratic expansion in nu/2N underlying
    the closed form holds.
    """
    if n < 2:
        raise ValueError(f"need N >= 2, got {n}")
    if abs(nu) > n:
        raise ValueError(f"|nu| = {abs(nu):.3g} exceeds the validity bound N = {n}")
    lam = kind.propagator_phase(params) * params.lambda0(t, n)
    winding = kind is ContourKind.WINDING_SIZE
    two_d = 2 * params.delta
    c = np.cos(np.pi * params.v / 2) ** two_d

    def phi(y):
        f = c * np.power(1.0 + lam * y, -two_d)
        return np.exp((nu * nu / (8.0 * n)) * (1.0 - f * f)
                      - (nu / 2.0) * (1.0 - f))

    val = strength_weighted_integral(phi, params, winding=winding, tol=tol)
    return complex(val)


def sample(nu: complex, t: float, kind: ContourKind, params: LargeQParams,
           n: int) -> GeneratingFunctionSample:
    return GeneratingFunctionSample(
        nu=nu, t=t, kind=kind, n=n,
        value=generating_function(nu, t, kind, params, n))


def moments_from_distribution(dist: ContinuousDistribution, k_max: int,
                              winding: bool = False) -> np.ndarray:
    """Moments <s^k>, k = 0..k_max, by trapezoid against the gridded density."""
    density = dist.q if winding else dist.p
    out = np.empty(k_max + 1, dtype=complex)
    for k in range(k_max + 1):
        out[k] = np.trapezoid(dist.s_grid ** k * density, dist.s_grid)
    return out if winding else out.real


def _derivative_at_zero(fn, order: int, step: float) -> complex:
    """Central finite difference of fn at 0, Richardson-extrapolated once."""
    def diff(h):
        if order == 1:
            return (fn(h) - fn(-h)) / (2.0 * h)
        if order == 2:
            return (fn(h) - 2.0 * fn(0.0) + fn(-h)) / (h * h)
        raise ValueError(f"unsupported derivative order {order}")

    d1, d2 = diff(step), diff(step / 2.0)
    return (4.0 * d2 - d1) / 3.0


def size_moments(t: float, kind: ContourKind, params: LargeQParams, n: int,
                 k_max: int = 2, cross_check: bool = True,
                 check_tol: float = 1e-3) -> np.ndarray:
    """Moments <s^k> of the finite-N distribution, k = 0..k_max (k_max <= 4).

    Quadrature against the distribution is the primary route.  For k <= 2 the
    result is cross-checked against central finite differences of the
    generating function in nu (step 1e-4, one Richardson pass); 3rd and 4th
    differences at that step are roundoff-dominated and are not checked.
    """
    if not 0 <= k_max <= 4:
        raise ValueError(f"k_max must be in 0..4, got {k_max}")
    winding = kind is ContourKind.WINDING_SIZE
    dist = finite_n_distribution(t, params, n, tol=1e-9)
    moments = moments_from_distribution(dist, k_max, winding=winding)

    if cross_check:
        def gf(nu):
            return generating_function(nu, t, kind, params, n, tol=1e-13)

        for k in range(1, min(k_max, 2) + 1):
            fd = (-1.0) ** k * _derivative_at_zero(gf, k, step=1e-4)
            ref = moments[k]
            err = abs(fd - ref) / max(abs(ref), 1e-30)
            if err > check_tol:
                raise NumericalError(
                    f"moment k={k} disagrees with the generating function: "
                    f"quadrature {ref}, finite difference {fd}, rel {err:.2e}")
    return moments
