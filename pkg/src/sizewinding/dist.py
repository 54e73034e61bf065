"""Size and winding-size distributions in reduced size s = n/N.

Two regimes are implemented.  In the strict large-N limit the distributions
are supported on [s_min, 1/2] with s_min = (1 - cos^(2 delta)(pi v/2))/2 and
follow from a change of variables y <-> s through the dressed two-point
function; the winding distribution differs from the plain one only through a
rotation of the strength variable, which makes |Q| = P exact and the phase of
Q linear in y.  At finite N the delta function relating y and s broadens into
a Gaussian of variance (1 - f^2)/(4N); for the winding contour the mean and
variance are complex and the phase cancellation happens inside the integral.

The finite-N Gaussians leak outside s in [0, 1] (by ~1e-2 in probability at
the parameters of interest), so grids here cover the full support of the
broadened kernel; normalization and Laplace identities are exact on that
domain and only approximate on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .errors import NumericalError
from .largeq import (LargeQParams, strength_density,
                     strength_weighted_integral)
from .quadrature import converge_panels, graded_edges

_EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class ContinuousDistribution:
    """Distributions on a grid of reduced size s at fixed time.

    ``p`` is the real size density, ``q`` the complex winding density.
    ``mode`` is "large_n" or "finite_n"; finite-N grids extend beyond [0, 1]
    to cover the Gaussian-broadened support.
    """

    s_grid: np.ndarray
    p: np.ndarray
    q: np.ndarray
    params: LargeQParams
    mode: str
    lambda0: float
    t: float | None = None
    n: int | None = None

    def __post_init__(self):
        if self.s_grid.ndim != 1 or np.any(np.diff(self.s_grid) <= 0):
            raise ValueError("s_grid must be strictly increasing")
        if self.mode not in ("large_n", "finite_n"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def norm(self) -> float:
        """Trapezoidal integral of the size density over the grid."""
        return float(np.trapezoid(self.p, self.s_grid))

    def q_norm(self) -> complex:
        return complex(np.trapezoid(self.q, self.s_grid))

    def restrict(self, lo: float, hi: float) -> "ContinuousDistribution":
        m = (self.s_grid >= lo) & (self.s_grid <= hi)
        return ContinuousDistribution(self.s_grid[m], self.p[m], self.q[m],
                                      self.params, self.mode, self.lambda0,
                                      self.t, self.n)


@dataclass(frozen=True)
class WindingFit:
    """Least-squares line through the unwrapped winding phase."""

    intercept: float
    slope: float
    fit_window: tuple[float, float]
    residual: float

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("rms residual cannot be negative")


def size_support(params: LargeQParams) -> tuple[float, float]:
    """Support edges of the large-N distribution in reduced size."""
    two_d = 2 * params.delta
    s_min = (1.0 - math.cos(math.pi * params.v / 2) ** two_d) / 2.0
    return s_min, 0.5


def strength_from_size(s, lambda0: float, params: LargeQParams):
    """Invert f(lambda0 y) = 1 - 2s for the strength variable y >= 0.

    Closed form: y = [cos(pi v/2) (1 - 2s)^(-1/(2 delta)) - 1] / lambda0.
    """
    if lambda0 <= 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    s = np.asarray(s, dtype=float)
    s_min, s_max = size_support(params)
    if np.any(s < s_min - 1e-14) or np.any(s >= s_max):
        raise ValueError(f"s outside the support [{s_min}, 0.5)")
    two_d = 2 * params.delta
    y = (math.cos(math.pi * params.v / 2) * (1.0 - 2.0 * s) ** (-1.0 / two_d)
         - 1.0) / lambda0
    y = np.maximum(y, 0.0)
    return y if y.ndim else float(y)


def _dressed_slope(y, lambda0: float, params: LargeQParams):
    """d/dy of the dressed two-point function at strength lambda0*y (winding contour)."""
    two_d = 2 * params.delta
    c = math.cos(math.pi * params.v / 2) ** two_d
    return -two_d * c * lambda0 * (1.0 + lambda0 * np.asarray(y)) ** (-two_d - 1.0)


def large_n_point(s, lambda0: float, params: LargeQParams):
    """Large-N densities (P, Q) at reduced size s strictly inside the support.

    P carries the standard-contour strength density; Q carries the same
    density with the strength rotated by exp(-i kappa beta/4), including the
    Jacobian of that rotation so that Q/P = exp(i sin(pi v/2) y - i pi v delta).
    """
    s_arr = np.asarray(s, dtype=float)
    s_min, s_max = size_support(params)
    if np.any(s_arr <= s_min) or np.any(s_arr >= s_max):
        raise ValueError(f"s must lie strictly inside ({s_min}, 0.5)")
    y = np.asarray(strength_from_size(s_arr, lambda0, params))
    jac = 2.0 / np.abs(_dressed_slope(y, lambda0, params))
    p = jac * np.real(strength_density(y, 0.0, 0.0, params))
    rot = np.exp(-1j * params.kappa * params.beta / 4)
    q = jac * rot * strength_density(rot * y, params.beta / 2, 0.0, params)
    if s_arr.ndim:
        return p, q
    return float(p), complex(q)


def winding_ratio(s, lambda0: float, params: LargeQParams):
    """Unit-modulus ratio Q/P = exp(i sin(pi v/2) y - i pi v delta) at large N."""
    y = strength_from_size(s, lambda0, params)
    phase = np.sin(math.pi * params.v / 2) * np.asarray(y) \
        - math.pi * params.v * params.delta
    out = np.exp(1j * phase)
    return out if out.ndim else complex(out)


def winding_slope_at(s, lambda0: float, params: LargeQParams):
    """Analytic d(arg Q/P)/ds at reduced size s (large N), by the chain rule."""
    s = np.asarray(s, dtype=float)
    two_d = 2 * params.delta
    dy_ds = math.cos(math.pi * params.v / 2) \
        * (1.0 - 2.0 * s) ** (-1.0 / two_d - 1.0) / (params.delta * lambda0)
    out = np.sin(math.pi * params.v / 2) * dy_ds
    return out if out.ndim else float(out)


def early_winding_slope(params: LargeQParams, lambda0: float) -> float:
    """s -> 0 limit of the winding-phase slope: q sin(pi v) / (2 lambda0)."""
    if lambda0 <= 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")
    return math.sin(math.pi * params.v) / (2.0 * params.delta * lambda0)


def _edge_clustered_grid(params: LargeQParams, points: int) -> np.ndarray:
    """Grid on [0, 1] with geometric clustering toward both support edges."""
    s_min, s_max = size_support(params)
    base = np.linspace(0.0, 1.0, points)
    width = s_max - s_min
    lower = s_min + width * np.geomspace(1e-10, 0.5, points // 4)
    upper = s_max - width * np.geomspace(1e-10, 0.5, points // 4)
    grid = np.unique(np.concatenate((base, lower, upper)))
    return grid


def large_n_distribution(lambda0: float, params: LargeQParams,
                         points: int = 2001) -> ContinuousDistribution:
    """Large-N distribution sampled on [0, 1] with refined support edges."""
    grid = _edge_clustered_grid(params, points)
    s_min, s_max = size_support(params)
    p = np.zeros_like(grid)
    q = np.zeros_like(grid, dtype=complex)
    inside = (grid > s_min) & (grid < s_max)
    p[inside], q[inside] = large_n_point(grid[inside], lambda0, params)
    return ContinuousDistribution(grid, p, q, params, "large_n", lambda0)


def _large_n_density_from_edge(ds, lambda0: float, params: LargeQParams):
    """Size density at distance ds above the lower support edge.

    Uses expm1/log1p for the strength variable so the (s - s_min)^(2 delta-1)
    edge region is evaluated without cancellation; needed by the
    normalization quadrature whose innermost nodes sit below float
    resolution of s itself.
    """
    ds = np.asarray(ds, dtype=float)
    two_d = 2 * params.delta
    c_pow = math.cos(math.pi * params.v / 2) ** two_d
    ratio = 2.0 * ds / c_pow
    y = np.expm1(-np.log1p(-ratio) / two_d) / lambda0
    jac = 2.0 / np.abs(_dressed_slope(y, lambda0, params))
    return jac * np.real(strength_density(y, 0.0, 0.0, params))


def large_n_norm(lambda0: float, params: LargeQParams, tol: float = 1e-9) -> float:
    """Integral of the large-N size density over its support.

    Integrates in s with the substitution s = s_min + w^(1/(2 delta)) to
    absorb the (s - s_min)^(2 delta - 1) edge singularity; equals 1 when the
    density, the support map and the Jacobian are mutually consistent.
    """
    s_min, s_max = size_support(params)
    two_d = 2 * params.delta
    w_max = (s_max - s_min) ** two_d

    def eval_fn(w, wt):
        ds = w ** (1.0 / two_d)
        ds = np.minimum(ds, (s_max - s_min) * (1.0 - 1e-14))
        p = _large_n_density_from_edge(ds, lambda0, params)
        jac = (1.0 / two_d) * w ** (1.0 / two_d - 1.0)
        return np.sum(wt * p * jac)

    val = converge_panels(eval_fn, graded_edges(w_max, 64), order=16, tol=tol,
                          max_rounds=10)
    return float(val)


# ---------------------------------------------------------------------------
# finite-N broadening
# ---------------------------------------------------------------------------

def _winding_two_point(z, params: LargeQParams):
    """Dressed two-point function at tau34 = beta/2, where a(T34) = 1."""
    two_d = 2 * params.delta
    c = math.cos(math.pi * params.v / 2) ** two_d
    return c * np.power(1.0 + np.asarray(z), -two_d)


def _gaussian_kernel(s_values, mean, var):
    """Complex Gaussian density in s, broadcasting (s, nodes)."""
    diff = s_values[:, None] - mean[None, :]
    expo = -diff * diff / (2.0 * var[None, :])
    max_re = float(np.max(np.real(expo)))
    if max_re > 600.0:
        raise NumericalError(
            f"finite-N kernel overflows (max exponent {max_re:.3g}); "
            "the complex Gaussian is ill-conditioned at this N")
    return np.exp(expo) / np.sqrt(2.0 * np.pi * var[None, :])


def default_finite_n_grid(params: LargeQParams, n: int,
                          points: int = 2001) -> np.ndarray:
    """Uniform s-grid covering the Gaussian-broadened support.

    Means lie in [s_min, 1/2]; padding by 7 standard deviations keeps the
    truncated mass below 1e-9.
    """
    s_min, _ = size_support(params)
    two_d = 2 * params.delta
    c = math.cos(math.pi * params.v / 2) ** two_d
    sigma_edge = math.sqrt((1.0 - c * c) / (4.0 * n))
    sigma_max = math.sqrt(1.0 / (4.0 * n))
    lo = min(0.0, s_min - 7.0 * sigma_edge)
    hi = max(1.0, 0.5 + 7.0 * sigma_max)
    return np.linspace(lo, hi, points)


def finite_n_distribution(t: float, params: LargeQParams, n: int,
                          s_grid: np.ndarray | None = None,
                          points: int = 2001,
                          tol: float = 1e-8) -> ContinuousDistribution:
    """Finite-N distributions on a full s-grid, one quadrature pass.

    Convolves the strength density with the broadening kernel
    exp(-(s - (1 - f)/2)^2 / (2 sigma^2)) / sqrt(2 pi sigma^2),
    sigma^2 = (1 - f^2)/(4N), where f is the dressed two-point function at
    strength lambda y.  P uses the standard contour (real lambda0); Q uses
    the winding contour (lambda rotated by exp(i kappa beta/4)), making the
    kernel complex.  Re sigma^2 > 0 is asserted at every node.
    """
    if n < 2:
        raise ValueError(f"need N >= 2, got {n}")
    lambda0 = params.lambda0(t, n)
    if s_grid is None:
        s_grid = default_finite_n_grid(params, n, points)
    else:
        s_grid = np.asarray(s_grid, dtype=float)
    rot = complex(np.exp(1j * params.kappa * params.beta / 4))

    def make_phi(lam):
        def phi(y):
            f = _winding_two_point(lam * y, params)
            var = (1.0 - f * f) / (4.0 * n)
            if np.any(np.real(var) <= 0.0):
                bad = y[np.real(var) <= 0.0][0]
                raise NumericalError(
                    f"Re sigma^2 <= 0 at strength y = {bad:.6g}")
            mean = (1.0 - f) / 2.0
            return _gaussian_kernel(s_grid, mean, var)
        return phi

    p = strength_weighted_integral(make_phi(lambda0), params, winding=False,
                                   tol=tol)
    q = strength_weighted_integral(make_phi(rot * lambda0), params,
                                   winding=True, tol=tol)
    return ContinuousDistribution(s_grid, np.real(p), np.asarray(q, complex),
                                  params, "finite_n", lambda0, t=t, n=n)


def finite_n_point(s: float, t: float, params: LargeQParams, n: int,
                   winding: bool = False, tol: float = 1e-9):
    """Single-point finite-N density, with the strength integral windowed.

    For large N the kernel is sharp in y; the integration window is taken
    where the kernel mean stays within 12 sigma of s, which keeps the node
    count modest even at N ~ 1e6.  Only the real size density is
    well-conditioned at very large N; the complex winding kernel grows
    exponentially there and raises NumericalError instead of degrading.
    """
    lambda0 = params.lambda0(t, n)
    lam = lambda0 * (complex(np.exp(1j * params.kappa * params.beta / 4))
                     if winding else 1.0)
    two_d = 2 * params.delta
    c = math.cos(math.pi * params.v / 2) ** two_d
    s_min, _ = size_support(params)
    sigma_max = math.sqrt(1.0 / (4.0 * n))
    a = 1.0 if winding else math.cos(math.pi * params.v / 2)
    y_hi_tail = 45.0 / a

    lo_s = max(s - 12.0 * sigma_max, s_min + 1e-15)
    hi_s = min(s + 12.0 * sigma_max, 0.5 - 1e-15)
    if hi_s <= s_min or lo_s >= 0.5:
        y_lo, y_hi = 0.0, y_hi_tail
    else:
        y_lo = strength_from_size(lo_s, lambda0, params) if lo_s > s_min else 0.0
        y_hi = (strength_from_size(hi_s, lambda0, params)
                if s + 12.0 * sigma_max < 0.5 else y_hi_tail)
    y_hi = min(max(y_hi, y_lo * (1 + 1e-9) + 1e-12), y_hi_tail)

    pref = c / math.gamma(two_d) / two_d

    def eval_fn(u, wt):
        y = u ** (1.0 / two_d)
        f = _winding_two_point(lam * y, params)
        var = (1.0 - f * f) / (4.0 * n)
        if np.any(np.real(var) <= 0.0):
            raise NumericalError("Re sigma^2 <= 0 inside the window")
        expo = -(s - (1.0 - f) / 2.0) ** 2 / (2.0 * var)
        if np.max(np.real(expo)) > 600.0:
            raise NumericalError("finite-N kernel overflows in the window")
        kern = np.exp(expo) / np.sqrt(2.0 * np.pi * var)
        return pref * np.sum(wt * np.exp(-a * y) * kern)

    u_lo, u_hi = y_lo ** two_d, y_hi ** two_d
    if u_lo <= 0.0:
        edges = graded_edges(u_hi, 64)
    else:
        edges = np.concatenate(([0.0], np.geomspace(max(u_lo * 1e-2, 1e-12 * u_hi),
                                                    u_hi, 96)))
    val = converge_panels(eval_fn, edges, order=16, tol=tol, max_rounds=10)
    return complex(val) if winding else float(np.real(val))


def winding_phase_asymptotic(s, t: float, params: LargeQParams, n: int):
    """Long-time winding phase, first order in the decaying propagator.

    arg Q ~ (2s - 1) (N / Gamma(2 delta)) (cos(pi v/2) e^{-kappa t})^{2 delta}
            [ sin(pi delta v) (kappa t - psi(2 delta) - 2 gamma_E)
              - (pi v / 2) cos(pi delta v) ].

    The formula is total; its accuracy is governed by
    asymptotic_validity_ratio, which callers should consult.
    """
    s = np.asarray(s, dtype=float)
    two_d = 2 * params.delta
    kt = params.kappa * t
    amp = (math.cos(math.pi * params.v / 2) * math.exp(-kt)) ** two_d \
        * n / math.gamma(two_d)
    bracket = math.sin(math.pi * params.delta * params.v) \
        * (kt - digamma(two_d) - 2 * _EULER_GAMMA) \
        - 0.5 * math.pi * params.v * math.cos(math.pi * params.delta * params.v)
    out = (2.0 * s - 1.0) * amp * bracket
    return out if out.ndim else float(out)


def asymptotic_validity_ratio(t: float, params: LargeQParams, n: int) -> float:
    """N (cos(pi v/2) e^{-kappa t})^{2 delta}; the expansion is good when << 1."""
    two_d = 2 * params.delta
    return n * (math.cos(math.pi * params.v / 2)
                * math.exp(-params.kappa * t)) ** two_d


def unwrap_phase(phase: np.ndarray) -> np.ndarray:
    """Continue a phase sequence by the nearest multiple of 2 pi, left-seeded."""
    return np.unwrap(np.asarray(phase, dtype=float))


def fit_winding(dist: ContinuousDistribution,
                window: tuple[float, float]) -> WindingFit:
    """Least-squares line through the unwrapped arg Q(s) on a window."""
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"empty window {window}")
    mask = (dist.s_grid >= lo) & (dist.s_grid <= hi)
    if int(np.count_nonzero(mask)) < 8:
        raise ValueError(f"need at least 8 grid points in the window, "
                         f"have {int(np.count_nonzero(mask))}")
    if np.any(dist.p[mask] <= 1e-12):
        raise ValueError("size density vanishes inside the fit window")
    s = dist.s_grid[mask]
    phase = unwrap_phase(np.angle(dist.q[mask]))
    design = np.vstack((np.ones_like(s), s)).T
    coef, *_ = np.linalg.lstsq(design, phase, rcond=None)
    resid = phase - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return WindingFit(intercept=float(coef[0]), slope=float(coef[1]),
                      fit_window=(float(lo), float(hi)), residual=rms)
