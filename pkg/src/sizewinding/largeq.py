"""Large-q SYK model parameters, velocity solver, and scramblon vertex functions.

The closed forms implemented here describe a Majorana system with q-body
all-to-all random couplings in the limit N -> infinity followed by
q -> infinity, at inverse temperature beta.  Everything is parameterized by
the interaction dimension delta = 1/q and the thermal velocity v in (0, 1),
which solves v = (beta J / pi) cos(pi v / 2).

Two contour configurations enter: the standard one (both probe insertions at
imaginary time 0) and the winding one (one insertion shifted by beta/2).
The shift multiplies the scramblon propagator by the universal phase
exp(i kappa beta / 4) with kappa = 2 pi v / beta; that phase is the origin of
the winding of operator-size coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NumericalError
from .quadrature import converge_panels, graded_edges

VELOCITY_TOLERANCE = 1e-12

# exp() overflow threshold for float64 arguments
_EXP_ARG_MAX = 700.0


def velocity_tolerance(beta_j: float) -> float:
    """Enforceable residual tolerance for the velocity equation.

    The residual changes by about (1 + beta_j/2) * ulp(1) between adjacent
    floats of v, so for very strong coupling the nominal 1e-12 is below the
    representable floor; the tolerance is the larger of the two.
    """
    floor = 8.0 * math.ulp(1.0) * (1.0 + beta_j / 2.0)
    return max(VELOCITY_TOLERANCE, floor)


def velocity_residual(v: float, beta_j: float) -> float:
    """Residual of the velocity fixed-point equation v = (beta_j/pi) cos(pi v/2).

    Evaluated as sin(pi (1 - v)/2) so the strong-coupling end v -> 1 keeps
    full relative precision (cos alone loses ~|beta_j| * eps there).
    """
    return v - (beta_j / math.pi) * math.sin(math.pi * (1.0 - v) / 2)


def solve_velocity(beta_j: float) -> float:
    """Solve v = (beta_j / pi) cos(pi v / 2) for v in (0, 1).

    The residual is strictly increasing in v with opposite signs at the
    interval ends, so bisection brackets the unique root; a Newton polish
    brings the residual below 1e-12, or below the float-conditioning floor
    of velocity_tolerance() when beta_j is large enough that 1e-12 is not
    representable.
    """
    if not (isinstance(beta_j, (int, float)) and math.isfinite(beta_j)):
        raise ValueError(f"coupling beta*J must be finite, got {beta_j!r}")
    if beta_j <= 0:
        raise ValueError(f"coupling beta*J must be positive, got {beta_j}")
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if velocity_residual(mid, beta_j) < 0.0:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)
    for _ in range(60):
        step = velocity_residual(v, beta_j) / (
            1.0 + (beta_j / 2.0) * math.sin(math.pi * v / 2))
        v -= step
        if abs(step) < 1e-16:
            break
    v = min(max(v, 1e-300), 1.0 - 1e-17)
    if abs(velocity_residual(v, beta_j)) >= velocity_tolerance(beta_j):
        raise NumericalError(
            f"velocity solve stalled at residual {velocity_residual(v, beta_j):.3e}")
    return v


@dataclass(frozen=True)
class LargeQParams:
    """Model and thermal parameters of the large-q solution.

    ``prefactor_c`` is the scramblon prefactor C entering
    lambda0 = exp(kappa t)/C.  The theory only fixes it to be of order the
    system size, so it is left explicit: ``None`` means "use the Majorana
    count N when one is in scope, else 1".
    """

    delta: float
    v: float
    beta: float
    coupling_beta_j: float | None = None
    prefactor_c: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta <= 0.5:
            raise ValueError(f"delta must lie in (0, 1/2], got {self.delta}")
        if not 0.0 < self.v < 1.0:
            raise ValueError(f"velocity must lie in (0, 1), got {self.v}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.prefactor_c is not None and self.prefactor_c <= 0.0:
            raise ValueError(f"prefactor C must be positive, got {self.prefactor_c}")
        if self.coupling_beta_j is not None:
            res = velocity_residual(self.v, self.coupling_beta_j)
            if abs(res) >= velocity_tolerance(self.coupling_beta_j):
                raise ValueError(
                    f"(v, beta*J) inconsistent: residual {res:.3e}")
        # chaos bound kappa <= 2 pi / beta is equivalent to v <= 1
        assert self.kappa <= 2 * math.pi / self.beta * (1 + 1e-15)

    @classmethod
    def from_coupling(cls, delta: float, beta_j: float, beta: float,
                      prefactor_c: float | None = None) -> "LargeQParams":
        """Construct with v solved from the fixed-point equation."""
        v = solve_velocity(beta_j)
        return cls(delta=delta, v=v, beta=beta, coupling_beta_j=beta_j,
                   prefactor_c=prefactor_c)

    @property
    def q(self) -> float:
        return 1.0 / self.delta

    @property
    def kappa(self) -> float:
        """Lyapunov exponent kappa = 2 pi v / beta."""
        return 2 * math.pi * self.v / self.beta

    def resolved_c(self, n: int | None = None) -> float:
        if self.prefactor_c is not None:
            return self.prefactor_c
        return float(n) if n is not None else 1.0

    def lambda0(self, t: float, n: int | None = None) -> float:
        """Real scramblon propagator exp(kappa t) / C at time t."""
        arg = self.kappa * t - math.log(self.resolved_c(n))
        if arg > _EXP_ARG_MAX:
            raise OverflowError(
                f"kappa*t = {self.kappa * t:.3g} overflows the propagator")
        return math.exp(arg)

    def scrambling_time(self, n: int | None = None) -> float:
        """Time at which lambda0 reaches 1: log(C) / kappa."""
        return math.log(self.resolved_c(n)) / self.kappa


class ContourKind(Enum):
    """Imaginary-time configuration of the two probe insertions.

    STANDARD_SIZE puts both probe fermions at imaginary time 0 and produces
    the plain size distribution; WINDING_SIZE shifts one of them by beta/2,
    which rotates the scramblon propagator by exp(i kappa beta / 4) and
    produces the winding distribution.  The perturbed pair sits at beta/2 in
    both configurations.
    """

    STANDARD_SIZE = "standard"
    WINDING_SIZE = "winding"

    def tau12(self, beta: float) -> float:
        return 0.0 if self is ContourKind.STANDARD_SIZE else beta / 2

    def tau34(self, beta: float) -> float:
        return beta / 2

    def propagator_phase(self, params: LargeQParams) -> complex:
        if self is ContourKind.STANDARD_SIZE:
            return 1.0 + 0.0j
        return complex(np.exp(1j * params.kappa * params.beta / 4))


@dataclass(frozen=True)
class ScramblonPropagator:
    """Scramblon propagator lambda = phase * lambda0 at a fixed time."""

    lambda0: float
    phase: complex = field(default=1.0 + 0.0j)
    t: float = 0.0

    def __post_init__(self):
        if self.lambda0 < 0.0:
            raise ValueError(f"lambda0 must be non-negative, got {self.lambda0}")
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError(f"propagator phase must be unimodular, got {self.phase}")

    @property
    def value(self) -> complex:
        return self.phase * self.lambda0

    @classmethod
    def at_time(cls, params: LargeQParams, t: float, kind: ContourKind,
                n: int | None = None) -> "ScramblonPropagator":
        return cls(lambda0=params.lambda0(t, n),
                   phase=kind.propagator_phase(params), t=t)


def thermal_cosine(tau: float, t_offset: float, params: LargeQParams) -> complex:
    """cos(pi v (1/2 - i T / beta)) with T = t_offset - i tau.

    This is the decay-rate factor of the vertex functions; it equals
    cos(pi v / 2) at tau = 0 and 1 at tau = beta/2 (for t_offset = 0).
    """
    big_t = t_offset - 1j * tau
    out = np.cos(math.pi * params.v * (0.5 - 1j * big_t / params.beta))
    if abs(out.imag) < 1e-15 * max(1.0, abs(out.real)):
        out = complex(out.real)
    return complex(out)


def strength_density(y, tau12: float, t12: float, params: LargeQParams):
    """Retarded perturbation-strength density of a probe fermion.

    For the large-q model this is
    y^(2 delta - 1) cos^(2 delta)(pi v / 2) exp(-y a(T12)) / Gamma(2 delta)
    with a the thermal cosine at T12 = t12 - i tau12.  Accepts complex y on
    the principal branch; y = 0 is rejected because the power is singular
    there for delta < 1/2 (the singularity is integrable, so quadrature
    simply must not place a node at the origin).
    """
    y = np.asarray(y)
    if np.any(y == 0):
        raise ValueError("strength density is singular at y = 0; "
                         "evaluate only at y != 0")
    two_d = 2 * params.delta
    a = thermal_cosine(tau12, t12, params)
    pref = math.cos(math.pi * params.v / 2) ** two_d / math.gamma(two_d)
    out = np.power(y, two_d - 1.0) * pref * np.exp(-y * a)
    return out if out.ndim else out[()]


def dressed_two_point(z, tau34: float, t34: float, params: LargeQParams):
    """Advanced two-point function dressed by a perturbation of strength z.

    cos^(2 delta)(pi v / 2) * (a(T34) + z)^(-2 delta), principal branch.
    The base must stay off the negative real axis.
    """
    z = np.asarray(z)
    two_d = 2 * params.delta
    a = thermal_cosine(tau34, t34, params)
    base = a + z
    on_cut = (np.real(base) <= 0.0) & (np.abs(np.imag(base)) < 1e-300)
    if np.any(on_cut):
        bad = np.asarray(z)[on_cut].ravel()[0] if z.ndim else z[()]
        raise ValueError(
            f"dressed two-point function hit the branch cut: a + z = {a + bad}")
    out = math.cos(math.pi * params.v / 2) ** two_d * np.power(base, -two_d)
    return out if out.ndim else out[()]


def vertex_moment(m: int, tau12: float, t12: float, params: LargeQParams) -> complex:
    """m-th moment of the strength density (the m-scramblon vertex factor).

    Closed form: cos^(2 delta)(pi v/2) * Gamma(2 delta + m)/Gamma(2 delta)
    * a(T12)^-(2 delta + m).
    """
    if m < 0 or m != int(m):
        raise ValueError(f"moment order must be a non-negative integer, got {m}")
    two_d = 2 * params.delta
    a = thermal_cosine(tau12, t12, params)
    pref = math.cos(math.pi * params.v / 2) ** two_d
    ratio = math.gamma(two_d + m) / math.gamma(two_d)
    out = pref * ratio * np.power(a, -(two_d + m))
    return complex(out)


def strength_weighted_integral(phi, params: LargeQParams, winding: bool = False,
                               tol: float = 1e-11, poly_growth: float = 0.0,
                               order: int = 16, panels: int = 48,
                               max_rounds: int = 9):
    """Integral of strength_density(y, T12) * phi(y) over y in (0, inf).

    ``winding`` selects T12 = -i beta/2 (decay rate 1) versus T12 = 0
    (decay rate cos(pi v / 2)).  The substitution u = y^(2 delta) absorbs
    the y^(2 delta - 1) singularity exactly, and the upper cutoff is set so
    the exponential tail is below 1e-12 even with an extra polynomial factor
    y^poly_growth in phi.  phi may return an array whose last axis runs over
    the quadrature nodes.
    """
    two_d = 2 * params.delta
    a = 1.0 if winding else math.cos(math.pi * params.v / 2)
    y_max = (45.0 + 12.0 * max(poly_growth, 0.0)) / a
    u_max = y_max ** two_d
    pref = math.cos(math.pi * params.v / 2) ** two_d / math.gamma(two_d) / two_d

    def eval_fn(u, w):
        y = u ** (1.0 / two_d)
        return pref * np.sum(w * np.exp(-a * y) * phi(y), axis=-1)

    return converge_panels(eval_fn, graded_edges(u_max, panels), order=order,
                           tol=tol, max_rounds=max_rounds)


def otoc(prop: ScramblonPropagator, contour: ContourKind, params: LargeQParams,
         tol: float = 1e-11) -> complex:
    """Out-of-time-order correlator resummed over scramblon exchanges.

    Evaluates the integral of strength_density(y, T12) * dressed_two_point
    (lambda y, T34) with T12 and lambda fixed by the contour.  At lambda = 0
    this factorizes into the zeroth vertex moments.
    """
    lam = prop.value
    beta = params.beta
    winding = contour is ContourKind.WINDING_SIZE
    tau34 = contour.tau34(beta)

    def phi(y):
        return dressed_two_point(lam * y, tau34, 0.0, params)

    val = strength_weighted_integral(phi, params, winding=winding, tol=tol)
    return complex(val)
