"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its requested accuracy.

    Raised by quadrature drivers on non-convergence and by evaluators that
    detect an ill-conditioned regime (e.g. overflowing complex Gaussians).
    The message reports the achieved tolerance or the offending point.
    """
