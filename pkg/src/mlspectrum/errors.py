"""Exception hierarchy shared by every module of the package."""


class BilliardError(Exception):
    """Base class for all errors raised by mlspectrum."""


class InvalidSpec(BilliardError, ValueError):
    """Domain description is malformed (bad kind, nonpositive radius, ...)."""


class NotStrictlyConvex(BilliardError):
    """Curvature of the boundary is not bounded away from zero.

    Attributes
    ----------
    theta : float
        Polar angle (radians) where the sampled curvature is smallest.
    kappa_min : float
        The smallest sampled curvature.
    """

    def __init__(self, theta, kappa_min):
        self.theta = float(theta)
        self.kappa_min = float(kappa_min)
        super().__init__(
            f"boundary is not strictly convex: min curvature {self.kappa_min:.6g} "
            f"at theta={self.theta:.6f}"
        )


class SingularSystem(BilliardError):
    """A pivot of a tridiagonal elimination fell below the threshold."""


class NotHyperbolic(BilliardError):
    """Monodromy has |trace| <= 2 (elliptic or parabolic orbit)."""


class DegenerateAbscissae(BilliardError):
    """Abscissae of a fit are (numerically) all equal."""


class DegenerateChord(BilliardError):
    """Both endpoints of a chord coincide."""


class GrazingOrbit(BilliardError):
    """Incidence angle lies outside the grazing guard."""


class TwistDegenerate(BilliardError):
    """Mixed second partial of the generating function vanishes."""


class NoConvergence(BilliardError):
    """An iterative solver ran out of iterations."""


class OrderingViolated(BilliardError):
    """Lifted configuration lost its strict cyclic order."""


class MonotonicityViolated(BilliardError):
    """Difference quotients of beta are not monotone (convexity broken)."""


class NonConvergent(BilliardError):
    """A sequence does not settle enough to extrapolate its limit."""


class InsufficientWindow(BilliardError):
    """Too few points above the precision floor to fit a rate."""
