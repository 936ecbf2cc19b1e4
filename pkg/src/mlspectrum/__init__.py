"""Aubry-Mather periodic orbits and marked length spectrum of convex billiards."""

from .billiard import PhasePoint, chord, jacobian, jacobian_inverse, lazutkin, step, unstep
from .errors import (
    BilliardError,
    DegenerateAbscissae,
    DegenerateChord,
    GrazingOrbit,
    InsufficientWindow,
    InvalidSpec,
    MonotonicityViolated,
    NoConvergence,
    NonConvergent,
    NotHyperbolic,
    NotStrictlyConvex,
    OrderingViolated,
    SingularSystem,
    TwistDegenerate,
)
from .geometry import BoundaryCurve, DomainSpec, build_domain, generic_domain
from .numerics import DD
from .orbits import (
    HeteroclinicSegment,
    PeriodicOrbit,
    approximating_orbit,
    monodromy,
    solve_heteroclinic,
    solve_periodic,
)
from .spectra import (
    alpha,
    barrier_via_prop2,
    beta,
    beta_right_derivative,
    circle_caustic,
    ml_max,
    spectrum_table,
)
from .verifier import (
    SweepReport,
    extract_limit,
    fit_rate,
    genericity,
    lazutkin_asymptotics,
    sweep,
    verify,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
