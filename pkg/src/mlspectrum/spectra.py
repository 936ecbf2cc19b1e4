"""
Marked length spectrum quantities.

``ml_max`` and ``beta`` at rationals, one-sided derivative of ``beta`` from
the right via the approximating rotation numbers ``Np/(Nq-1)``, the barrier
formula built on it, the convex conjugate ``alpha`` on a finite grid, and
closed forms for circular tables.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from . import numerics as nx
from .errors import MonotonicityViolated
from .geometry import BoundaryCurve, DomainSpec, build_domain
from .orbits import PeriodicOrbit, approximating_orbit, solve_periodic

CSV_HEADER = ("p", "q", "ml_max", "beta", "trace", "residue", "hyperbolic")


@dataclass(frozen=True)
class SpectrumEntry:
    ml_max: object
    beta: object
    trace: float
    residue: float
    hyperbolic: bool


@dataclass(frozen=True)
class SpectrumTable:
    """Spectrum values keyed by reduced fraction."""

    entries: dict
    precision: str = "double"

    def to_csv(self) -> str:
        digits = 32 if self.precision == "extended" else 17
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for frac in sorted(self.entries):
            e = self.entries[frac]
            w.writerow([
                frac.numerator,
                frac.denominator,
                _num(e.ml_max, digits),
                _num(e.beta, digits),
                _num(e.trace, 17),
                _num(e.residue, 17),
                "true" if e.hyperbolic else "false",
            ])
        return buf.getvalue()


@dataclass(frozen=True)
class CausticRecord:
    """Closed-form caustic data of a circular table."""

    omega: float
    radius: float
    length: float
    lazutkin_q: float


def _num(x, digits: int) -> str:
    if isinstance(x, nx.DD):
        return format(x.to_decimal(), f".{digits - 1}e")
    return format(float(x), f".{digits - 1}e")


def farey(q_max: int, upper: Fraction = Fraction(1, 2)) -> list[Fraction]:
    """Reduced fractions in ``(0, upper]`` with denominator at most ``q_max``."""
    out = {Fraction(p, q) for q in range(2, q_max + 1) for p in range(1, q) if Fraction(p, q) <= upper}
    return sorted(out)


# ----------------------------------------------------------------------------
# ML^max and beta
# ----------------------------------------------------------------------------

def ml_max(curve: BoundaryCurve, p: int, q: int, precision: str = "double", **kwargs):
    """Maximal perimeter of periodic orbits with rotation number ``p/q``."""
    return solve_periodic(curve, p, q, precision=precision, **kwargs).perimeter


def beta(curve: BoundaryCurve, p: int, q: int, precision: str = "double", **kwargs):
    """Minimal average action ``-ML^max(p/q) / q``."""
    return -ml_max(curve, p, q, precision, **kwargs) / q


def _entry(curve: BoundaryCurve, p: int, q: int, precision: str, seed: int) -> SpectrumEntry:
    o = solve_periodic(curve, p, q, precision=precision, seed=seed)
    return SpectrumEntry(o.perimeter, -o.perimeter / q, o.eigen.trace, o.eigen.residue, o.eigen.hyperbolic)


def _entry_worker(args):
    spec_dict, p, q, precision, seed = args
    return _entry(build_domain(DomainSpec.from_dict(spec_dict)), p, q, precision, seed)


def spectrum_table(curve: BoundaryCurve, fractions: Iterable[Fraction], precision: str = "double",
                   seed: int = 0, jobs: int = 1) -> SpectrumTable:
    """Evaluate the spectrum on a set of fractions, optionally in parallel."""
    fractions = sorted(set(Fraction(f) for f in fractions))
    if jobs > 1:
        args = [(curve.spec.to_dict(), f.numerator, f.denominator, precision, seed) for f in fractions]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_entry_worker, args))
    else:
        values = [_entry(curve, f.numerator, f.denominator, precision, seed) for f in fractions]
    return SpectrumTable(dict(zip(fractions, values)), precision)


# ----------------------------------------------------------------------------
# right derivative of beta and the barrier formula
# ----------------------------------------------------------------------------

def approximating_family(curve: BoundaryCurve, orbit: PeriodicOrbit, n_values: Iterable[int],
                         precision: str | None = None) -> dict[int, PeriodicOrbit]:
    """Orbits of rotation number ``Np/(Nq-1)`` for each ``N``, seeded in sequence."""
    out = {}
    prev = None
    for n in sorted(n_values):
        if orbit.eigen.hyperbolic:
            prev = approximating_orbit(curve, orbit, n, precision=precision, previous=prev)
        else:
            prev = solve_periodic(curve, n * orbit.p, n * orbit.q - 1, precision=precision or orbit.precision,
                                  starts=1)
        out[n] = prev
    return out


def difference_quotients(p: int, q: int, base_perimeter, perimeters: Mapping[int, object]) -> dict[int, object]:
    """``[beta(w_N) - beta(p/q)] / (w_N - p/q)`` with ``w_N = Np/(Nq-1)``.

    Simplifies exactly to ``((Nq - 1) L_{p/q} - q L_N) / p``, which avoids
    dividing by the small rotation-number gap.
    """
    return {n: ((n * q - 1) * base_perimeter - q * perimeters[n]) / p for n in sorted(perimeters)}


def beta_right_derivative(curve: BoundaryCurve, p: int, q: int, n_max: int, precision: str = "double",
                          orbit: PeriodicOrbit | None = None, family: Mapping[int, PeriodicOrbit] | None = None,
                          n_min: int = 2, return_details: bool = False):
    """Right derivative of ``beta`` at ``p/q`` from the approximating quotients.

    ``family`` maps ``N`` to orbits or directly to perimeters.
    Convexity of ``beta`` makes the quotients non-increasing in ``N``; a
    violation beyond rounding raises :class:`MonotonicityViolated`. Converged
    quotients are averaged; hyperbolic orbits converge geometrically and use
    Aitken's delta-squared, parabolic ones a polynomial in ``1/N``.
    """
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    if orbit is None:
        orbit = solve_periodic(curve, p, q, precision=precision)
    if family is None:
        family = approximating_family(curve, orbit, range(n_min, n_max + 1), precision)
    ns = sorted(n for n in family if n_min <= n <= n_max)
    quot = difference_quotients(p, q, orbit.perimeter, {n: getattr(family[n], "perimeter", family[n]) for n in ns})
    vals = np.array([float(quot[n]) for n in ns])
    eps = nx.eps(precision)
    L = curve.total_length
    for a, b in zip(ns[:-1], ns[1:]):
        slack = 1e3 * eps * b * q * L * q / p
        if vals[ns.index(b)] > vals[ns.index(a)] + slack:
            raise MonotonicityViolated(
                f"difference quotient increases from N={a} to N={b}: {vals[ns.index(a)]!r} -> {vals[ns.index(b)]!r}"
            )
    floor = 1e3 * eps * ns[-1] * q * L * q / p
    tail = np.abs(np.diff(vals[-3:]))
    if tail.size and np.all(tail <= floor):
        est = float(np.mean(vals[-3:]))
    elif orbit.eigen.hyperbolic and len(vals) >= 3:
        # geometric convergence: Aitken on the last triple above the floor
        d = np.diff(vals)
        above = [i for i in range(1, len(d)) if abs(d[i]) > floor]
        if above:
            i = above[-1]
            est = float(vals[i + 1] - d[i] ** 2 / (d[i] - d[i - 1]))
        else:
            est = float(vals[-1])
    else:
        est = nx.extrapolate_inverse_n(np.array(ns), vals)
    if return_details:
        return est, dict(zip(ns, vals))
    return est


def barrier_via_prop2(curve: BoundaryCurve, p: int, q: int, n_max: int, precision: str = "double",
                      orbit: PeriodicOrbit | None = None, family: Mapping[int, PeriodicOrbit] | None = None) -> float:
    """``(p/q) beta'_+(p/q) - beta(p/q)``."""
    if orbit is None:
        orbit = solve_periodic(curve, p, q, precision=precision)
    deriv = beta_right_derivative(curve, p, q, n_max, precision, orbit=orbit, family=family)
    return p / q * deriv + float(orbit.perimeter) / q


# ----------------------------------------------------------------------------
# alpha and circle closed forms
# ----------------------------------------------------------------------------

def alpha(c: float, grid: Mapping[Fraction, float] | None = None, curve: BoundaryCurve | None = None,
          fractions: Iterable[Fraction] | None = None, precision: str = "double") -> float:
    """Lower bound ``max_w (w c - beta(w))`` of ``alpha(c)`` over a grid.

    Pass either a precomputed ``{w: beta(w)}`` grid or a curve and fractions.
    """
    if grid is None:
        if curve is None or fractions is None:
            raise ValueError("alpha needs a beta grid or a curve with fractions")
        grid = {Fraction(f): float(beta(curve, Fraction(f).numerator, Fraction(f).denominator, precision))
                for f in fractions}
    return max(float(w) * c - float(b) for w, b in grid.items())


def circle_beta(omega: float, R: float = 1.0) -> float:
    return -2.0 * R * math.sin(math.pi * omega)


def circle_beta_prime(omega: float, R: float = 1.0) -> float:
    return -2.0 * math.pi * R * math.cos(math.pi * omega)


def circle_caustic(R: float, omega: float) -> CausticRecord:
    """Caustic of rotation number ``omega`` in a circle of radius ``R``.

    The Lazutkin invariant is evaluated by construction: from a boundary point
    ``P`` draw the two tangents to the caustic, touching it at ``A`` and
    ``B``, and subtract the caustic arc ``AB`` from ``|PA| + |PB|``.
    """
    if not (0 < omega <= 0.5):
        raise ValueError("omega must lie in (0, 1/2]")
    rc = R * math.cos(math.pi * omega)
    P = np.array([R, 0.0])
    half = math.acos(rc / R)
    A = rc * np.array([math.cos(half), math.sin(half)])
    B = rc * np.array([math.cos(half), -math.sin(half)])
    arc = rc * 2.0 * half
    q_val = float(np.linalg.norm(A - P) + np.linalg.norm(B - P) - arc)
    return CausticRecord(omega=omega, radius=rc, length=2.0 * math.pi * rc, lazutkin_q=q_val)
