"""
The billiard map, chord-length generating function and its derivatives.

Phase space coordinates are ``(s, phi)``: boundary arclength and the angle
between the outgoing ray and the positive tangent. The symplectic momentum is
``r = -cos(phi)``, which is the convention under which the generating function
``h = -l`` yields ``r = -d1 h`` and ``r' = d2 h`` with a positive twist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import numerics as nx
from .errors import DegenerateChord, GrazingOrbit, NoConvergence, TwistDegenerate
from .geometry import BoundaryCurve

GRAZING_GUARD = 1e-8
_SCAN_CELLS = 64


@dataclass(frozen=True)
class PhasePoint:
    """Point ``(s, phi)`` of the open phase cylinder."""

    s: float
    phi: float

    @property
    def r(self) -> float:
        """Momentum conjugate to ``s`` (``-cos phi``)."""
        return -float(np.cos(self.phi))


class ChordData(NamedTuple):
    """Chord length and its partials with respect to the two endpoints."""

    l: object
    d1: object
    d2: object
    d11: object = None
    d12: object = None
    d22: object = None


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def chord_theta(curve: BoundaryCurve, u0, u1, order: int = 2) -> ChordData:
    """Chord length with partials in the polar angle (radians).

    ``u0`` and ``u1`` are polar angles in turns. Floats, float arrays and DD
    values are accepted; the result has the same representation.
    """
    f0 = curve.frame_theta(u0, order=order)
    f1 = curve.frame_theta(u1, order=order)
    d = (f1[0][0] - f0[0][0], f1[0][1] - f0[0][1])
    length = nx.sqrt(_dot(d, d))
    if np.any(nx.to_float(length) <= 1e-10 * curve.total_length):
        raise DegenerateChord("chord endpoints coincide")
    e = (d[0] / length, d[1] / length)
    l1 = -_dot(f0[1], e)
    l2 = _dot(f1[1], e)
    if order < 2:
        return ChordData(length, l1, l2)
    c0 = _cross(f0[1], e)
    c1 = _cross(f1[1], e)
    l11 = -_dot(f0[2], e) + c0 * c0 / length
    l22 = _dot(f1[2], e) + c1 * c1 / length
    l12 = -(c0 * c1) / length
    return ChordData(length, l1, l2, l11, l12, l22)


def theta_to_arclength_partials(curve: BoundaryCurve, u0, u1, cd: ChordData) -> ChordData:
    """Convert polar-angle partials to arclength partials (double)."""
    sg0, dsg0 = curve.speed_theta(u0)
    sg1, dsg1 = curve.speed_theta(u1)
    l, t1, t2 = (nx.to_float(v) for v in cd[:3])
    d1 = t1 / sg0
    d2 = t2 / sg1
    if cd.d11 is None:
        return ChordData(l, d1, d2)
    t11, t12, t22 = (nx.to_float(v) for v in cd[3:])
    d11 = (t11 - t1 * dsg0 / sg0) / sg0**2
    d22 = (t22 - t2 * dsg1 / sg1) / sg1**2
    d12 = t12 / (sg0 * sg1)
    return ChordData(l, d1, d2, d11, d12, d22)


def chord(curve: BoundaryCurve, s, s_next) -> ChordData:
    """Chord length ``l(s, s')`` and its arclength partials through order two.

    Raises
    ------
    DegenerateChord
        If the endpoints coincide (``l <= 1e-10 L``).
    """
    u0 = curve.turn_of_arclength(s)
    u1 = curve.turn_of_arclength(s_next)
    return theta_to_arclength_partials(curve, u0, u1, chord_theta(curve, u0, u1))


# ----------------------------------------------------------------------------
# the map
# ----------------------------------------------------------------------------

def _chord_angle(curve, u0, pos0, tan0, du):
    """Angle between the tangent at ``u0`` and the chord to ``u0 + du``."""
    if min(du, 1.0 - du) < 1e-2:
        # short chord: difference the endpoints in double-double
        (x1, y1), _ = curve.frame_theta(nx.DD(u0) + du, order=1)
        (x0, y0), _ = curve.frame_theta(nx.DD(u0), order=1)
        d = (float(x1 - x0), float(y1 - y0))
    else:
        (x1, y1), _ = curve.frame_theta(u0 + du, order=1)
        d = (x1 - pos0[0], y1 - pos0[1])
    return np.arctan2(_cross(tan0, d), _dot(tan0, d))


def _step_turns(curve: BoundaryCurve, u0: float, phi: float):
    (x0, y0), (xt, yt) = curve.frame_theta(u0, order=1)
    norm = np.hypot(xt, yt)
    tan0 = (xt / norm, yt / norm)
    pos0 = (x0, y0)

    def g(du):
        return _chord_angle(curve, u0, pos0, tan0, du) - phi

    cells = np.arange(1, _SCAN_CELLS) / _SCAN_CELLS
    (xs, ys), _ = curve.frame_theta(u0 + cells, order=1)
    dx, dy = xs - x0, ys - y0
    vals = np.arctan2(_cross(tan0, (dx, dy)), _dot(tan0, (dx, dy))) - phi
    lo, hi = 1e-12, 1.0 - 1e-12
    above = np.nonzero(vals > 0)[0]
    if above.size:
        k = int(above[0])
        hi = cells[k]
        if k > 0:
            lo = cells[k - 1]
    else:
        lo = cells[-1]
    glo, ghi = g(lo), g(hi)
    if not (glo <= 0 <= ghi):
        raise NoConvergence("could not bracket the reflection point")
    try:
        du = brentq(g, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise NoConvergence(str(exc)) from exc
    u1 = u0 + du
    (x1, y1), (xt1, yt1) = curve.frame_theta(u1, order=1)
    n1 = np.hypot(xt1, yt1)
    tan1 = (xt1 / n1, yt1 / n1)
    d = (x1 - x0, y1 - y0)
    phi1 = float(np.arctan2(-_cross(tan1, d), _dot(tan1, d)))
    return u1, phi1


def step(curve: BoundaryCurve, x: PhasePoint, guard: float = GRAZING_GUARD) -> PhasePoint:
    """One bounce of the billiard map.

    The returned arclength is lifted: ``x.s < s' < x.s + L``.

    Raises
    ------
    GrazingOrbit
        If ``phi`` is within ``guard`` of 0 or pi.
    NoConvergence
        If the reflection point cannot be bracketed or located.
    """
    if not (guard < x.phi < np.pi - guard):
        raise GrazingOrbit(f"phi = {x.phi!r} outside ({guard}, pi - {guard})")
    u0 = float(curve.turn_of_arclength(x.s))
    u1, phi1 = _step_turns(curve, u0, x.phi)
    s1 = float(curve.arclength_of_turn(u1))
    # keep the lift anchored on the caller's s rather than the round trip
    s1 = x.s + (s1 - float(curve.arclength_of_turn(u0)))
    return PhasePoint(s1, phi1)


def unstep(curve: BoundaryCurve, x: PhasePoint, guard: float = GRAZING_GUARD) -> PhasePoint:
    """Inverse billiard map: time reversal conjugates ``step`` to its inverse."""
    back = step(curve, PhasePoint(x.s, np.pi - x.phi), guard)
    return PhasePoint(back.s - curve.total_length, np.pi - back.phi)


# ----------------------------------------------------------------------------
# linearisation
# ----------------------------------------------------------------------------

def jacobian_from_partials(l11, l12, l22) -> np.ndarray:
    """``Df`` in ``(s, r)`` coordinates from second partials of ``l`` (h = -l)."""
    h11, h12, h22 = -l11, -l12, -l22
    if abs(h12) <= 1e-10:
        raise TwistDegenerate(f"|d12 h| = {abs(h12):.3e} <= 1e-10")
    return np.array(
        [
            [-h11 / h12, -1.0 / h12],
            [h12 - h22 * h11 / h12, -h22 / h12],
        ]
    )


def jacobian_inverse_from_partials(l11, l12, l22) -> np.ndarray:
    h11, h12, h22 = -l11, -l12, -l22
    if abs(h12) <= 1e-10:
        raise TwistDegenerate(f"|d12 h| = {abs(h12):.3e} <= 1e-10")
    return np.array(
        [
            [-h22 / h12, 1.0 / h12],
            [h11 * h22 / h12 - h12, -h11 / h12],
        ]
    )


def jacobian(curve: BoundaryCurve, s, s_next) -> np.ndarray:
    """``Df(s, r)`` for the bounce from ``s`` to ``s_next``.

    Raises
    ------
    TwistDegenerate
        If ``|d12 h| <= 1e-10``.
    """
    cd = chord(curve, s, s_next)
    return jacobian_from_partials(float(cd.d11), float(cd.d12), float(cd.d22))


def jacobian_inverse(curve: BoundaryCurve, s, s_next) -> np.ndarray:
    """``Df^-1(s', r')`` for the same bounce."""
    cd = chord(curve, s, s_next)
    return jacobian_inverse_from_partials(float(cd.d11), float(cd.d12), float(cd.d22))


# ----------------------------------------------------------------------------
# Lazutkin coordinates
# ----------------------------------------------------------------------------

def lazutkin(curve: BoundaryCurve, x: PhasePoint) -> tuple[float, float]:
    """Lazutkin coordinates ``(x_L, y_L)`` of a phase point.

    ``x_L`` is reduced to ``[0, 1)``; ``y_L = 4 C^-1 rho^(1/3) sin(phi/2)``.
    """
    theta = float(curve.angle_of_arclength(x.s))
    xl = float(curve.lazutkin_x_of_angle(theta)) % 1.0
    kappa = float(curve.curvature_theta(theta))
    yl = 4.0 / curve.lazutkin_constant * kappa ** (-1.0 / 3.0) * np.sin(0.5 * x.phi)
    return xl, float(yl)
