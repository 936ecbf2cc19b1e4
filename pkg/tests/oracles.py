"""Independent finite-difference oracles shared by the unit and acceptance tests."""

import numpy as np

from mlspectrum.billiard import PhasePoint, chord, step


def chord_length(curve, s0, s1):
    p0, _, _ = curve.evaluate(s0)
    p1, _, _ = curve.evaluate(s1)
    return np.linalg.norm(p1 - p0, axis=-1)


def fd_chord_partials(curve, s0, s1, h=1e-4):
    """Central differences of the chord length built from boundary points only.

    Accepts arrays of endpoint pairs; returns rows ``d1, d2, d11, d12, d22``.
    """
    s0, s1 = np.asarray(s0, float), np.asarray(s1, float)
    offsets = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    f = {o: chord_length(curve, s0 + o[0] * h, s1 + o[1] * h) for o in offsets}
    d1 = (f[1, 0] - f[-1, 0]) / (2 * h)
    d2 = (f[0, 1] - f[0, -1]) / (2 * h)
    d11 = (f[1, 0] - 2 * f[0, 0] + f[-1, 0]) / h**2
    d22 = (f[0, 1] - 2 * f[0, 0] + f[0, -1]) / h**2
    d12 = (f[1, 1] - f[1, -1] - f[-1, 1] + f[-1, -1]) / (4 * h * h)
    return np.array([d1, d2, d11, d12, d22])


def analytic_chord_partials(curve, s0, s1):
    cd = chord(curve, s0, s1)
    return np.array([cd.d1, cd.d2, cd.d11, cd.d12, cd.d22], dtype=float)


def step_sr(curve, s, r):
    """The billiard map in ``(s, r = -cos phi)`` coordinates."""
    x = step(curve, PhasePoint(s, float(np.arccos(-r))))
    return np.array([x.s, x.r])


def fd_jacobian(curve, s, r, h=1e-6):
    """Central-difference Jacobian of the map in ``(s, r)``."""
    cols = []
    for e in (np.array([h, 0.0]), np.array([0.0, h])):
        cols.append((step_sr(curve, s + e[0], r + e[1]) - step_sr(curve, s - e[0], r - e[1])) / (2 * h))
    return np.stack(cols, axis=1)


def fd_monodromy(curve, s, r, n, h=1e-6):
    """Central-difference Jacobian of the ``n``-th iterate."""

    def it(z):
        for _ in range(n):
            z = step_sr(curve, *z)
        return z

    cols = []
    for e in (np.array([h, 0.0]), np.array([0.0, h])):
        z = np.array([s, r])
        cols.append((it(z + e) - it(z - e)) / (2 * h))
    return np.stack(cols, axis=1)


def rel_err(a, b, floor=1.0):
    """Relative error with an absolute floor for entries near zero."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.maximum(np.abs(b), floor)
