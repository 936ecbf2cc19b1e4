"""
Variational orbit solvers.

Periodic orbits of rotation number ``p/q`` are critical points of the
perimeter ``P(u) = sum l(u_i, u_{i+1})`` over lifted, strictly increasing
configurations with closure ``u_q = u_0 + p``. Coordinates are polar angles in
turns so the closure is exact in both working precisions. The maximal
(Aubry-Mather) orbit is found by a Levenberg-Marquardt ascent in double,
optionally polished by Newton steps whose gradient is evaluated in
double-double.

Pinned heteroclinic segments, the monodromy and its eigendata, and the
quadratic-form diagnostics ``W``, ``Z+-`` and ``C+-`` live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvals_banded

from . import numerics as nx
from .billiard import chord_theta, jacobian_from_partials, theta_to_arclength_partials
from .errors import NoConvergence, NotHyperbolic, OrderingViolated
from .geometry import BoundaryCurve

TWO_PI = 2.0 * np.pi
MAX_ITER = 200


# ----------------------------------------------------------------------------
# data types
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LiftedConfiguration:
    """Strictly increasing lifted configuration.

    Attributes
    ----------
    u : ndarray or DD
        Polar angles in turns.
    p : int
        Winding number: closure ``u_n = u_0 + p`` for periodic configurations.
    n : int
        Number of points (periodic) or chords (pinned segment).
    curve : BoundaryCurve
        Table the configuration lives on; used for arclength conversion.
    """

    u: object
    p: int
    n: int
    curve: BoundaryCurve = field(repr=False, compare=False)

    @property
    def s(self) -> np.ndarray:
        """Lifted arclengths (double)."""
        return self.curve.arclength_of_turn(nx.to_float(self.u))

    @property
    def u_float(self) -> np.ndarray:
        return np.asarray(nx.to_float(self.u), dtype=float)


@dataclass(frozen=True)
class Eigendata:
    """Spectral data of a monodromy matrix.

    ``lam`` is the eigenvalue of modulus < 1 (``nan`` when not hyperbolic);
    ``theta`` is the angle of the unstable unit eigenvector
    ``(cos theta, sin theta)`` and ``theta_stable`` parametrises the stable one
    as ``(sin theta_s, -cos theta_s)``.
    """

    lam: float
    theta: float
    theta_stable: float
    residue: float
    hyperbolic: bool
    trace: float


@dataclass(frozen=True)
class PeriodicOrbit:
    """Converged critical configuration of rotation number ``p/q``."""

    config: LiftedConfiguration
    p: int
    q: int
    perimeter: object
    residual: float
    precision: str
    monodromy: np.ndarray
    eigen: Eigendata
    candidates: tuple = ()

    @property
    def perimeter_float(self) -> float:
        return float(self.perimeter)

    def phases(self) -> np.ndarray:
        """Outgoing angles ``phi_i`` at each orbit point."""
        u = self.config.u_float
        ext = np.append(u, u[0] + self.p)
        cd = theta_to_arclength_partials(
            self.config.curve, ext[:-1], ext[1:], chord_theta(self.config.curve, ext[:-1], ext[1:], order=1)
        )
        return np.arccos(np.clip(-cd.d1, -1.0, 1.0))

    def to_dict(self) -> dict:
        fmt = _fmt(self.precision)
        s = self.config.s
        return {
            "p": self.p,
            "q": self.q,
            "points": [{"s": fmt(si), "phi": fmt(ph)} for si, ph in zip(s, self.phases())],
            "perimeter": fmt(self.perimeter),
            "residual": fmt(self.residual),
            "trace": fmt(self.eigen.trace),
            "lambda": fmt(self.eigen.lam),
            "residue": fmt(self.eigen.residue),
        }


@dataclass(frozen=True)
class HeteroclinicSegment:
    """Pinned maximiser of the truncated barrier functional.

    ``config.u`` lists the points ``z_{-Kq+1}, ..., z_{Mq}``; the two end
    points are the pins.
    """

    K: int
    M: int
    config: LiftedConfiguration
    barrier_value: object
    tail_decay: float
    stiffness: float
    residual: float
    center: float


def _fmt(precision):
    digits = 32 if precision == "extended" else 17

    def fmt(x):
        if isinstance(x, nx.DD):
            return format(x.to_decimal(), f".{digits - 1}e")
        x = float(x)
        if not math.isfinite(x):
            return repr(x)
        return format(x, f".{digits - 1}e")

    return fmt


# ----------------------------------------------------------------------------
# the action functional and its derivatives
# ----------------------------------------------------------------------------

class _Functional:
    """Sum of chord lengths over a lifted configuration.

    ``kind == "periodic"``: unknowns ``u_0..u_{n-1}`` with ``u_n = u_0 + p``.
    ``kind == "chain"``: unknowns are the interior of ``z_0..z_m`` with both
    ends pinned.
    """

    def __init__(self, curve: BoundaryCurve, kind: str, p: int = 0, pins=None):
        self.curve = curve
        self.kind = kind
        self.p = p
        self.pins = pins

    def points(self, x):
        if self.kind == "periodic":
            return nx.concatenate([x, x[0:1] + self.p])
        a, b = self.pins
        if isinstance(x, nx.DD):
            a, b = nx.DD(a), nx.DD(b)
        elif isinstance(a, nx.DD):
            a, b = a.to_float(), b.to_float()
        return nx.concatenate([a, x, b])

    def value(self, x):
        pts = self.points(x)
        return nx.total(chord_theta(self.curve, pts[:-1], pts[1:], order=1).l)

    def gradient(self, x):
        """Gradient in radians of polar angle, matching ``x``'s precision."""
        pts = self.points(x)
        cd = chord_theta(self.curve, pts[:-1], pts[1:], order=1)
        if self.kind == "periodic":
            l2 = nx.concatenate([cd.d2[-1:], cd.d2[:-1]])
            return l2 + cd.d1
        return cd.d2[:-1] + cd.d1[1:]

    def hessian(self, x):
        """``(diag, off)`` of the Hessian in radians (double)."""
        pts = np.asarray(nx.to_float(self.points(x)), dtype=float)
        cd = chord_theta(self.curve, pts[:-1], pts[1:], order=2)
        if self.kind == "periodic":
            diag = np.roll(cd.d22, 1) + cd.d11
            return diag, cd.d12
        return cd.d22[:-1] + cd.d11[1:], cd.d12[1:-1]

    def residual(self, x, grad=None) -> float:
        if grad is None:
            grad = self.gradient(x)
        sig, _ = self.curve.speed_theta(nx.to_float(x))
        return float(np.max(np.abs(np.asarray(nx.to_float(grad), dtype=float)) / sig))

    def solve(self, diag, off, rhs):
        if self.kind == "periodic":
            return nx.solve_cyclic_tridiagonal(nx.CyclicTridiagonal(diag, off), rhs, "double")
        return nx.solve_tridiagonal(diag, off, rhs, "double")

    def ordered(self, x) -> bool:
        pts = np.asarray(nx.to_float(self.points(x)), dtype=float)
        return bool(np.all(np.diff(pts) > 0))


def _limit_step(fn: _Functional, x, du):
    gaps = np.diff(np.asarray(fn.points(x), dtype=float))
    limit = 0.5 * float(np.min(gaps))
    big = float(np.max(np.abs(du)))
    return du * (limit / big) if big > limit else du


def _ascend(fn: _Functional, x0: np.ndarray, tol: float, method: str = "maximize",
            max_iter: int = MAX_ITER):
    """Levenberg-Marquardt ascent (or damped Newton) in double precision.

    Returns the final configuration and its residual; the caller decides
    whether the residual is acceptable.
    """
    x = np.asarray(x0, dtype=float).copy()
    if not fn.ordered(x):
        raise OrderingViolated("initial configuration is not strictly increasing")
    val = fn.value(x)
    g = fn.gradient(x)
    res = fn.residual(x, g)
    gnorm = float(np.max(np.abs(g)))
    mu = 0.0
    stall = 0
    for _ in range(max_iter):
        if res <= tol:
            break
        diag, off = fn.hessian(x)
        scale = max(float(np.max(np.abs(diag))), 1.0)
        trial = None
        if method == "maximize":
            for _attempt in range(40):
                try:
                    step = fn.solve(-diag + mu, -off, g)
                except nx.SingularSystem:
                    mu = max(10.0 * mu, 1e-8 * scale)
                    continue
                xn = x + _limit_step(fn, x, step / TWO_PI)
                if fn.ordered(xn):
                    vn, gn = fn.value(xn), fn.gradient(xn)
                    gnn = float(np.max(np.abs(gn)))
                    slack = 16 * nx.EPS_DOUBLE * abs(val)
                    if vn > val or (vn >= val - slack and gnn < gnorm):
                        trial = (xn, vn, gn, gnn)
                        break
                mu = max(10.0 * mu, 1e-6 * scale)
            mu = mu / 10.0 if mu > 1e-12 * scale else 0.0
        else:
            try:
                step = fn.solve(diag, off, -g)
            except nx.SingularSystem as exc:
                raise NoConvergence("singular Hessian in Newton iteration") from exc
            du = _limit_step(fn, x, step / TWO_PI)
            for _attempt in range(30):
                xn = x + du
                if fn.ordered(xn):
                    gn = fn.gradient(xn)
                    gnn = float(np.max(np.abs(gn)))
                    if gnn < gnorm:
                        trial = (xn, fn.value(xn), gn, gnn)
                        break
                du = 0.5 * du
        if trial is None:
            stall += 1
            if stall >= 3:
                break
            continue
        progress = trial[3] < 0.9 * gnorm
        x, val, g, gnorm = trial
        res = fn.residual(x, g)
        stall = 0 if progress else stall + 1
        if stall >= 6:
            break
    return x, res


def _polish(fn: _Functional, x: np.ndarray, tol: float, max_iter: int = 12):
    """Newton steps with double-double gradient and double Hessian."""
    xd = nx.DD(np.asarray(x, dtype=float))
    g = fn.gradient(xd)
    res = fn.residual(xd, g)
    for _ in range(max_iter):
        if res <= tol:
            break
        diag, off = fn.hessian(xd)
        rhs = -np.asarray(g.to_float(), dtype=float)
        try:
            step = fn.solve(diag, off, rhs)
        except nx.SingularSystem:
            # symmetric tables have a free rotation mode the gradient does not see
            shift = 1e-10 * max(float(np.max(np.abs(diag))), 1.0)
            step = fn.solve(diag - shift, off, rhs)
        xn = xd + step / TWO_PI
        gn = fn.gradient(xn)
        rn = fn.residual(xn, gn)
        if not rn < res:
            break
        xd, g, res = xn, gn, rn
    return xd, res


def periodic_tolerance(curve: BoundaryCurve, precision: str) -> float:
    """Critical-equation tolerance ``10 eps L`` at working precision."""
    return 10.0 * nx.eps(precision) * curve.total_length


# ----------------------------------------------------------------------------
# periodic orbits
# ----------------------------------------------------------------------------

def _check_pq(p: int, q: int):
    if not (isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer))):
        raise ValueError("p and q must be integers")
    if q < 2 or not (0 < p < q):
        raise ValueError(f"rotation number {p}/{q} must lie in (0, 1) with q >= 2")
    if math.gcd(int(p), int(q)) != 1:
        raise ValueError("p/q not in lowest terms")


def _canonical(u: np.ndarray, p: int):
    """Rotate indices so the first point has the smallest reduced angle."""
    n = len(u)
    red = np.mod(u, 1.0)
    j = int(np.argmin(red))
    shift = math.floor(u[j])
    ext = np.concatenate([u, u + p])
    return ext[j: j + n] - shift, j


def _same_orbit(u: np.ndarray, v: np.ndarray, tol: float = 1e-7) -> bool:
    a = np.mod(np.asarray(u, dtype=float), 1.0)
    b = np.mod(np.asarray(v, dtype=float), 1.0)
    if len(a) != len(b):
        return False
    # circular distance to the nearest point of the other orbit
    d = np.abs(a[:, None] - b[None, :])
    d = np.minimum(d, 1.0 - d).min(axis=1)
    return bool(np.max(d) < tol)


def _equal_arclength_start(curve: BoundaryCurve, p: int, q: int, phase: float) -> np.ndarray:
    L = curve.total_length
    s = (phase + np.arange(q) * p / q) * L
    return curve.turn_of_arclength(s)


def _finish_periodic(curve, u, p, q, precision, candidates=()):
    fn = _Functional(curve, "periodic", p)
    if isinstance(u, nx.DD):
        res = fn.residual(u)
    else:
        res = fn.residual(np.asarray(u, dtype=float))
    perimeter = fn.value(u)
    config = LiftedConfiguration(u, p, q, curve)
    lam, growth = monodromy_of_turns(curve, config.u_float, p, return_growth=True)
    det_tol = max(1e-8, 1e3 * nx.EPS_DOUBLE * q * growth**2)
    return PeriodicOrbit(
        config=config,
        p=p,
        q=q,
        perimeter=perimeter,
        residual=res,
        precision=precision,
        monodromy=lam,
        eigen=eigendata(lam, det_tol),
        candidates=tuple(candidates),
    )


def solve_periodic(curve: BoundaryCurve, p: int, q: int, init: LiftedConfiguration | np.ndarray | None = None,
                   precision: str = "double", starts: int = 8, seed: int = 0,
                   method: str = "maximize") -> PeriodicOrbit:
    """Maximal-perimeter periodic orbit of rotation number ``p/q``.

    Parameters
    ----------
    curve : BoundaryCurve
    p, q : int
        Coprime, ``0 < p < q``.
    init : LiftedConfiguration or array, optional
        Initial configuration (turns). Disables multi-start.
    precision : {"double", "extended"}
    starts : int
        Number of uniformly shifted initial phases.
    seed : int
        Seeds a small jitter of the initial phases.
    method : {"maximize", "newton"}
        ``"maximize"`` ascends the perimeter; ``"newton"`` converges to the
        critical configuration nearest each start (used for diagnostics).

    Raises
    ------
    ValueError
        If ``p/q`` is not reduced or outside ``(0, 1)``.
    NoConvergence
        If no start reaches the critical-equation tolerance.
    """
    if precision not in nx.PRECISIONS:
        raise ValueError(f"unknown precision {precision!r}")
    _check_pq(p, q)
    fn = _Functional(curve, "periodic", p)
    tol_d = periodic_tolerance(curve, "double")
    if init is not None:
        u0 = init.u_float if isinstance(init, LiftedConfiguration) else np.asarray(nx.to_float(init), dtype=float)
        if len(u0) != q:
            raise ValueError(f"initial configuration has {len(u0)} points, expected {q}")
        inits = [u0]
    else:
        rng = np.random.default_rng(seed)
        jitter = rng.uniform(-0.05, 0.05, size=starts) / (starts * q)
        inits = [_equal_arclength_start(curve, p, q, k / (starts * q) + jitter[k]) for k in range(starts)]

    results = []
    for x0 in inits:
        try:
            x, res = _ascend(fn, x0, tol_d, method=method)
        except OrderingViolated:
            continue
        if res > 1e3 * tol_d:
            continue
        x, _ = _canonical(x, p)
        results.append((float(fn.value(x)), x, res))
    if not results:
        raise NoConvergence(f"no start converged for p/q = {p}/{q}")
    best_val = max(r[0] for r in results)
    ties = [r for r in results if r[0] >= best_val - 1e-13 * abs(best_val)]
    ties.sort(key=lambda r: float(np.mod(r[1][0], 1.0)))
    _, x, res = ties[0]
    candidates = tuple((r[0], tuple(r[1])) for r in results)

    if res > tol_d:
        # the double floor can sit slightly above 10 eps L for long orbits
        if res > 1e2 * tol_d:
            raise NoConvergence(f"residual {res:.3e} above tolerance {tol_d:.3e}")
    if precision == "extended":
        xd, res = _polish(fn, x, periodic_tolerance(curve, "extended"))
        return _finish_periodic(curve, xd, p, q, precision, candidates)
    return _finish_periodic(curve, x, p, q, precision, candidates)


def distinct_candidates(orbit: PeriodicOrbit):
    """Geometrically distinct critical orbits found by the multi-start.

    Returns a list of ``(perimeter, u)`` sorted by decreasing perimeter.
    """
    out = []
    for val, u in sorted(orbit.candidates, key=lambda c: -c[0]):
        u = np.asarray(u)
        if not any(_same_orbit(u, v) for _, v in out):
            out.append((val, u))
    return out


# ----------------------------------------------------------------------------
# monodromy and eigendata
# ----------------------------------------------------------------------------

def _arclength_partials_along(curve, u: np.ndarray, p: int):
    ext = np.append(u, u[0] + p)
    cd = chord_theta(curve, ext[:-1], ext[1:], order=2)
    return theta_to_arclength_partials(curve, ext[:-1], ext[1:], cd)


def jacobians_along(curve: BoundaryCurve, u: np.ndarray, p: int) -> list[np.ndarray]:
    """``Df`` at each point of a periodic configuration (arclength coordinates)."""
    cd = _arclength_partials_along(curve, np.asarray(u, dtype=float), p)
    return [jacobian_from_partials(a, b, c) for a, b, c in zip(cd.d11, cd.d12, cd.d22)]


def monodromy_of_turns(curve: BoundaryCurve, u: np.ndarray, p: int, base: int = 0,
                       return_growth: bool = False):
    """Monodromy product; optionally also the largest partial-product norm.

    The growth bounds the rounding in ``det``, which is ``O(eps q growth^2)``.
    """
    jac = jacobians_along(curve, u, p)
    q = len(jac)
    m = np.eye(2)
    growth = 1.0
    for k in range(q):
        m = jac[(base + k) % q] @ m
        growth = max(growth, float(np.max(np.abs(m))))
    if return_growth:
        return m, growth
    return m


def monodromy(curve: BoundaryCurve, orbit: PeriodicOrbit, base: int = 0) -> np.ndarray:
    """``Df^q`` at orbit point ``base`` as a product of single-bounce Jacobians."""
    return monodromy_of_turns(curve, orbit.config.u_float, orbit.p, base)


def eigendata(lam: np.ndarray, det_tol: float = 1e-8) -> Eigendata:
    """Eigenvalue below one, eigen-directions and residue of a monodromy.

    The residue ``(2 - tr)/4`` is always returned; non-hyperbolic matrices
    carry ``hyperbolic=False`` and ``nan`` spectral fields.
    """
    lam = np.asarray(lam, dtype=float)
    tr = float(lam[0, 0] + lam[1, 1])
    residue = (2.0 - tr) / 4.0
    try:
        small, _, v_s, v_u = nx.eigen2(lam, det_tol)
    except NotHyperbolic:
        return Eigendata(float("nan"), float("nan"), float("nan"), residue, False, tr)
    theta_u = float(np.arctan2(v_u[1], v_u[0]))
    theta_s = float(np.arctan2(v_s[0], -v_s[1]))
    return Eigendata(float(small), theta_u, theta_s, residue, True, tr)


# ----------------------------------------------------------------------------
# quadratic-form diagnostics
# ----------------------------------------------------------------------------

def w_matrix(curve: BoundaryCurve, orbit: PeriodicOrbit, base: int = 0) -> np.ndarray:
    """Symmetric ``(q+1) x (q+1)`` band matrix of second partials of ``h``.

    Built on the points ``x_base, ..., x_{base+q}`` of the orbit.
    """
    q = orbit.q
    cd = _arclength_partials_along(curve, orbit.config.u_float, orbit.p)
    idx = [(base + k) % q for k in range(q)]
    h11 = -cd.d11[idx]
    h12 = -cd.d12[idx]
    h22 = -cd.d22[idx]
    w = np.zeros((q + 1, q + 1))
    for k in range(q):
        w[k, k] += h11[k]
        w[k + 1, k + 1] += h22[k]
        w[k, k + 1] = w[k + 1, k] = h12[k]
    return w


def _z_from_jacobians(jacs, v0: np.ndarray, z0: float) -> np.ndarray:
    z = [z0]
    v = np.asarray(v0, dtype=float)
    for j in jacs:
        v = j @ v
        z.append(float(v[0]))
    return np.array(z)


def z_vectors(curve: BoundaryCurve, orbit: PeriodicOrbit, theta=None, base: int = 0):
    """Linearised displacement profiles ``Z+`` and ``Z-`` over one period.

    Parameters
    ----------
    theta : float, (float, float) or None
        ``theta`` for both vectors, a ``(theta_stable, theta_unstable)`` pair,
        or ``None`` to use the eigendata of the monodromy at ``base``.

    Returns
    -------
    z_plus, z_minus : ndarray, shape (q+1,)
        ``z_plus`` starts at ``sin theta_s`` and follows
        ``(sin theta_s, -cos theta_s)``; ``z_minus`` starts at
        ``-cos theta_u`` and follows ``-(cos theta_u, sin theta_u)``.
    """
    if theta is None:
        eig = eigendata(monodromy(curve, orbit, base))
        if not eig.hyperbolic:
            raise NotHyperbolic("orbit is not hyperbolic")
        th_s, th_u = eig.theta_stable, eig.theta
    elif np.ndim(theta) == 0:
        th_s = th_u = float(theta)
    else:
        th_s, th_u = (float(t) for t in theta)
    jac = jacobians_along(curve, orbit.config.u_float, orbit.p)
    q = orbit.q
    seq = [jac[(base + k) % q] for k in range(q)]
    zp = _z_from_jacobians(seq, np.array([np.sin(th_s), -np.cos(th_s)]), np.sin(th_s))
    zm = _z_from_jacobians(seq, -np.array([np.cos(th_u), np.sin(th_u)]), -np.cos(th_u))
    return zp, zm


def c_coefficients(w: np.ndarray, z_plus: np.ndarray, z_minus: np.ndarray) -> tuple[float, float]:
    """``C+- = (1/2) Z+- W Z+-^T``."""
    return 0.5 * float(z_plus @ w @ z_plus), 0.5 * float(z_minus @ w @ z_minus)


# ----------------------------------------------------------------------------
# heteroclinic segments
# ----------------------------------------------------------------------------

def _lifted_point(u, p: int, q: int, i: int):
    k, r = divmod(i, q)
    return u[r] + k * p


def _smooth_step(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def _heteroclinic_seed(orbit: PeriodicOrbit, K: int, M: int, center: float, rate: float) -> np.ndarray:
    u = orbit.config.u_float
    p, q = orbit.p, orbit.q
    idx = np.arange(-K * q + 2, M * q)
    x = np.array([_lifted_point(u, p, q, int(i)) for i in idx])
    x1 = np.array([_lifted_point(u, p, q, int(i) + 1) for i in idx])
    return x + _smooth_step(rate * (idx - center)) * (x1 - x)


def _tail_decay(orbit: PeriodicOrbit, K: int, M: int, z, precision: str) -> float:
    """Geometric decay per period of the segment's distance to its two tails."""
    u = orbit.config.u if precision == "extended" else orbit.config.u_float
    if precision == "extended" and not isinstance(u, nx.DD):
        u = nx.DD(np.asarray(u, dtype=float))
    if precision != "extended":
        z = np.asarray(nx.to_float(z), dtype=float)
    p, q = orbit.p, orbit.q
    idx = range(-K * q + 1, M * q + 1)
    past = nx.concatenate([_lifted_point(u, p, q, i) for i in idx])
    future = nx.concatenate([_lifted_point(u, p, q, i + 1) for i in idx])
    dev_past = np.abs(np.asarray(nx.to_float(z - past), dtype=float))
    dev_future = np.abs(np.asarray(nx.to_float(z - future), dtype=float))
    floor = 1e3 * nx.eps(precision) * (K + M) * q
    # the transition is where the segment is far from both tails
    c = int(np.argmax(np.minimum(dev_past, dev_future)))
    n = len(dev_past)
    xs, ys = [], []
    for dev, direction in ((dev_past, -1), (dev_future, 1)):
        px, py = [], []
        k = 1
        while True:
            lo = c + direction * k * q
            hi = lo + direction * q
            if direction < 0:
                lo, hi = hi + 1, lo + 1
            # drop the period touching the pin
            if lo < q or hi > n - q:
                break
            block = float(np.max(dev[lo:hi]))
            if block > floor:
                px.append(k)
                py.append(np.log(block))
            k += 1
        if len(px) >= 2:
            xs.append(np.array(px, float) - np.mean(px))
            ys.append(np.array(py) - np.mean(py))
    if not xs or sum(len(x) for x in xs) < 3:
        return float("nan")
    slope, _, _ = nx.linear_fit(np.concatenate(xs), np.concatenate(ys))
    return float(np.exp(slope))


def solve_heteroclinic(curve: BoundaryCurve, orbit: PeriodicOrbit, K: int, M: int,
                       precision: str | None = None, centers=None,
                       min_window: int = 3) -> HeteroclinicSegment:
    """Pinned barrier maximiser between the orbit and its unit shift.

    Maximises ``sum_{i=-Kq+1}^{Mq-1} l(z_i, z_{i+1})`` with
    ``z_{-Kq+1} = x_{-Kq+1}`` and ``z_{Mq} = x_{Mq+1}`` held fixed, and
    reports ``B(K, M) = (K + M) L_{p/q} - sum l``.

    Raises
    ------
    NotHyperbolic
        If the periodic orbit is not hyperbolic.
    NoConvergence
        If no seed converges.
    """
    if not orbit.eigen.hyperbolic:
        raise NotHyperbolic("heteroclinic segments need a hyperbolic periodic orbit")
    if K < min_window or M < min_window:
        raise ValueError(f"window (K, M) = ({K}, {M}) below minimum {min_window}")
    precision = precision or orbit.precision
    p, q = orbit.p, orbit.q
    u_orb = orbit.config.u
    first = _lifted_point(u_orb, p, q, -K * q + 1)
    last = _lifted_point(u_orb, p, q, M * q + 1)
    fn = _Functional(curve, "chain", pins=(first, last))
    tol_d = periodic_tolerance(curve, "double")
    rate = abs(math.log(abs(orbit.eigen.lam))) / q
    if centers is None:
        centers = np.arange(-q, 2 * q, 0.25)
    found = []
    for c in centers:
        x0 = _heteroclinic_seed(orbit, K, M, float(c), rate)
        try:
            x, res = _ascend(fn, x0, tol_d)
        except OrderingViolated:
            continue
        if res > 1e3 * tol_d:
            continue
        if any(np.max(np.abs(x - y)) < 1e-9 for _, y, _, _ in found):
            continue
        found.append((float(c), x, res, fn.value(x)))
    if not found:
        raise NoConvergence("no heteroclinic seed converged")
    if precision == "extended":
        # near-ties between seeds are only resolvable at the working precision
        polished = []
        for c, x, _, _ in found:
            xd, rd = _polish(fn, x, periodic_tolerance(curve, "extended"))
            polished.append((c, xd, rd, fn.value(xd)))
        found = polished
        period_len = orbit.perimeter if isinstance(orbit.perimeter, nx.DD) else nx.DD(orbit.perimeter)
    else:
        period_len = float(orbit.perimeter)
    best = found[0]
    for cand in found[1:]:
        if bool(cand[3] > best[3]):
            best = cand
    center, x, res, _ = best
    total = fn.value(x)
    barrier = period_len * (K + M) - total
    z_all = fn.points(x)
    diag, off = fn.hessian(x)
    band = np.zeros((2, len(diag)))
    band[0] = -diag
    band[1, :-1] = -off

    stiffness = float(np.min(eigvals_banded(band, lower=True)))
    config = LiftedConfiguration(z_all, (K + M) * p, (K + M) * q - 1, curve)
    return HeteroclinicSegment(
        K=K,
        M=M,
        config=config,
        barrier_value=barrier,
        tail_decay=_tail_decay(orbit, K, M, z_all, precision),
        stiffness=stiffness,
        residual=res,
        center=center,
    )


# ----------------------------------------------------------------------------
# approximating orbits of rotation number Np / (Nq - 1)
# ----------------------------------------------------------------------------

def splice_period(u: np.ndarray, p_big: int, orbit: PeriodicOrbit) -> np.ndarray:
    """Insert one period of the ``p/q`` orbit where ``u`` is most periodic."""
    q, p = orbit.q, orbit.p
    n = len(u)
    ext = np.concatenate([u, u[:q] + p_big])
    dev = np.abs(ext[q: q + n] - ext[:n] - p)
    a = int(np.argmin(dev))
    # indices a-q+1..a shifted by one period, cyclically
    block = np.array([u[(a - q + 1 + k) % n] + ((a - q + 1 + k) // n) * p_big for k in range(q)]) + p
    return np.concatenate([u[: a + 1], block, u[a + 1:] + p])


def approximating_orbit(curve: BoundaryCurve, orbit: PeriodicOrbit, N: int,
                        precision: str | None = None, previous: PeriodicOrbit | None = None) -> PeriodicOrbit:
    """Maximal orbit of rotation number ``Np/(Nq-1)`` tracked from ``orbit``.

    Seeds are the pinned heteroclinic of window ``N`` with its pins identified
    and, when given, ``previous`` with one extra period spliced in. The seed
    giving the larger converged perimeter wins.
    """
    precision = precision or orbit.precision
    p, q = orbit.p, orbit.q
    P, Q = N * p, N * q - 1
    seeds = []
    if orbit.eigen.hyperbolic:
        K = N // 2
        M = N - K
        try:
            seg = solve_heteroclinic(curve, orbit, K, M, precision="double", min_window=1)
            z = np.asarray(nx.to_float(seg.config.u), dtype=float)
            seeds.append(z[:-1])
        except (NoConvergence, OrderingViolated):
            pass
    if previous is not None and previous.q == Q - q:
        seeds.append(splice_period(previous.config.u_float, previous.p, orbit))
    if not seeds:
        return solve_periodic(curve, P, Q, precision=precision, starts=1)
    best = None
    for s in seeds:
        try:
            o = solve_periodic(curve, P, Q, init=s, precision="double")
        except (NoConvergence, OrderingViolated):
            continue
        if best is None or o.perimeter_float > best.perimeter_float:
            best = o
    if best is None:
        raise NoConvergence(f"no seed converged for {P}/{Q}")
    if precision == "extended":
        return solve_periodic(curve, P, Q, init=best.config.u_float, precision="extended")
    return best
