"""
End-to-end checks of the two limits relating perimeters to the barrier.

For a rotation number ``p/q`` the sweep computes

    a_N = L(Np, Nq - 1) - N L(p, q),

which converges to ``-B`` (the minimal Peierls barrier). On generic tables
``a_N + B`` decays like ``C lam^N`` with parity-dependent ``C``, where ``lam``
is the stable eigenvalue of the monodromy. :func:`extract_limit` and
:func:`fit_rate` estimate both, and :func:`verify` cross-checks them against
the heteroclinic barrier and the monodromy.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .errors import BilliardError, InsufficientWindow, NonConvergent
from .geometry import BoundaryCurve
from .orbits import (
    HeteroclinicSegment,
    PeriodicOrbit,
    _same_orbit,
    approximating_orbit,
    distinct_candidates,
    solve_heteroclinic,
    solve_periodic,
)

FLOOR_FACTOR = 1e3


@dataclass
class SweepReport:
    """Perimeter differences ``a_N`` and everything fitted from them."""

    p: int
    q: int
    N_min: int
    N_max: int
    precision: str
    length: float
    a: dict = field(default_factory=dict)
    perimeters: dict = field(default_factory=dict)
    base_perimeter: object = None
    hyperbolic: bool = True
    lambda_monodromy: float = float("nan")
    B_est: object = None
    log_lambda_fit: float = float("nan")
    C_even: float = float("nan")
    C_odd: float = float("nan")
    fit_window: tuple = ()
    fit_residual: float = float("nan")
    gaps: tuple = ()

    def floor(self, n: int) -> float:
        """Smallest resolvable ``|a_N + B|`` at ``N``: ``1e3 eps N q L``."""
        return FLOOR_FACTOR * nx.eps(self.precision) * n * self.q * self.length

    @property
    def precision_floor(self) -> float:
        return self.floor(self.N_max)

    @classmethod
    def from_sequence(cls, a: dict, p: int = 1, q: int = 2, length: float = 1.0,
                      precision: str = "double", hyperbolic: bool = True) -> "SweepReport":
        ns = sorted(a)
        return cls(p, q, ns[0], ns[-1], precision, length, a=dict(a), hyperbolic=hyperbolic)


@dataclass(frozen=True)
class GenericityReport:
    unique_max: bool
    unique_margin: float
    hyperbolic: bool
    trace_margin: float
    transversal_hint: bool
    tail_decay: float
    stiffness: float
    C_nonzero: dict


@dataclass(frozen=True)
class LazutkinReport:
    slope_x: float
    slope_y: float
    exact_y: bool
    per_base: tuple


# ----------------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------------

def sweep(curve: BoundaryCurve, p: int, q: int, N_min: int, N_max: int, precision: str = "extended",
          orbit: PeriodicOrbit | None = None, seed: int = 0) -> SweepReport:
    """Compute ``a_N`` for ``N_min <= N <= N_max`` by continuation.

    Per-``N`` solver failures are recorded in ``gaps`` rather than raised.
    """
    if N_min < 2 or N_max < N_min:
        raise ValueError("need 2 <= N_min <= N_max")
    if orbit is None:
        orbit = solve_periodic(curve, p, q, precision=precision, seed=seed)
    lam = orbit.eigen.lam
    if precision == "double" and orbit.eigen.hyperbolic and N_max * abs(math.log(lam)) > 25:
        warnings.warn("double precision cannot resolve a_N + B at this N_max; use extended", stacklevel=2)
    report = SweepReport(p, q, N_min, N_max, precision, curve.total_length,
                         base_perimeter=orbit.perimeter, hyperbolic=orbit.eigen.hyperbolic,
                         lambda_monodromy=lam)
    prev_w = None
    prev = None
    gaps = []
    for n in range(N_min, N_max + 1):
        P, Q = n * p, n * q - 1
        assert math.gcd(P, Q) == 1
        w = P / Q
        assert prev_w is None or w < prev_w
        prev_w = w
        try:
            if orbit.eigen.hyperbolic:
                o = approximating_orbit(curve, orbit, n, precision=precision, previous=prev)
            else:
                o = solve_periodic(curve, P, Q, precision=precision, starts=1)
        except BilliardError:
            gaps.append(n)
            prev = None
            continue
        prev = o
        report.perimeters[n] = o.perimeter
        report.a[n] = o.perimeter - orbit.perimeter * n
    report.gaps = tuple(gaps)
    return report


# ----------------------------------------------------------------------------
# limit and rate
# ----------------------------------------------------------------------------

def extract_limit(report: SweepReport):
    """Estimate ``B = -lim a_N``.

    Hyperbolic sequences use Aitken's delta-squared on each parity (step 2),
    taking the latest triple whose differences clear the precision floor.
    Non-hyperbolic ones use a polynomial fit in ``1/N``.

    Raises
    ------
    NonConvergent
        If fewer than 5 values exist, or successive ratios do not settle.
    """
    ns = sorted(report.a)
    if len(ns) < 5:
        raise NonConvergent("need at least 5 values of a_N")
    a = report.a
    if not report.hyperbolic:
        return -nx.extrapolate_inverse_n(np.array(ns), [float(a[n]) for n in ns])
    estimate = None
    ratios = []
    for n in ns:
        if n + 4 not in a or n + 2 not in a:
            continue
        d1 = a[n + 2] - a[n]
        d2 = a[n + 4] - a[n + 2]
        f = report.floor(n + 4)
        if abs(float(d2)) <= f or abs(float(d1)) <= f:
            continue
        denom = d2 - d1
        estimate = a[n + 4] - d2 * d2 / denom
        ratios.append(float(d2) / float(d1))
    if estimate is None:
        # already converged below the floor: the last terms are the limit
        estimate = a[ns[-1]]
    elif len(ratios) >= 2:
        r0, r1 = ratios[-2], ratios[-1]
        if not (r0 * r1 > 0 and abs(r1 - r0) <= 0.5 * max(abs(r0), abs(r1))):
            raise NonConvergent(f"increment ratios not settling: {ratios[-3:]}")
    return -estimate


def fit_rate(report: SweepReport, B=None, min_per_parity: int = 4):
    """Fit ``log|a_N + B| = N log lam + c_parity`` on the resolvable window.

    Returns
    -------
    log_lam, C_even, C_odd : float
        Signed parity constants ``C = sign * exp(c_parity)``.

    Raises
    ------
    InsufficientWindow
        If fewer than ``min_per_parity`` points per parity clear the floor.
    """
    if B is None:
        B = report.B_est
    if B is None:
        raise ValueError("no barrier estimate supplied")
    window = []
    for n in sorted(report.a):
        y = report.a[n] + B
        if abs(float(y)) <= report.floor(n):
            break
        window.append((n, float(y)))
    parity = {0: [], 1: []}
    for n, y in window:
        parity[n % 2].append((n, y))
    if min(len(parity[0]), len(parity[1])) < min_per_parity:
        raise InsufficientWindow(
            f"only {len(parity[0])} even / {len(parity[1])} odd points above the precision floor"
        )
    xs, ys, stats = [], [], {}
    for k, pts in parity.items():
        n = np.array([t[0] for t in pts], float)
        ly = np.log(np.abs([t[1] for t in pts]))
        stats[k] = (n.mean(), ly.mean(), float(np.sign(np.mean([t[1] for t in pts]))))
        xs.append(n - n.mean())
        ys.append(ly - ly.mean())
    slope, _, resid = nx.linear_fit(np.concatenate(xs), np.concatenate(ys))
    consts = {k: s * math.exp(my - slope * mn) for k, (mn, my, s) in stats.items()}
    report.log_lambda_fit = slope
    report.C_even = consts[0]
    report.C_odd = consts[1]
    report.fit_window = tuple(n for n, _ in window)
    report.fit_residual = resid
    return slope, consts[0], consts[1]


# ----------------------------------------------------------------------------
# Lazutkin coordinates near the boundary
# ----------------------------------------------------------------------------

def _cbrt_dd(x):
    y = nx.DD(np.cbrt(x.hi))
    return y - (y * y * y - x) / (y * y * 3.0)


def _kappa_dd(curve: BoundaryCurve, u):
    r, r1, r2 = curve.polar_theta(u)
    s2 = r * r + r1 * r1
    return (r * r + 2.0 * r1 * r1 - r * r2) / (s2 * nx.sqrt(s2))


def _lazutkin_pairs(curve: BoundaryCurve, u0: float, targets: np.ndarray):
    """``(y, |x' - x - y|, |y' - y|)`` along chords started at ``u0``."""
    C = curve.lazutkin_constant
    kap0 = float(curve.curvature_theta(2 * np.pi * u0))
    sig0, _ = curve.speed_theta(u0)
    du = targets * C / kap0 ** (2.0 / 3.0) / sig0 / (2 * np.pi)
    ud0 = nx.DD(np.full_like(du, u0))
    ud1 = ud0 + du
    (x0, y0), (tx0, ty0) = curve.frame_theta(ud0, order=1)
    (x1, y1), (tx1, ty1) = curve.frame_theta(ud1, order=1)
    dx, dy = x1 - x0, y1 - y0
    ln = nx.sqrt(dx * dx + dy * dy)
    ex, ey = dx / ln, dy / ln
    n0 = nx.sqrt(tx0 * tx0 + ty0 * ty0)
    n1 = nx.sqrt(tx1 * tx1 + ty1 * ty1)
    a0x, a0y = tx0 / n0 - ex, ty0 / n0 - ey
    a1x, a1y = tx1 / n1 - ex, ty1 / n1 - ey
    half0 = nx.sqrt(a0x * a0x + a0y * a0y) * 0.5
    half1 = nx.sqrt(a1x * a1x + a1y * a1y) * 0.5
    yl0 = half0 / _cbrt_dd(_kappa_dd(curve, ud0)) * (4.0 / C)
    yl1 = half1 / _cbrt_dd(_kappa_dd(curve, ud1)) * (4.0 / C)
    th0 = 2 * np.pi * np.full_like(du, u0)
    th1 = th0 + 2 * np.pi * du
    dxl = curve.lazutkin_increment(th0, th1)
    y = yl0.to_float()
    ex_x = np.abs(dxl - yl0.hi - yl0.lo)
    ex_y = np.abs((yl1 - yl0).to_float())
    return y, ex_x, ex_y


def lazutkin_asymptotics(curve: BoundaryCurve, base_points=(0.03, 0.17, 0.29, 0.41, 0.63, 0.78),
                         y_range=(1e-5, 1e-2), n_y: int = 13) -> LazutkinReport:
    """Log-log slopes of ``|x' - x - y|`` and ``|y' - y|`` against ``y``.

    Chords are parametrised by their two end points, so no root finding is
    involved. Slopes are medians over several base points; ``|y' - y|`` that
    vanishes to rounding everywhere (the circle) is flagged as exact.
    """
    targets = np.logspace(np.log10(y_range[0]), np.log10(y_range[1]), n_y)
    sx, sy, exact = [], [], True
    for u0 in base_points:
        y, ex_x, ex_y = _lazutkin_pairs(curve, float(u0), targets)
        lx, _, _ = nx.linear_fit(np.log(y), np.log(ex_x))
        sx.append(lx)
        # rounding of the chord direction grows like eps / y
        if np.all(ex_y <= 64 * nx.EPS_EXTENDED / y):
            sy.append(float("inf"))
        else:
            exact = False
            ly, _, _ = nx.linear_fit(np.log(y), np.log(np.maximum(ex_y, 1e-300)))
            sy.append(ly)
    slope_y = float("inf") if exact else float(np.median([s for s in sy if np.isfinite(s)]))
    return LazutkinReport(float(np.median(sx)), slope_y, exact, tuple(zip(base_points, sx, sy)))


# ----------------------------------------------------------------------------
# genericity diagnostics
# ----------------------------------------------------------------------------

def genericity(curve: BoundaryCurve, p: int, q: int, precision: str = "double", orbit: PeriodicOrbit | None = None,
               segment: HeteroclinicSegment | None = None, report: SweepReport | None = None,
               seed: int = 0, K: int = 6, stiffness_min: float = 1e-6) -> GenericityReport:
    """Numerical proxies for the three genericity assumptions plus ``C != 0``.

    ``unique_max`` compares the geometrically distinct critical orbits reached
    by the multi-start ascent; on the circle they are rotations of one another
    and the margin vanishes. ``transversal_hint`` requires the heteroclinic
    tail decay to match ``lam`` within 5% and the segment's softest Hessian
    mode to stay above ``stiffness_min`` relative to the Hessian scale.
    """
    if orbit is None:
        orbit = solve_periodic(curve, p, q, precision=precision, seed=seed)
    probe = solve_periodic(curve, p, q, precision="double", seed=seed)
    distinct = distinct_candidates(probe)
    best = max(float(orbit.perimeter), distinct[0][0])
    others = [v for v, u in distinct if not _is_orbit(u, orbit)]
    margin = best - max(others) if others else float("inf")
    unique = bool(margin > 1e-9 * best)

    hyper = bool(orbit.eigen.hyperbolic)
    trace_margin = abs(orbit.eigen.trace) - 2.0
    tail, stiff, transversal = float("nan"), float("nan"), False
    c_nonzero = {"even": False, "odd": False}
    if hyper:
        if segment is None:
            try:
                segment = solve_heteroclinic(curve, orbit, K, K, precision="double")
            except BilliardError:
                segment = None
        if segment is not None:
            tail, stiff = segment.tail_decay, segment.stiffness
            rel = abs(tail - orbit.eigen.lam) / orbit.eigen.lam
            transversal = bool(rel <= 0.05 and stiff > stiffness_min)
        if report is None:
            try:
                report = sweep(curve, p, q, 3, 12, precision="extended", orbit=None, seed=seed)
                report.B_est = extract_limit(report)
                fit_rate(report)
            except BilliardError:
                report = None
        if report is not None and math.isfinite(report.C_even):
            f = FLOOR_FACTOR * report.precision_floor
            c_nonzero = {"even": bool(abs(report.C_even) > f), "odd": bool(abs(report.C_odd) > f)}
    return GenericityReport(unique, margin, hyper, trace_margin, transversal, tail, stiff, c_nonzero)


def _is_orbit(u, orbit: PeriodicOrbit) -> bool:
    return _same_orbit(np.asarray(u), orbit.config.u_float)


# ----------------------------------------------------------------------------
# full pipeline and report emission
# ----------------------------------------------------------------------------

@dataclass
class VerifyResult:
    report: SweepReport
    passed: bool
    status: str
    data: dict
    barrier_heteroclinic: object = None
    genericity: GenericityReport | None = None

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        fmt = _formatter(self.report.precision)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "a_N", "a_N_plus_B"])
        for n in sorted(self.report.a):
            a = self.report.a[n]
            y = a + self.report.B_est if self.report.B_est is not None else float("nan")
            w.writerow([n, fmt(a), fmt(y)])
        return buf.getvalue()

    def gnuplot(self, csv_name: str = "sweep.csv") -> str:
        rep = self.report
        lines = [
            "# log|a_N + B| against N with the monodromy reference slope",
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set xlabel 'N'",
            "set ylabel 'log|a_N + B|'",
        ]
        if rep.hyperbolic and rep.fit_window:
            n0 = rep.fit_window[0]
            y0 = math.log(abs(float(rep.a[n0] + rep.B_est)))
            lines.append(f"ref(x) = {y0!r} + {math.log(rep.lambda_monodromy)!r}*(x - {n0})")
            lines.append(f"plot '{csv_name}' using 1:(log(abs($3))) with linespoints title 'sweep', "
                         "ref(x) title 'log lambda slope'")
        else:
            lines.append(f"plot '{csv_name}' using 1:(log(abs($3))) with linespoints title 'sweep'")
        return "\n".join(lines) + "\n"


def _formatter(precision: str):
    digits = 32 if precision == "extended" else 17

    def fmt(x):
        if x is None:
            return None
        if isinstance(x, nx.DD):
            return format(x.to_decimal(), f".{digits - 1}e")
        x = float(x)
        if not math.isfinite(x):
            return repr(x)
        return format(x, f".{digits - 1}e")

    return fmt


def default_window(lam: float, target: float = 1e-24, k_min: int = 4, k_max: int = 10) -> int:
    """Smallest ``K`` with ``lam^(2K)`` below ``target``, clipped to a range."""
    k = math.ceil(math.log(target) / (2.0 * math.log(lam)))
    return max(k_min, min(k_max, k))


def verify(curve: BoundaryCurve, p: int, q: int, N_min: int = 3, N_max: int = 20, precision: str = "extended",
           seed: int = 0, rate_tol: float = 0.02, barrier_tol: float = 1e-6, K: int | None = None) -> VerifyResult:
    """Run sweep, limit extraction, rate fit and genericity for ``p/q``.

    ``passed`` requires a hyperbolic orbit, a rate within ``rate_tol`` of the
    monodromy value and agreement of the extracted limit with the heteroclinic
    barrier within ``barrier_tol`` (relative).
    """
    fmt = _formatter(precision)
    orbit = solve_periodic(curve, p, q, precision=precision, seed=seed)
    report = sweep(curve, p, q, N_min, N_max, precision=precision, orbit=orbit, seed=seed)
    errors = []
    try:
        report.B_est = extract_limit(report)
    except NonConvergent as exc:
        errors.append(f"NonConvergent: {exc}")
    segment = None
    b_het = None
    margins = {"trace_minus_2": fmt(abs(orbit.eigen.trace) - 2.0)}
    passed = False
    if not orbit.eigen.hyperbolic:
        errors.append("NotHyperbolic: the p/q orbit is not hyperbolic; only the limit is reported")
    elif report.B_est is not None:
        try:
            fit_rate(report)
        except InsufficientWindow as exc:
            errors.append(f"InsufficientWindow: {exc}")
        k = K or default_window(orbit.eigen.lam)
        try:
            segment = solve_heteroclinic(curve, orbit, k, k, precision=precision)
            b_het = segment.barrier_value
        except BilliardError as exc:
            errors.append(f"{type(exc).__name__}: {exc}")
        rate_rel = abs(report.log_lambda_fit - math.log(orbit.eigen.lam)) / abs(math.log(orbit.eigen.lam))
        margins["rate_rel_error"] = fmt(rate_rel)
        ok_rate = math.isfinite(rate_rel) and rate_rel <= rate_tol
        ok_barrier = False
        if b_het is not None:
            b_rel = abs(float(report.B_est - b_het)) / abs(float(b_het))
            margins["barrier_rel_diff"] = fmt(b_rel)
            ok_barrier = b_rel <= barrier_tol
        passed = ok_rate and ok_barrier
    gen = None
    try:
        gen = genericity(curve, p, q, precision=precision, orbit=orbit, segment=segment,
                         report=report if math.isfinite(report.C_even) else None, seed=seed)
    except BilliardError as exc:
        errors.append(f"{type(exc).__name__}: {exc}")
    data = {
        "p": p,
        "q": q,
        "domain": curve.spec.to_dict(),
        "precision": precision,
        "seed": seed,
        "N_range": [N_min, N_max],
        "perimeter": fmt(orbit.perimeter),
        "lambda_monodromy": fmt(orbit.eigen.lam),
        "log_lambda_fit": fmt(report.log_lambda_fit),
        "B_est": fmt(report.B_est),
        "barrier_heteroclinic": fmt(b_het),
        "C_even": fmt(report.C_even),
        "C_odd": fmt(report.C_odd),
        "fit_window": list(report.fit_window),
        "precision_floor": fmt(report.precision_floor),
        "gaps": list(report.gaps),
        "pass": bool(passed),
        "margins": margins,
        "errors": errors,
    }
    if gen is not None:
        data["genericity"] = {
            "unique_max": gen.unique_max,
            "unique_margin": fmt(gen.unique_margin),
            "hyperbolic": gen.hyperbolic,
            "transversal_hint": gen.transversal_hint,
            "tail_decay": fmt(gen.tail_decay),
            "stiffness": fmt(gen.stiffness),
            "C_nonzero": gen.C_nonzero,
        }
    status = "pass" if passed else ("NotHyperbolic" if not orbit.eigen.hyperbolic else "fail")
    return VerifyResult(report, passed, status, data, b_het, gen)
