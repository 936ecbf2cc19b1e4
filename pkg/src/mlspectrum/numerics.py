"""
Precision-configurable scalar arithmetic and small linear-algebra kernels.

Two working precisions are supported:

* ``"double"``   -- plain IEEE binary64 (numpy float64 arrays or floats);
* ``"extended"`` -- paired-double ("double-double") numbers, :class:`DD`,
  built from error-free transformations and carrying ~31 significant digits.

Every kernel in this module accepts either representation, so solvers can be
written once and run in both modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .errors import DegenerateAbscissae, NotHyperbolic, SingularSystem

EPS_DOUBLE = 2.0**-52
# Conservative unit roundoff for double-double; the error-free sum keeps
# (a + b) - a - b within 2**-100 |a + b|.
EPS_EXTENDED = 2.0**-100

PRECISIONS = ("double", "extended")

_SPLITTER = 134217729.0  # 2**27 + 1


def eps(precision: str) -> float:
    """Unit roundoff of a working precision."""
    if precision == "double":
        return EPS_DOUBLE
    if precision == "extended":
        return EPS_EXTENDED
    raise ValueError(f"unknown precision {precision!r}; expected one of {PRECISIONS}")


# ----------------------------------------------------------------------------
# error-free transformations (vectorised)
# ----------------------------------------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _parts(x):
    if isinstance(x, DD):
        return x.hi, x.lo
    return x, 0.0 * np.asarray(x, dtype=float)


class DD:
    """Double-double number (or array of numbers).

    The value is ``hi + lo`` with ``|lo| <= ulp(hi)/2``. ``hi`` and ``lo`` are
    float64 scalars or arrays of the same shape; all arithmetic broadcasts like
    numpy and mixes freely with floats and float arrays.

    Examples
    --------
    >>> x = DD.from_string("0.1")
    >>> str(x * 3 - DD.from_string("0.3"))
    '0.0000000000000000000000000000000e+00'
    """

    __slots__ = ("hi", "lo")
    __array_priority__ = 1000
    __array_ufunc__ = None

    def __init__(self, hi, lo=None):
        hi = np.asarray(hi, dtype=float)
        if lo is None:
            lo = np.zeros_like(hi)
        else:
            lo = np.asarray(lo, dtype=float)
        if hi.ndim == 0:
            hi = hi[()]
            lo = lo[()] if np.ndim(lo) == 0 else lo
        self.hi = hi
        self.lo = lo

    # -- construction / conversion ---------------------------------------
    @classmethod
    def _raw(cls, hi, lo):
        obj = cls.__new__(cls)
        obj.hi = hi
        obj.lo = lo
        return obj

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DD":
        hi = float(value)
        lo = float(value - Fraction(hi))
        return cls(hi, lo)

    @classmethod
    def from_string(cls, text: str) -> "DD":
        """Parse a decimal string, rounding correctly to double-double."""
        return cls.from_fraction(Fraction(text.strip()))

    def to_decimal(self) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = 60
            return Decimal(float(self.hi)) + Decimal(float(self.lo))

    def __str__(self):
        if np.ndim(self.hi):
            return "[" + ", ".join(str(self[i]) for i in range(len(self))) + "]"
        return format(self.to_decimal(), ".31e")

    def __repr__(self):
        return f"DD('{self}')"

    def __float__(self):
        return float(self.hi) + float(self.lo)

    def to_float(self):
        return self.hi + self.lo

    # -- container protocol ----------------------------------------------
    @property
    def shape(self):
        return np.shape(self.hi)

    @property
    def ndim(self):
        return np.ndim(self.hi)

    def __len__(self):
        return len(self.hi)

    def __getitem__(self, idx):
        return DD._raw(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, value):
        vh, vl = _parts(value)
        self.hi[idx] = vh
        self.lo[idx] = vl

    def copy(self):
        return DD._raw(np.array(self.hi, copy=True), np.array(self.lo, copy=True))

    # -- arithmetic -------------------------------------------------------
    def __neg__(self):
        return DD._raw(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __abs__(self):
        neg = self.hi < 0
        return DD._raw(np.where(neg, -self.hi, self.hi), np.where(neg, -self.lo, self.lo))

    def __add__(self, other):
        bh, bl = _parts(other)
        s, e = _two_sum(self.hi, bh)
        t, f = _two_sum(self.lo, bl)
        e = e + t
        s, e = _quick_two_sum(s, e)
        e = e + f
        s, e = _quick_two_sum(s, e)
        return DD._raw(s, e)

    __radd__ = __add__

    def __sub__(self, other):
        bh, bl = _parts(other)
        return self.__add__(DD._raw(-bh, -bl))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        bh, bl = _parts(other)
        p, e = _two_prod(self.hi, bh)
        e = e + (self.hi * bl + self.lo * bh)
        p, e = _quick_two_sum(p, e)
        return DD._raw(p, e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = other if isinstance(other, DD) else DD(other)
        q1 = self.hi / b.hi
        r = self - b * q1
        q2 = r.hi / b.hi
        r = r - b * q2
        q3 = r.hi / b.hi
        q1, q2 = _quick_two_sum(q1, q2)
        return DD._raw(q1, q2) + q3

    def __rtruediv__(self, other):
        return DD(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise TypeError("DD only supports nonnegative integer powers")
        result = DD(np.ones_like(self.hi))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparisons (elementwise) ---------------------------------------
    def _cmp(self, other):
        bh, bl = _parts(other)
        return self.hi - bh, self.lo - bl

    def __lt__(self, other):
        dh, dl = self._cmp(other)
        return (dh < 0) | ((dh == 0) & (dl < 0))

    def __gt__(self, other):
        dh, dl = self._cmp(other)
        return (dh > 0) | ((dh == 0) & (dl > 0))

    def __le__(self, other):
        return ~self.__gt__(other)

    def __ge__(self, other):
        return ~self.__lt__(other)


def dd_pi() -> DD:
    return DD.from_string("3.14159265358979323846264338327950288419716939937510")


PI = dd_pi()
TWO_PI = PI * 2.0
LN2 = DD.from_string("0.693147180559945309417232121458176568075500134360255")


def is_dd(x) -> bool:
    return isinstance(x, DD)


def as_precision(x, precision: str):
    """Convert a float/array/DD to the representation of ``precision``."""
    if precision == "extended":
        return x if isinstance(x, DD) else DD(x)
    if precision == "double":
        return x.to_float() if isinstance(x, DD) else np.asarray(x, dtype=float)
    raise ValueError(f"unknown precision {precision!r}")


def to_float(x):
    return x.to_float() if isinstance(x, DD) else x


def concatenate(parts):
    """Concatenate 1-d arrays; the result is DD if any part is DD."""
    if any(isinstance(p, DD) for p in parts):
        his, los = [], []
        for p in parts:
            h, l = _parts(p)
            his.append(np.atleast_1d(h))
            los.append(np.atleast_1d(l))
        return DD._raw(np.concatenate(his), np.concatenate(los))
    return np.concatenate([np.atleast_1d(p) for p in parts])


def total(x):
    """Accurate sum of a 1-d array (pairwise for DD, fsum for floats)."""
    if not isinstance(x, DD):
        return math.fsum(np.asarray(x, dtype=float).ravel())
    x = x.copy() if x.ndim else DD._raw(np.atleast_1d(x.hi), np.atleast_1d(x.lo))
    while len(x) > 1:
        if len(x) % 2:
            x = concatenate([x, DD(np.zeros(1))])
        x = x[0::2] + x[1::2]
    return x[0]


# ----------------------------------------------------------------------------
# transcendental functions
# ----------------------------------------------------------------------------

_INV_FACT = [DD.from_fraction(Fraction(1, math.factorial(k))) for k in range(32)]


def sqrt(x):
    """Square root; for DD one Newton step from the double seed."""
    if not isinstance(x, DD):
        return np.sqrt(x)
    y0 = np.sqrt(x.hi)
    p, e = _two_prod(y0, y0)
    resid = (x - DD._raw(p, e)).hi
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(y0 > 0, resid / (2.0 * np.where(y0 > 0, y0, 1.0)), 0.0)
    return DD(y0) + corr


def _sincos_small(x: DD):
    """Taylor series of (cos x, sin x) for |x| <= pi/4 + tiny."""
    x2 = x * x
    s = _INV_FACT[27]
    for k in range(25, 0, -2):
        s = _INV_FACT[k] - x2 * s
    c = _INV_FACT[26]
    for k in range(24, -1, -2):
        c = _INV_FACT[k] - x2 * c
    return c, x * s


def _quadrant_rotate(c, s, k):
    k = np.mod(k, 4).astype(int)
    out_c = np.select([k == 0, k == 1, k == 2], [c, -s, -c], s)
    out_s = np.select([k == 0, k == 1, k == 2], [s, c, -s], -c)
    return out_c, out_s


def sincos_turns(u):
    """Return ``(cos 2*pi*u, sin 2*pi*u)``.

    The argument is measured in turns so reduction by quarter turns is exact
    in both precisions.
    """
    if isinstance(u, DD):
        k = np.round(4.0 * u.hi)
        r = u - k * 0.25
        c, s = _sincos_small(r * TWO_PI)
        ch, sh = _quadrant_rotate(c.hi, s.hi, k)
        cl, sl = _quadrant_rotate(c.lo, s.lo, k)
        return DD._raw(ch, cl), DD._raw(sh, sl)
    u = np.asarray(u, dtype=float)
    k = np.round(4.0 * u)
    r = (u - 0.25 * k) * (2.0 * np.pi)
    return _quadrant_rotate(np.cos(r), np.sin(r), k)


def cos(x):
    if isinstance(x, DD):
        return sincos_turns(x / TWO_PI)[0]
    return np.cos(x)


def sin(x):
    if isinstance(x, DD):
        return sincos_turns(x / TWO_PI)[1]
    return np.sin(x)


def atan2(y, x):
    """Two-argument arctangent; for DD one Newton step from the double seed."""
    if not isinstance(x, DD) and not isinstance(y, DD):
        return np.arctan2(y, x)
    x = x if isinstance(x, DD) else DD(x)
    y = y if isinstance(y, DD) else DD(y)
    t0 = np.arctan2(y.hi, x.hi)
    c, s = sincos_turns(DD(t0) / TWO_PI)
    num = y * c - x * s
    den = x * c + y * s
    return DD(t0) + num.hi / den.hi


def exp(x):
    """Exponential; DD path reduces by ln 2 and 16, then sums a Taylor series."""
    if not isinstance(x, DD):
        return np.exp(x)
    k = np.round(x.hi / LN2.hi)
    r = (x - LN2 * k) * (1.0 / 16.0)
    e = _INV_FACT[16]
    for j in range(15, -1, -1):
        e = _INV_FACT[j] + r * e
    for _ in range(4):
        e = e * e
    return DD._raw(np.ldexp(e.hi, k.astype(int)), np.ldexp(e.lo, k.astype(int)))


def log(x):
    """Natural logarithm; DD path is one Newton step on exp."""
    if not isinstance(x, DD):
        return np.log(x)
    y0 = DD(np.log(x.hi))
    return y0 + (x * exp(-y0) - 1.0)


# ----------------------------------------------------------------------------
# cyclic tridiagonal systems
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicTridiagonal:
    """Symmetric cyclic tridiagonal matrix.

    ``off[i]`` couples unknowns ``i`` and ``i+1``; ``off[n-1]`` is the wrap
    entry coupling ``n-1`` and ``0``. For ``n == 2`` both couplings land on the
    same matrix entry and add up.
    """

    diag: object
    off: object

    def __post_init__(self):
        if len(self.diag) < 2:
            raise ValueError("cyclic tridiagonal systems need n >= 2")
        if len(self.off) != len(self.diag):
            raise ValueError("diag and off must have the same length")

    @property
    def n(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        d = np.asarray(to_float(self.diag), dtype=float)
        o = np.asarray(to_float(self.off), dtype=float)
        n = len(d)
        a = np.diag(d)
        for i in range(n):
            j = (i + 1) % n
            a[i, j] += o[i]
            a[j, i] += o[i]
        return a

    def matvec(self, x):
        n = self.n
        d, o = self.diag, self.off
        out = []
        for i in range(n):
            v = d[i] * x[i] + o[i] * x[(i + 1) % n] + o[(i - 1) % n] * x[(i - 1) % n]
            out.append(v)
        return _stack(out)


def _stack(values):
    if any(isinstance(v, DD) for v in values):
        his = np.array([float(_parts(v)[0]) for v in values])
        los = np.array([float(_parts(v)[1]) for v in values])
        return DD._raw(his, los)
    return np.array([float(v) for v in values])


def _abs_float(v) -> float:
    return abs(float(_parts(v)[0]))


def _thomas(sub, diag, sup, rhs, threshold):
    """Plain (non-cyclic) tridiagonal elimination with a pivot check."""
    n = len(diag)
    c = [None] * n
    d = [None] * n
    piv = diag[0]
    if _abs_float(piv) <= threshold:
        raise SingularSystem(f"pivot 0 below threshold ({_abs_float(piv):.3e})")
    c[0] = sup[0] / piv if n > 1 else None
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * c[i - 1]
        if _abs_float(piv) <= threshold:
            raise SingularSystem(f"pivot {i} below threshold ({_abs_float(piv):.3e})")
        if i < n - 1:
            c[i] = sup[i] / piv
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv
    x = [None] * n
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def solve_tridiagonal(diag, off, b, precision: str | None = None):
    """Solve a symmetric (non-cyclic) tridiagonal system.

    ``off[i]`` couples unknowns ``i`` and ``i+1`` (length ``n-1``).
    """
    n = len(diag)
    if len(off) != n - 1 or len(b) != n:
        raise ValueError("inconsistent tridiagonal system sizes")
    if precision is None:
        precision = "extended" if isinstance(diag, DD) or isinstance(b, DD) else "double"
    scale = float(np.max(np.abs(np.asarray(to_float(diag), dtype=float))))
    if n > 1:
        scale = max(scale, float(np.max(np.abs(np.asarray(to_float(off), dtype=float)))))
    threshold = (1e-30 if precision == "extended" else 1e-14) * max(scale, 1e-300)
    d = [diag[i] for i in range(n)]
    o = [off[i] for i in range(n - 1)]
    x = _thomas([None] + o, d, o + [None], [b[i] for i in range(n)], threshold)
    return _stack(x)


def solve_cyclic_tridiagonal(a: CyclicTridiagonal, b, precision: str | None = None):
    """Solve ``A x = b`` for a symmetric cyclic tridiagonal ``A``.

    Uses the Sherman-Morrison splitting of the wrap entries followed by two
    Thomas sweeps. Works on floats or DD values; the result has the type of
    the inputs.

    Parameters
    ----------
    a : CyclicTridiagonal
    b : array-like or DD
        Right-hand side of length ``a.n``.
    precision : {"double", "extended"}, optional
        Only used to pick the pivot threshold; inferred from the input types.

    Raises
    ------
    SingularSystem
        If a pivot magnitude drops below ``1e-30`` (extended) or
        ``1e-14`` (double) relative to the largest matrix entry.
    """
    n = a.n
    if len(b) != n:
        raise ValueError("right-hand side has the wrong length")
    if precision is None:
        extended = isinstance(a.diag, DD) or isinstance(b, DD)
        precision = "extended" if extended else "double"
    scale = max(
        np.max(np.abs(np.asarray(to_float(a.diag), dtype=float))),
        np.max(np.abs(np.asarray(to_float(a.off), dtype=float))),
    )
    threshold = (1e-30 if precision == "extended" else 1e-14) * max(scale, 1e-300)
    diag = [a.diag[i] for i in range(n)]
    off = [a.off[i] for i in range(n)]
    rhs = [b[i] for i in range(n)]

    if n == 2:
        c = off[0] + off[1]
        det = diag[0] * diag[1] - c * c
        if _abs_float(det) <= threshold * max(scale, 1e-300):
            raise SingularSystem("2x2 system is singular")
        x0 = (diag[1] * rhs[0] - c * rhs[1]) / det
        x1 = (diag[0] * rhs[1] - c * rhs[0]) / det
        return _stack([x0, x1])

    w = off[n - 1]
    gamma = -diag[0]
    if _abs_float(gamma) <= threshold:
        gamma = -scale
    mod_diag = list(diag)
    mod_diag[0] = diag[0] - gamma
    mod_diag[n - 1] = diag[n - 1] - w * w / gamma
    sub = [None] + off[: n - 1]
    sup = off[: n - 1] + [None]
    y = _thomas(sub, mod_diag, sup, rhs, threshold)
    zero = 0.0 * rhs[0]
    u = [gamma] + [zero] * (n - 2) + [w]
    z = _thomas(sub, mod_diag, sup, u, threshold)
    vy = y[0] + (w / gamma) * y[n - 1]
    vz = z[0] + (w / gamma) * z[n - 1]
    denom = 1.0 + vz
    if _abs_float(denom) <= 1e-14:
        raise SingularSystem("Sherman-Morrison denominator vanished")
    factor = vy / denom
    return _stack([y[i] - factor * z[i] for i in range(n)])


# ----------------------------------------------------------------------------
# 2x2 eigenproblem and least squares
# ----------------------------------------------------------------------------

def _unit_eigvec(m: np.ndarray, mu: float) -> np.ndarray:
    a, b = m[0]
    c, d = m[1]
    v1 = np.array([b, mu - a])
    v2 = np.array([mu - d, c])
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    nv = np.hypot(*v)
    if nv == 0.0:
        # m is a multiple of the identity in this eigenspace
        v = np.array([1.0, 0.0])
        nv = 1.0
    v = v / nv
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


def eigen2(m, det_tol: float = 1e-8):
    """Eigen-decomposition of a unimodular hyperbolic 2x2 matrix.

    Returns ``(lam_minus, lam_plus, v_minus, v_plus)`` with
    ``|lam_minus| < 1 < |lam_plus|`` and unit eigenvectors whose first
    nonzero component is positive.

    Raises
    ------
    NotHyperbolic
        If ``|tr M| <= 2 + 1e-10``.
    ValueError
        If ``det M`` differs from 1 by more than ``det_tol`` (relative).
    """
    m = np.asarray(to_float(m), dtype=float).reshape(2, 2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1.0) > det_tol * max(1.0, np.max(np.abs(m)) ** 2):
        raise ValueError(f"matrix is not area preserving: det = {det!r}")
    tr = m[0, 0] + m[1, 1]
    if abs(tr) <= 2.0 + 1e-10:
        raise NotHyperbolic(f"|trace| = {abs(tr):.12g} <= 2")
    disc = math.sqrt(tr * tr - 4.0 * det)
    big = 0.5 * (tr + math.copysign(disc, tr))
    small = det / big
    return small, big, _unit_eigvec(m, small), _unit_eigvec(m, big)


def linear_fit(xs, ys):
    """Least-squares line through ``(xs, ys)``.

    Returns
    -------
    slope, intercept, max_abs_residual : float
    """
    x = np.asarray(to_float(xs), dtype=float).ravel()
    y = np.asarray(to_float(ys), dtype=float).ravel()
    if x.size != y.size:
        raise ValueError("xs and ys must have the same length")
    if x.size < 3:
        raise ValueError("linear_fit needs at least 3 points")
    if np.ptp(x) < 1e-12:
        raise DegenerateAbscissae(f"abscissae span {np.ptp(x):.3e} < 1e-12")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float(np.dot(dx, y - ym) / np.dot(dx, dx))
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    return slope, intercept, float(np.max(np.abs(resid)))


def extrapolate_inverse_n(ns, values, max_degree: int = 5, points: int = 32) -> float:
    """Limit ``N -> oo`` of a sequence with an asymptotic expansion in ``1/N``.

    Least-squares polynomial in ``1/N`` over the last ``points`` terms; the
    degree is capped at a third of the points to keep the fit well posed.
    """
    ns = np.asarray(ns, dtype=float)[-points:]
    values = np.asarray(to_float(values), dtype=float)[-points:]
    degree = min(max_degree, len(ns) // 3)
    if degree < 1:
        return float(values[-1])
    coef = np.polynomial.polynomial.polyfit(1.0 / ns, values, degree)
    return float(coef[0])
