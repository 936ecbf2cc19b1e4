"""
Strictly convex billiard tables given in polar form about the origin.

A table is described by a :class:`DomainSpec` and materialised as a
:class:`BoundaryCurve`. Internally every curve is parametrised by the polar
angle measured in *turns*, ``theta = 2*pi*u``; this keeps periodic closure
exact in both working precisions. Arclength ``s`` is obtained by spectral
integration of the speed ``|gamma_theta|`` and is used for the public API.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import numerics as nx
from .errors import InvalidSpec, NotStrictlyConvex

N_SAMPLES = 4096
_KINDS = ("circle", "ellipse", "fourier")
_ALLOWED_KEYS = {
    "circle": {"kind", "R"},
    "ellipse": {"kind", "a", "b", "cos", "sin"},
    "fourier": {"kind", "R0", "cos", "sin"},
}


def _coeffs(raw) -> tuple[tuple[int, float], ...]:
    if raw is None:
        return ()
    if isinstance(raw, Mapping):
        items = raw.items()
    else:
        items = raw
    out = {}
    for k, v in items:
        try:
            kk = int(k)
        except (TypeError, ValueError) as exc:
            raise InvalidSpec(f"harmonic index {k!r} is not an integer") from exc
        if kk < 1:
            raise InvalidSpec(f"harmonic index must be >= 1, got {kk}")
        out[kk] = out.get(kk, 0.0) + float(v)
    return tuple(sorted((k, v) for k, v in out.items() if v != 0.0))


@dataclass(frozen=True)
class DomainSpec:
    """Polar description ``r(theta)`` of a convex table.

    ``kind`` selects the base radius: a circle of radius ``R``, the polar form
    of an ellipse with semi-axes ``a >= b`` centred at the origin, or a constant
    ``R0``. The ellipse and Fourier kinds may carry additive harmonics
    ``sum c_k cos(k theta) + s_k sin(k theta)``.
    """

    kind: str
    R: float = 1.0
    a: float = 1.0
    b: float = 1.0
    R0: float = 1.0
    cos: tuple[tuple[int, float], ...] = ()
    sin: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidSpec(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "cos", _coeffs(self.cos))
        object.__setattr__(self, "sin", _coeffs(self.sin))
        if self.kind == "circle" and not self.R > 0:
            raise InvalidSpec(f"circle radius must be positive, got {self.R}")
        if self.kind == "ellipse":
            if not (self.b > 0 and self.a > 0):
                raise InvalidSpec(f"semi-axes must be positive, got a={self.a}, b={self.b}")
            if self.a < self.b:
                raise InvalidSpec(f"expected a >= b, got a={self.a}, b={self.b}")
        if self.kind == "fourier" and not self.R0 > 0:
            raise InvalidSpec(f"base radius must be positive, got {self.R0}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def circle(cls, R: float = 1.0) -> "DomainSpec":
        return cls("circle", R=R)

    @classmethod
    def ellipse(cls, a: float = 1.0, b: float = 0.6, cos=None, sin=None) -> "DomainSpec":
        return cls("ellipse", a=a, b=b, cos=cos or (), sin=sin or ())

    @classmethod
    def fourier(cls, R0: float = 1.0, cos=None, sin=None) -> "DomainSpec":
        return cls("fourier", R0=R0, cos=cos or (), sin=sin or ())

    @classmethod
    def from_dict(cls, data: Mapping) -> "DomainSpec":
        if not isinstance(data, Mapping) or "kind" not in data:
            raise InvalidSpec("domain spec must be an object with a 'kind' key")
        kind = data["kind"]
        if kind not in _KINDS:
            raise InvalidSpec(f"unknown domain kind {kind!r}")
        unknown = set(data) - _ALLOWED_KEYS[kind]
        if unknown:
            raise InvalidSpec(f"unknown keys for {kind} domain: {sorted(unknown)}")
        kwargs = {k: data[k] for k in data if k != "kind"}
        for key in ("R", "a", "b", "R0"):
            if key in kwargs:
                try:
                    kwargs[key] = float(kwargs[key])
                except (TypeError, ValueError) as exc:
                    raise InvalidSpec(f"{key} must be a number") from exc
        return cls(kind, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "DomainSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        if self.kind == "circle":
            return {"kind": "circle", "R": self.R}
        out = {"kind": self.kind}
        if self.kind == "ellipse":
            out.update(a=self.a, b=self.b)
        else:
            out["R0"] = self.R0
        if self.cos:
            out["cos"] = {str(k): v for k, v in self.cos}
        if self.sin:
            out["sin"] = {str(k): v for k, v in self.sin}
        return out


def generic_domain() -> DomainSpec:
    """Default asymmetric test table: polar ellipse (1, 0.6) plus two harmonics."""
    return DomainSpec.ellipse(1.0, 0.6, cos={3: 0.005}, sin={4: 0.003})


def _harmonics(c, s, kmax):
    """``[(cos k theta, sin k theta) for k = 1..kmax]`` from ``(cos, sin)``."""
    out = [(c, s)]
    ck, sk = c, s
    for _ in range(1, kmax):
        ck, sk = ck * c - sk * s, sk * c + ck * s
        out.append((ck, sk))
    return out


def _spectral_antiderivative(values: np.ndarray):
    """Fourier data for ``F(theta) = int_0^theta f`` from equispaced samples."""
    m = len(values)
    coef = np.fft.rfft(values) / m
    c0 = coef[0].real
    c = coef[1:].copy()
    if m % 2 == 0:
        c[-1] *= 0.5
    mag = np.abs(c)
    tol = 1e-15 * abs(c0)
    keep = np.nonzero(mag > tol)[0]
    kmax = int(keep[-1]) + 1 if keep.size else 0
    c = c[:kmax]
    k = np.arange(1, kmax + 1)
    return c0, c, k


def _eval_antiderivative(data, theta):
    c0, c, k = data
    theta = np.asarray(theta, dtype=float)
    if c.size == 0:
        return c0 * theta
    phase = np.exp(1j * np.multiply.outer(theta, k))
    series = (phase - 1.0) / (1j * k) @ c
    return c0 * theta + 2.0 * series.real


class BoundaryCurve:
    """Arclength-parametrised boundary of a strictly convex table.

    Parameters
    ----------
    spec : DomainSpec
        Polar description of the table.
    n_samples : int
        Size of the dense sampling used for quadrature, the arclength table
        and the convexity certificate (at least 4096).

    Raises
    ------
    NotStrictlyConvex
        If sampled curvature is not bounded away from zero by more than its
        variation between neighbouring samples.
    """

    def __init__(self, spec: DomainSpec, n_samples: int = N_SAMPLES):
        if n_samples < N_SAMPLES:
            raise ValueError(f"n_samples must be >= {N_SAMPLES}")
        self.spec = spec
        self.n_samples = n_samples
        self._kmax = max([k for k, _ in spec.cos + spec.sin] or [0])

        u = np.arange(n_samples) / n_samples
        theta = 2.0 * np.pi * u
        r, r1, r2 = self.polar_theta(u)
        kappa = (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5
        imin = int(np.argmin(kappa))
        kmin = float(kappa[imin])
        variation = float(np.max(np.abs(np.diff(np.append(kappa, kappa[0])))))
        if not (kmin > 0 and kmin > variation):
            raise NotStrictlyConvex(float(theta[imin]), kmin)
        self.kappa_min = kmin
        self.kappa_max = float(np.max(kappa))

        speed = np.sqrt(r * r + r1 * r1)
        self._arc = _spectral_antiderivative(speed)
        self.total_length = 2.0 * np.pi * self._arc[0]
        laz = kappa ** (2.0 / 3.0) * speed
        self._laz = _spectral_antiderivative(laz)
        self.lazutkin_constant = 2.0 * np.pi * self._laz[0]

        grid = np.linspace(0.0, 2.0 * np.pi, n_samples + 1)
        s_grid = _eval_antiderivative(self._arc, grid)
        self._inverse_table = PchipInterpolator(s_grid, grid)

    # -- polar description --------------------------------------------------
    def polar_theta(self, u):
        """``(r, dr/dtheta, d2r/dtheta2)`` at turn coordinate ``u``.

        Works on floats, float arrays and :class:`~mlspectrum.numerics.DD`.
        """
        c, s = nx.sincos_turns(u)
        return self._polar_from_cs(c, s)

    def _polar_from_cs(self, c, s):
        spec = self.spec
        if spec.kind == "circle":
            r = spec.R + 0.0 * c
            return r, 0.0 * c, 0.0 * c
        if spec.kind == "ellipse":
            a, b = spec.a, spec.b
            ab = a * b if not nx.is_dd(c) else nx.DD(a) * b
            e2 = (nx.DD(a) * a - nx.DD(b) * b) if nx.is_dd(c) else a * a - b * b
            s2 = 2.0 * s * c
            c2 = c * c - s * s
            d0 = s * s * e2 + b * b if not nx.is_dd(c) else s * s * e2 + nx.DD(b) * b
            d1 = e2 * s2
            d2 = 2.0 * e2 * c2
            inv_sqrt = 1.0 / nx.sqrt(d0)
            inv_d = 1.0 / d0
            r = ab * inv_sqrt
            r1 = -0.5 * r * inv_d * d1
            r2 = r * inv_d * (0.75 * inv_d * d1 * d1 - 0.5 * d2)
        else:
            r = spec.R0 + 0.0 * c
            r1 = 0.0 * c
            r2 = 0.0 * c
        if self._kmax:
            harm = _harmonics(c, s, self._kmax)
            for k, ck in spec.cos:
                cos_k, sin_k = harm[k - 1]
                r = r + ck * cos_k
                r1 = r1 - (ck * k) * sin_k
                r2 = r2 - (ck * k * k) * cos_k
            for k, sk in spec.sin:
                cos_k, sin_k = harm[k - 1]
                r = r + sk * sin_k
                r1 = r1 + (sk * k) * cos_k
                r2 = r2 - (sk * k * k) * sin_k
        return r, r1, r2

    def frame_theta(self, u, order: int = 2):
        """Position and derivatives with respect to ``theta`` at turn ``u``.

        Returns ``(x, y), (x_t, y_t)[, (x_tt, y_tt)]`` as tuples of arrays or
        DD values, matching the type of ``u``.
        """
        c, s = nx.sincos_turns(u)
        r, r1, r2 = self._polar_from_cs(c, s)
        pos = (r * c, r * s)
        d1 = (r1 * c - r * s, r1 * s + r * c)
        if order == 1:
            return pos, d1
        d2 = ((r2 - r) * c - 2.0 * r1 * s, (r2 - r) * s + 2.0 * r1 * c)
        return pos, d1, d2

    def speed_theta(self, u):
        """``|d gamma / d theta|`` and its theta-derivative (double)."""
        u = np.asarray(nx.to_float(u), dtype=float)
        r, r1, r2 = self.polar_theta(u)
        sig = np.sqrt(r * r + r1 * r1)
        return sig, r1 * (r + r2) / sig

    def curvature_theta(self, theta):
        """Signed curvature as a function of the polar angle (radians)."""
        u = np.asarray(theta, dtype=float) / (2.0 * np.pi)
        r, r1, r2 = self.polar_theta(u)
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    # -- arclength bridge -------------------------------------------------
    def arclength_of_angle(self, theta):
        """Lifted arclength ``s(theta)``, with ``s(theta + 2 pi) = s(theta) + L``."""
        return _eval_antiderivative(self._arc, theta)

    def angle_of_arclength(self, s):
        """Inverse of :meth:`arclength_of_angle` (lifted)."""
        s = np.asarray(s, dtype=float)
        L = self.total_length
        wraps = np.floor(s / L)
        red = s - wraps * L
        theta = self._inverse_table(red)
        for _ in range(3):
            f = self.arclength_of_angle(theta) - red
            sig, _ = self.speed_theta(theta / (2.0 * np.pi))
            theta = theta - f / sig
        return theta + 2.0 * np.pi * wraps

    def arclength_of_turn(self, u):
        return self.arclength_of_angle(2.0 * np.pi * np.asarray(nx.to_float(u), dtype=float))

    def turn_of_arclength(self, s):
        return self.angle_of_arclength(s) / (2.0 * np.pi)

    # -- arclength evaluation ---------------------------------------------
    def evaluate(self, s):
        """Point, unit tangent and curvature at arclength ``s``.

        Returns
        -------
        point : ndarray, shape (..., 2)
        tangent : ndarray, shape (..., 2)
        kappa : ndarray
        """
        theta = self.angle_of_arclength(s)
        u = theta / (2.0 * np.pi)
        (x, y), (xt, yt) = self.frame_theta(u, order=1)
        sig = np.hypot(xt, yt)
        point = np.stack([x, y], axis=-1)
        tangent = np.stack([xt / sig, yt / sig], axis=-1)
        return point, tangent, self.curvature_theta(theta)

    def radius_of_curvature(self, s):
        return 1.0 / self.evaluate(s)[2]

    # -- Lazutkin coordinate ------------------------------------------------
    def lazutkin_x_of_angle(self, theta):
        """``C^-1 int_0^s rho^(-2/3) ds`` as a lifted function of theta."""
        return _eval_antiderivative(self._laz, theta) / self.lazutkin_constant

    def lazutkin_increment(self, theta0, theta1, nodes: int = 24):
        """``x_L(theta1) - x_L(theta0)`` for nearby angles, by Gauss quadrature.

        Avoids the cancellation of differencing two global values when the
        interval is short.
        """
        t, w = np.polynomial.legendre.leggauss(nodes)
        theta0 = np.asarray(theta0, dtype=float)
        theta1 = np.asarray(theta1, dtype=float)
        half = 0.5 * (theta1 - theta0)
        mid = 0.5 * (theta1 + theta0)
        pts = mid[..., None] + half[..., None] * t
        r, r1, r2 = self.polar_theta(pts / (2.0 * np.pi))
        sig = np.sqrt(r * r + r1 * r1)
        kap = (r * r + 2 * r1 * r1 - r * r2) / sig**3
        return half * np.sum(w * kap ** (2.0 / 3.0) * sig, axis=-1) / self.lazutkin_constant

    # -- misc -------------------------------------------------------------
    def points(self, n: int = 4096) -> np.ndarray:
        u = np.arange(n) / n
        (x, y), _ = self.frame_theta(u, order=1)
        return np.stack([x, y], axis=-1)

    def width(self, n_dirs: int = 2048) -> float:
        """Minimal width (distance between parallel support lines)."""
        pts = self.points()
        ang = np.pi * np.arange(n_dirs) / n_dirs
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        proj = pts @ dirs.T
        return float(np.min(proj.max(axis=0) - proj.min(axis=0)))

    def diameter(self, n: int = 2048) -> float:
        pts = self.points(n)
        d = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def build_domain(spec: DomainSpec | Mapping) -> BoundaryCurve:
    """Construct and certify a :class:`BoundaryCurve`."""
    if not isinstance(spec, DomainSpec):
        spec = DomainSpec.from_dict(spec)
    return BoundaryCurve(spec)
