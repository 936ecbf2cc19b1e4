"""Tests for domain descriptions and the arclength-parametrised boundary.

Oracles: closed forms for circles, scipy's complete elliptic integral and
adaptive quadrature for ellipse perimeters, and finite differences of the
sampled boundary for curvature and unit speed.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import ellipe

from mlspectrum.errors import InvalidSpec, NotStrictlyConvex
from mlspectrum.geometry import DomainSpec, build_domain, generic_domain


# --- DomainSpec -------------------------------------------------------------

def test_spec_round_trip_through_json():
    spec = generic_domain()
    again = DomainSpec.from_json(json.dumps(spec.to_dict()))
    assert again == spec


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "circle", "R": 1.0, "extra": 1},
        {"kind": "triangle"},
        {"R": 1.0},
        {"kind": "circle", "R": -1.0},
        {"kind": "ellipse", "a": 1.0, "b": 0.0},
    ],
)
def test_invalid_specs_rejected(data):
    with pytest.raises(InvalidSpec):
        DomainSpec.from_dict(data)


def test_fourier_with_large_second_harmonic_is_not_convex():
    # r = 1 + 0.4 cos 2t has negative curvature near t = pi/2
    t = np.linspace(0, 2 * np.pi, 20001)
    r, r1, r2 = 1 + 0.4 * np.cos(2 * t), -0.8 * np.sin(2 * t), -1.6 * np.cos(2 * t)
    assert np.min(r * r + 2 * r1 * r1 - r * r2) < 0
    with pytest.raises(NotStrictlyConvex) as info:
        build_domain(DomainSpec.fourier(1.0, cos={2: 0.4}))
    assert info.value.kappa_min <= 0


def test_build_domain_accepts_dict():
    curve = build_domain({"kind": "circle", "R": 2.0})
    assert curve.total_length == pytest.approx(4 * math.pi, rel=1e-14)


# --- perimeters -------------------------------------------------------------

@pytest.mark.parametrize("R", [1.0, 2.0, 0.3])
def test_circle_perimeter(R):
    assert build_domain(DomainSpec.circle(R)).total_length == pytest.approx(2 * math.pi * R, rel=1e-12)


@pytest.mark.parametrize("a,b", [(1.0, 0.6), (2.0, 1.5), (1.0, 0.9)])
def test_ellipse_perimeter_matches_elliptic_integral(a, b):
    ref = 4 * a * ellipe(1 - (b / a) ** 2)
    assert build_domain(DomainSpec.ellipse(a, b)).total_length == pytest.approx(ref, rel=1e-13)


def test_generic_perimeter_matches_quadrature(generic):
    def speed(t):
        r, r1, _ = generic.polar_theta(t / (2 * np.pi))
        return math.hypot(float(r), float(r1))

    ref, _ = quad(speed, 0, 2 * np.pi, limit=200, epsabs=1e-13, epsrel=1e-13)
    assert generic.total_length == pytest.approx(ref, rel=1e-12)


# --- arclength map ----------------------------------------------------------

def test_circle_arclength_is_angle(circle):
    th = np.linspace(-3, 9, 25)
    np.testing.assert_allclose(circle.arclength_of_angle(th), th, atol=1e-13)


def test_ellipse_half_perimeter_at_pi(ellipse):
    assert ellipse.arclength_of_angle(np.pi) == pytest.approx(ellipse.total_length / 2, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-20.0, max_value=20.0))
def test_angle_arclength_round_trip(theta):
    curve = _GENERIC
    s = curve.arclength_of_angle(theta)
    assert float(curve.angle_of_arclength(s)) == pytest.approx(theta, abs=1e-12)


def test_unit_speed_in_arclength(any_curve):
    L = any_curve.total_length
    s = np.linspace(0, L, 200, endpoint=False)
    h = 1e-5
    pp, _, _ = any_curve.evaluate(s + h)
    pm, _, _ = any_curve.evaluate(s - h)
    speed = np.linalg.norm(pp - pm, axis=-1) / (2 * h)
    np.testing.assert_allclose(speed, 1.0, rtol=1e-9)


def test_periodic_modulo_length(any_curve):
    L = any_curve.total_length
    s = np.linspace(0, L, 37)
    p0, t0, k0 = any_curve.evaluate(s)
    p1, t1, k1 = any_curve.evaluate(s + L)
    np.testing.assert_allclose(p0, p1, atol=1e-12)
    np.testing.assert_allclose(k0, k1, rtol=1e-12)


def test_curvature_matches_finite_differences(any_curve):
    s = np.linspace(0, any_curve.total_length, 50, endpoint=False)
    h = 1e-4
    _, tp, _ = any_curve.evaluate(s + h)
    _, tm, _ = any_curve.evaluate(s - h)
    dt = (tp - tm) / (2 * h)
    _, t0, k0 = any_curve.evaluate(s)
    kfd = t0[:, 0] * dt[:, 1] - t0[:, 1] * dt[:, 0]
    np.testing.assert_allclose(kfd, k0, rtol=1e-6)
    assert np.all(k0 > 0)


# --- evaluate ---------------------------------------------------------------

def test_circle_evaluate_start(circle):
    point, tangent, kappa = circle.evaluate(0.0)
    np.testing.assert_allclose(point, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(tangent, [0.0, 1.0], atol=1e-15)
    assert kappa == pytest.approx(1.0)


def test_circle_radius_two_half_way():
    curve = build_domain(DomainSpec.circle(2.0))
    point, _, kappa = curve.evaluate(2 * math.pi)
    np.testing.assert_allclose(point, [-2.0, 0.0], atol=1e-13)
    assert kappa == pytest.approx(0.5)


def test_ellipse_vertex_radius_of_curvature(ellipse):
    assert ellipse.radius_of_curvature(0.0) == pytest.approx(0.36, rel=1e-13)
    assert ellipse.kappa_max == pytest.approx(1 / 0.36, rel=1e-12)
    assert ellipse.kappa_min == pytest.approx(0.6, rel=1e-12)


def test_width_and_diameter_of_ellipse(ellipse):
    assert ellipse.width() == pytest.approx(1.2, rel=1e-5)
    assert ellipse.diameter() == pytest.approx(2.0, rel=1e-8)


# --- Lazutkin coordinate ----------------------------------------------------

def test_circle_lazutkin_perimeter(circle):
    assert circle.lazutkin_constant == pytest.approx(2 * math.pi, rel=1e-13)
    th = np.linspace(0, 2 * np.pi, 7)
    np.testing.assert_allclose(circle.lazutkin_x_of_angle(th), th / (2 * np.pi), atol=1e-14)


def test_lazutkin_perimeter_matches_quadrature(ellipse):
    def integrand(t):
        r, r1, r2 = ellipse.polar_theta(t / (2 * np.pi))
        sig = math.hypot(r, r1)
        kap = (r * r + 2 * r1 * r1 - r * r2) / sig**3
        return kap ** (2 / 3) * sig

    ref, _ = quad(integrand, 0, 2 * np.pi, limit=200, epsabs=1e-14)
    assert ellipse.lazutkin_constant == pytest.approx(ref, rel=1e-12)


def test_lazutkin_increment_matches_global_difference(generic):
    t0 = np.array([0.3, 1.7, 4.0])
    t1 = t0 + 0.05
    direct = generic.lazutkin_x_of_angle(t1) - generic.lazutkin_x_of_angle(t0)
    np.testing.assert_allclose(generic.lazutkin_increment(t0, t1), direct, rtol=1e-11)


_GENERIC = build_domain(generic_domain())
