"""Tests for the marked length spectrum, beta, its right derivative, alpha and
circle caustics.

Oracles: the analytic circle beta function and its derivative, the tangent
construction for caustic invariants, and the definition of the convex
conjugate.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlspectrum.errors import MonotonicityViolated
from mlspectrum.orbits import solve_periodic
from mlspectrum.spectra import (
    CSV_HEADER,
    alpha,
    barrier_via_prop2,
    beta,
    beta_right_derivative,
    circle_beta,
    circle_beta_prime,
    circle_caustic,
    difference_quotients,
    farey,
    ml_max,
    spectrum_table,
)


@pytest.fixture(scope="module")
def circle_half_quotients(circle):
    return beta_right_derivative(circle, 1, 2, 64, return_details=True)


# --- ML^max and beta ------------------------------------------------------

@pytest.mark.parametrize("frac", farey(8, upper=Fraction(1)))
def test_circle_ml_max(circle, frac):
    p, q = frac.numerator, frac.denominator
    assert float(ml_max(circle, p, q)) == pytest.approx(2 * q * math.sin(math.pi * p / q), rel=1e-12)
    assert float(beta(circle, p, q)) == pytest.approx(circle_beta(p / q), rel=1e-12)


def test_half_values(circle, ellipse):
    assert float(ml_max(circle, 1, 2)) == pytest.approx(4.0, rel=1e-15)
    assert float(beta(ellipse, 1, 2)) == pytest.approx(-2.0, rel=1e-15)


def test_farey_counts():
    assert farey(5) == [Fraction(1, 5), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5), Fraction(1, 2)]
    assert len(farey(5, upper=Fraction(1))) == 9
    assert all(math.gcd(f.numerator, f.denominator) == 1 for f in farey(12, upper=Fraction(1)))


def test_spectrum_csv_format(circle):
    table = spectrum_table(circle, farey(4))
    lines = table.to_csv().splitlines()
    assert lines[0] == "p,q,ml_max,beta,trace,residue,hyperbolic"
    assert ",".join(CSV_HEADER) == lines[0]
    assert len(lines) == 1 + len(farey(4))
    p, q, ml, *_ , hyp = lines[-1].split(",")
    assert (p, q, hyp) == ("1", "2", "false")
    assert float(ml) == pytest.approx(4.0)
    assert len(ml.split("e")[0].replace("-", "").replace(".", "")) == 17


def test_spectrum_parallel_matches_serial(ellipse):
    fracs = farey(5)
    serial = spectrum_table(ellipse, fracs, jobs=1).to_csv()
    parallel = spectrum_table(ellipse, fracs, jobs=2).to_csv()
    assert serial == parallel


def test_spectrum_extended_uses_32_digits(circle):
    text = spectrum_table(circle, [Fraction(1, 3)], precision="extended").to_csv()
    ml = text.splitlines()[1].split(",")[2]
    assert len(ml.split("e")[0].replace(".", "")) == 32


# --- right derivative of beta and barrier ---------------------------------

def test_circle_derivative_at_half(circle_half_quotients):
    est, _ = circle_half_quotients
    assert abs(est - circle_beta_prime(0.5)) <= 1e-4


def test_circle_derivative_at_third(circle):
    est = beta_right_derivative(circle, 1, 3, 64)
    assert est == pytest.approx(-math.pi, abs=1e-3)


def test_quotients_non_increasing(circle_half_quotients):
    # convexity of beta: secant slopes shrink as w_N decreases to p/q
    _, quot = circle_half_quotients
    vals = [quot[n] for n in sorted(quot)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_quotient_identity_matches_secant(circle):
    p, q, n = 1, 3, 4
    base = float(ml_max(circle, p, q))
    big = float(ml_max(circle, n * p, n * q - 1))
    quot = difference_quotients(p, q, base, {n: big})[n]
    w = n * p / (n * q - 1)
    secant = (circle_beta(w) - circle_beta(p / q)) / (w - p / q)
    assert quot == pytest.approx(secant, rel=1e-9)


def test_monotonicity_violation_detected(circle):
    orbit = solve_periodic(circle, 1, 2)
    # perimeters chosen so the quotients increase with N
    family = {n: 4.0 * n - 2.0 - 0.1 * n for n in range(2, 8)}
    with pytest.raises(MonotonicityViolated):
        beta_right_derivative(circle, 1, 2, 7, orbit=orbit, family=family)


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3)])
def test_circle_barrier_formula(circle, p, q):
    w = p / q
    ref = w * circle_beta_prime(w) - circle_beta(w)
    assert barrier_via_prop2(circle, p, q, 64) == pytest.approx(ref, rel=1e-8)


def test_circle_barrier_values():
    assert 0.5 * circle_beta_prime(0.5) - circle_beta(0.5) == pytest.approx(2.0)
    assert circle_beta_prime(1 / 3) / 3 - circle_beta(1 / 3) == pytest.approx(math.sqrt(3) - math.pi / 3)


# --- alpha ------------------------------------------------------------------

def _circle_grid(q_max):
    return {f: circle_beta(float(f)) for f in farey(q_max, upper=Fraction(1))}


@settings(max_examples=100)
@given(st.floats(min_value=-7.0, max_value=7.0), st.integers(min_value=0, max_value=10**6))
def test_fenchel_inequality(c, k):
    grid = _GRID
    fracs = sorted(grid)
    w = fracs[k % len(fracs)]
    assert alpha(c, grid) + grid[w] - float(w) * c >= -1e-12


def test_alpha_sup_attained_at_tangency():
    grid = _GRID
    for w0 in (Fraction(1, 3), Fraction(2, 5), Fraction(1, 2)):
        c = circle_beta_prime(float(w0))
        best = max(grid, key=lambda w: float(w) * c - grid[w])
        assert best == w0


def test_alpha_grid_refinement_is_monotone():
    c = -2.0
    values = [alpha(c, _circle_grid(q)) for q in (4, 8, 16, 32)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_alpha_from_curve(circle):
    fracs = [Fraction(1, 3), Fraction(1, 2)]
    c = circle_beta_prime(1 / 3)
    assert alpha(c, curve=circle, fractions=fracs) == pytest.approx(alpha(c, _circle_grid(3)), rel=1e-12)
    with pytest.raises(ValueError):
        alpha(c)


# --- circle caustics --------------------------------------------------------

def test_caustic_third():
    rec = circle_caustic(1.0, 1 / 3)
    assert rec.radius == pytest.approx(0.5)
    assert rec.lazutkin_q == pytest.approx(math.sqrt(3) - math.pi / 3, rel=1e-14)


@pytest.mark.parametrize("omega", [0.05, 0.2, 1 / 3, 0.41, 0.5])
def test_caustic_invariant_equals_alpha(omega):
    # Q = alpha(beta'(w)) = w beta'(w) - beta(w) for the analytic circle beta
    R = 1.3
    rec = circle_caustic(R, omega)
    ref = omega * circle_beta_prime(omega, R) - circle_beta(omega, R)
    assert rec.lazutkin_q == pytest.approx(ref, rel=1e-12)
    assert rec.lazutkin_q > 0


def test_caustic_shrinks_to_boundary():
    rec = circle_caustic(2.0, 1e-6)
    assert rec.length == pytest.approx(4 * math.pi, rel=1e-10)
    with pytest.raises(ValueError):
        circle_caustic(1.0, 0.7)


_GRID = _circle_grid(24)
