"""Tests for the sweep, limit extraction, rate fit, Lazutkin asymptotics,
genericity diagnostics and report emission.

Oracles: constructed sequences with known limits and rates, the circle
closed form for a_N, and the heteroclinic barrier as an independent route to
the limit.
"""

import json
import math
import warnings

import numpy as np
import pytest

from mlspectrum import verifier
from mlspectrum.errors import InsufficientWindow, NoConvergence, NonConvergent
from mlspectrum.orbits import solve_periodic
from mlspectrum.verifier import (
    SweepReport,
    extract_limit,
    fit_rate,
    genericity,
    lazutkin_asymptotics,
    sweep,
    verify,
)


def circle_a(N, p, q):
    return 2 * (N * q - 1) * math.sin(math.pi * N * p / (N * q - 1)) - 2 * N * q * math.sin(math.pi * p / q)


@pytest.fixture(scope="module")
def generic_verify(generic):
    return verify(generic, 1, 2, N_min=3, N_max=14, precision="extended")


# --- synthetic sequences ------------------------------------------------------

def test_fit_rate_synthetic_parities():
    B = 1.25
    a = {n: -B + (0.7 if n % 2 == 0 else 1.1) * 0.3**n for n in range(2, 14)}
    rep = SweepReport.from_sequence(a)
    slope, c_even, c_odd = fit_rate(rep, B)
    assert slope == pytest.approx(math.log(0.3), abs=1e-6)
    assert c_even == pytest.approx(0.7, rel=1e-6)
    assert c_odd == pytest.approx(1.1, rel=1e-6)
    assert rep.fit_window == tuple(range(2, 14))


def test_fit_rate_keeps_sign():
    a = {n: -2.0 - 0.5 * 0.2**n for n in range(2, 14)}
    _, c_even, c_odd = fit_rate(SweepReport.from_sequence(a), 2.0)
    assert c_even == pytest.approx(-0.5, rel=1e-6) and c_odd == pytest.approx(-0.5, rel=1e-6)


def test_fit_rate_stops_at_precision_floor():
    # the sequence drops below 1e3 eps N q L after N = 8
    a = {n: -1.0 + 0.01**n for n in range(2, 16)}
    with pytest.raises(InsufficientWindow):
        fit_rate(SweepReport.from_sequence(a), 1.0)


def test_fit_rate_needs_a_barrier():
    with pytest.raises(ValueError):
        fit_rate(SweepReport.from_sequence({n: 1.0 for n in range(2, 12)}))


def test_extract_limit_geometric():
    B = 0.8125
    a = {n: -B + 3 * 0.4**n for n in range(2, 20)}
    assert extract_limit(SweepReport.from_sequence(a)) == pytest.approx(B, abs=1e-12)


def test_extract_limit_needs_five_values():
    with pytest.raises(NonConvergent):
        extract_limit(SweepReport.from_sequence({n: -1.0 + 0.5**n for n in range(2, 6)}))


def test_extract_limit_rejects_unsettled_ratios():
    rng = np.random.default_rng(2)
    a = {n: float(v) for n, v in zip(range(2, 14), rng.normal(size=12))}
    with pytest.raises(NonConvergent):
        extract_limit(SweepReport.from_sequence(a))


def test_precision_floor_scales_with_n():
    rep = SweepReport.from_sequence({n: 0.0 for n in range(2, 8)}, q=3, length=2.0, precision="extended")
    assert rep.floor(10) == pytest.approx(1e3 * 2.0**-100 * 10 * 3 * 2.0)
    assert rep.precision_floor == rep.floor(7)


# --- circle sweep -------------------------------------------------------------

def test_circle_sweep_matches_closed_form(circle):
    rep = sweep(circle, 1, 2, 2, 12, precision="double")
    assert not rep.hyperbolic
    assert rep.a[2] == pytest.approx(3 * math.sqrt(3) - 8, abs=1e-12)
    for n, v in rep.a.items():
        assert v == pytest.approx(circle_a(n, 1, 2), abs=1e-12)


def test_circle_limit_extrapolated(circle):
    rep = sweep(circle, 1, 3, 2, 40, precision="double")
    assert extract_limit(rep) == pytest.approx(math.sqrt(3) - math.pi / 3, abs=1e-8)


def test_sweep_rejects_bad_range(circle):
    with pytest.raises(ValueError):
        sweep(circle, 1, 2, 5, 3)


def test_sweep_warns_in_double_for_long_runs(generic):
    orbit = solve_periodic(generic, 1, 2)
    with pytest.warns(UserWarning, match="extended"):
        sweep(generic, 1, 2, 3, 7, precision="double", orbit=orbit)


def test_sweep_records_gaps(generic, monkeypatch):
    orbit = solve_periodic(generic, 1, 2)
    real = verifier.approximating_orbit

    def flaky(curve, orb, n, **kw):
        if n == 4:
            raise NoConvergence("forced")
        return real(curve, orb, n, **kw)

    monkeypatch.setattr(verifier, "approximating_orbit", flaky)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = sweep(generic, 1, 2, 3, 6, precision="double", orbit=orbit)
    assert rep.gaps == (4,)
    assert sorted(rep.a) == [3, 5, 6]


# --- Lazutkin asymptotics -----------------------------------------------------

def test_lazutkin_circle_is_exact(circle):
    rep = lazutkin_asymptotics(circle)
    assert rep.exact_y and math.isinf(rep.slope_y)
    assert rep.slope_x == pytest.approx(3.0, abs=0.2)


@pytest.mark.parametrize("name", ["ellipse", "generic"])
def test_lazutkin_slopes(request, name):
    rep = lazutkin_asymptotics(request.getfixturevalue(name))
    assert 2.8 <= rep.slope_x <= 3.2
    assert 3.8 <= rep.slope_y <= 4.2


# --- genericity ---------------------------------------------------------------

def test_circle_not_unique(circle):
    rep = genericity(circle, 1, 3)
    assert not rep.unique_max
    assert rep.unique_margin == pytest.approx(0.0, abs=1e-12)
    assert not rep.hyperbolic


def test_ellipse_separatrix_not_transversal(ellipse):
    orbit = solve_periodic(ellipse, 1, 2)
    rep = sweep(ellipse, 1, 2, 3, 12, precision="extended")
    rep.B_est = extract_limit(rep)
    fit_rate(rep)
    gen = genericity(ellipse, 1, 2, orbit=orbit, report=rep)
    assert gen.hyperbolic
    assert not gen.transversal_hint
    assert gen.unique_max


def test_generic_all_diagnostics_true(generic_verify):
    gen = generic_verify.genericity
    assert gen.unique_max and gen.hyperbolic and gen.transversal_hint
    assert gen.C_nonzero == {"even": True, "odd": True}


# --- verify pipeline and emitted files ---------------------------------------

def test_generic_verify_passes(generic_verify):
    assert generic_verify.passed
    rep = generic_verify.report
    assert abs(float(rep.B_est - generic_verify.barrier_heteroclinic)) <= 1e-8
    assert rep.log_lambda_fit == pytest.approx(math.log(rep.lambda_monodromy), rel=0.02)


def test_report_json_contract(generic_verify):
    data = json.loads(generic_verify.to_json())
    for key in ("p", "q", "lambda_monodromy", "log_lambda_fit", "B_est", "C_even", "C_odd", "fit_window", "pass",
                "margins"):
        assert key in data
    assert data["pass"] is True
    assert len(data["B_est"].split("e")[0].replace(".", "").replace("-", "")) == 32


def test_csv_and_plot_script(generic_verify):
    lines = generic_verify.to_csv().splitlines()
    assert lines[0] == "N,a_N,a_N_plus_B"
    assert len(lines) == 1 + 12
    script = generic_verify.gnuplot("sweep.csv")
    assert "'sweep.csv'" in script
    assert "/" not in script.replace("'sweep.csv'", "").split("plot", 1)[1].split("title")[0]
    assert str(math.log(generic_verify.report.lambda_monodromy))[:8] in script


def test_circle_verify_reports_not_hyperbolic(circle):
    res = verify(circle, 1, 2, N_min=3, N_max=12, precision="double")
    assert not res.passed
    assert res.status == "NotHyperbolic"
    assert any("NotHyperbolic" in e for e in res.data["errors"])
    assert float(res.data["B_est"]) == pytest.approx(2.0, abs=1e-3)
