"""Shared fixtures: the three reference tables, built once per session."""

import re

import pytest

from mlspectrum.geometry import DomainSpec, build_domain, generic_domain


@pytest.fixture(scope="session")
def circle():
    return build_domain(DomainSpec.circle(1.0))


@pytest.fixture(scope="session")
def ellipse():
    return build_domain(DomainSpec.ellipse(1.0, 0.6))


@pytest.fixture(scope="session")
def generic():
    return build_domain(generic_domain())


@pytest.fixture(scope="session", params=["circle", "ellipse", "generic"])
def any_curve(request, circle, ellipse, generic):
    return {"circle": circle, "ellipse": ellipse, "generic": generic}[request.param]


# --- acceptance summary -----------------------------------------------------

_ACCEPTANCE: dict[str, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance(request):
    """Record ``(label, ok, detail)`` for the end-of-run PASS/FAIL table."""

    def record(label: str, ok: bool, detail: str):
        _ACCEPTANCE[request.node.nodeid] = (label, bool(ok), detail)
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            m = re.search(r"test_acceptance\.py::test_ac(\d+)", nodeid)
            if not m or (rep.when != "call" and outcome != "error"):
                continue
            fallback = (f"AC-{int(m.group(1))}", False, f"no result recorded ({outcome})")
            label, ok, detail = _ACCEPTANCE.get(nodeid, fallback)
            rows[int(m.group(1)), nodeid] = (label, ok and outcome == "passed", detail)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(rows):
        label, ok, detail = rows[key]
        terminalreporter.write_line(f"{label:<6} {'PASS' if ok else 'FAIL'}  {detail}")
