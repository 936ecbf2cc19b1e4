"""Tests for the command-line surface: configuration handling, exit codes and
emitted files."""

import json
import math

import pytest

from mlspectrum.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_orbit_circle(capsys, tmp_path):
    domain = tmp_path / "circle.json"
    domain.write_text(json.dumps({"kind": "circle", "R": 1.0}))
    out_file = tmp_path / "orbit.json"
    code, out, _ = run(capsys, "orbit", "--domain", str(domain), "-p", "1", "-q", "3", "--out", str(out_file))
    assert code == 0
    assert "5.196152422706632" in out
    data = json.loads(out_file.read_text())
    assert float(data["perimeter"]) == pytest.approx(3 * math.sqrt(3))
    assert len(data["points"]) == 3


def test_orbit_rejects_unreduced_fraction(capsys):
    code, _, err = run(capsys, "orbit", "-p", "2", "-q", "4")
    assert code == 1
    assert "p/q not in lowest terms" in err


def test_orbit_extended_residual(capsys):
    code, out, _ = run(capsys, "orbit", "-p", "1", "-q", "2", "--domain", "generic", "--precision", "extended")
    assert code == 0
    residual = float(out.split("residual")[1].split()[0])
    assert residual <= 1e-25


def test_unknown_domain_keys(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "ellipse", "a": 1.0, "b": 0.5, "c": 3}))
    code, _, err = run(capsys, "domain-check", "--domain", str(bad))
    assert code == 1
    assert "unknown keys" in err


def test_unknown_config_keys(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"domain": "circle", "p": 1, "q": 2, "colour": "red"}))
    code, _, err = run(capsys, "orbit", "--config", str(cfg))
    assert code == 1
    assert "colour" in err


def test_config_file_and_env_override(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"domain": {"kind": "circle", "R": 2.0}, "p": 1, "q": 2, "precision": "double"}))
    monkeypatch.setenv("MLS_PRECISION", "extended")
    code, out, _ = run(capsys, "orbit", "--config", str(cfg))
    assert code == 0
    # 32 significant digits in extended mode
    mantissa = out.split("perimeter")[1].split()[0].split("e")[0]
    assert len(mantissa.replace(".", "")) == 32
    monkeypatch.setenv("MLS_PRECISION", "quad")
    assert run(capsys, "orbit", "--config", str(cfg))[0] == 1


def test_not_convex_domain(capsys, tmp_path):
    bad = tmp_path / "peanut.json"
    bad.write_text(json.dumps({"kind": "fourier", "R0": 1.0, "cos": {"2": 0.4}}))
    code, out, _ = run(capsys, "domain-check", "--domain", str(bad))
    assert code == 1
    assert "not strictly convex" in out


def test_domain_check(capsys):
    code, out, _ = run(capsys, "domain-check", "--domain", "ellipse")
    assert code == 0
    assert float(json.loads(out)["kappa_min"]) == pytest.approx(0.6)


def test_spectrum_circle(capsys):
    code, out, _ = run(capsys, "spectrum", "--domain", "circle", "--q-max", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "p,q,ml_max,beta,trace,residue,hyperbolic"
    assert len(lines) == 1 + 9
    for line in lines[1:]:
        p, q, ml = line.split(",")[:3]
        assert float(ml) == pytest.approx(2 * int(q) * math.sin(math.pi * int(p) / int(q)), rel=1e-12)


def test_barrier_command(capsys, tmp_path):
    out_file = tmp_path / "barrier.json"
    code, out, _ = run(capsys, "barrier", "--domain", "generic", "-p", "1", "-q", "2", "-K", "5", "--N-max", "8",
                       "--out", str(out_file))
    assert code == 0
    data = json.loads(out_file.read_text())
    assert float(data["barrier_heteroclinic"]) == pytest.approx(float(data["barrier_via_derivative"]), rel=1e-6)


def test_lazutkin_check(capsys):
    code, out, _ = run(capsys, "lazutkin-check", "--domain", "circle")
    assert code == 0
    assert "exact" in out


def test_verify_circle_exit_three(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--domain", "circle", "-p", "1", "-q", "2", "--N-max", "10",
                       "--out", str(tmp_path / "v"))
    assert code == 3
    assert "NotHyperbolic" in out
    report = json.loads((tmp_path / "v" / "report.json").read_text())
    assert "NotHyperbolic" in " ".join(report["errors"])
    assert report["B_est"] is not None
    plot = (tmp_path / "v" / "plot.gp").read_text()
    assert "'sweep.csv'" in plot and str(tmp_path) not in plot


def test_solver_failure_exit_two(capsys, monkeypatch):
    from mlspectrum import cli
    from mlspectrum.errors import NoConvergence

    def boom(*args, **kwargs):
        raise NoConvergence("forced failure in solve_periodic")

    monkeypatch.setattr(cli, "solve_periodic", boom)
    code, _, err = run(capsys, "orbit", "-p", "1", "-q", "2")
    assert code == 2
    assert "NoConvergence" in err and "solve_periodic" in err
