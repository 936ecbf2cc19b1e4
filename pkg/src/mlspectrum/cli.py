"""
Command-line interface.

Exit codes: 0 success, 1 invalid configuration, 2 solver failure, 3 a
verification ran to completion but did not pass.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import numerics as nx
from .billiard import step, PhasePoint
from .errors import BilliardError, InvalidSpec, NotStrictlyConvex
from .geometry import DomainSpec, build_domain, generic_domain
from .orbits import solve_heteroclinic, solve_periodic
from .spectra import barrier_via_prop2, farey, spectrum_table
from .verifier import default_window, lazutkin_asymptotics, verify

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FAIL = 0, 1, 2, 3

BUILTIN_DOMAINS = {
    "circle": lambda: DomainSpec.circle(1.0),
    "ellipse": lambda: DomainSpec.ellipse(1.0, 0.6),
    "generic": generic_domain,
}

_CONFIG_KEYS = {"domain", "precision", "p", "q", "N_min", "N_max", "q_max", "seed", "jobs", "out", "K"}


class ConfigError(Exception):
    pass


def _load_domain(value) -> DomainSpec:
    if isinstance(value, dict):
        return DomainSpec.from_dict(value)
    if value in BUILTIN_DOMAINS:
        return BUILTIN_DOMAINS[value]()
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"domain {value!r} is neither a built-in name nor a file")
    try:
        return DomainSpec.from_json(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{value}: invalid JSON: {exc}") from exc


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge a JSON config file, command-line options and ``MLS_PRECISION``."""
    cfg = {"domain": "generic", "precision": "double", "seed": 0, "jobs": 1}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    env = os.environ.get("MLS_PRECISION")
    if env:
        cfg["precision"] = env
    if cfg["precision"] not in nx.PRECISIONS:
        raise ConfigError(f"precision must be one of {nx.PRECISIONS}, got {cfg['precision']!r}")
    cfg["domain"] = _load_domain(cfg["domain"])
    for key in ("p", "q"):
        if key in cfg and cfg[key] is not None and not isinstance(cfg[key], int):
            raise ConfigError(f"{key} must be an integer")
    return cfg


def _check_fraction(cfg: dict):
    p, q = cfg.get("p"), cfg.get("q")
    if p is None or q is None:
        raise ConfigError("this command needs -p and -q")
    if q < 2 or not (0 < p < q):
        raise ConfigError("need 0 < p < q and q >= 2")
    if math.gcd(p, q) != 1:
        raise ConfigError("p/q not in lowest terms")
    return p, q


def _write(path: str | None, text: str):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _fmt(precision: str):
    digits = 32 if precision == "extended" else 17

    def fmt(x):
        if isinstance(x, nx.DD):
            return format(x.to_decimal(), f".{digits - 1}e")
        return format(float(x), f".{digits - 1}e")

    return fmt


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def cmd_orbit(cfg: dict) -> int:
    p, q = _check_fraction(cfg)
    curve = build_domain(cfg["domain"])
    orbit = solve_periodic(curve, p, q, precision=cfg["precision"], seed=cfg["seed"])
    fmt = _fmt(cfg["precision"])
    print(f"perimeter {fmt(orbit.perimeter)}")
    print(f"trace     {orbit.eigen.trace!r}")
    print(f"lambda    {orbit.eigen.lam!r}")
    print(f"residue   {orbit.eigen.residue!r}")
    print(f"residual  {orbit.residual:.3e}")
    _write(cfg.get("out"), json.dumps(orbit.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_spectrum(cfg: dict) -> int:
    q_max = cfg.get("q_max") or 8
    curve = build_domain(cfg["domain"])
    table = spectrum_table(curve, farey(q_max, upper=Fraction(1)), precision=cfg["precision"], seed=cfg["seed"], jobs=cfg["jobs"])
    text = table.to_csv()
    if cfg.get("out"):
        _write(cfg["out"], text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_barrier(cfg: dict) -> int:
    p, q = _check_fraction(cfg)
    curve = build_domain(cfg["domain"])
    prec = cfg["precision"]
    fmt = _fmt(prec)
    orbit = solve_periodic(curve, p, q, precision=prec, seed=cfg["seed"])
    k = cfg.get("K") or default_window(orbit.eigen.lam)
    seg = solve_heteroclinic(curve, orbit, k, k, precision=prec)
    via = barrier_via_prop2(curve, p, q, cfg.get("N_max") or 16, precision=prec, orbit=orbit)
    data = {
        "p": p,
        "q": q,
        "K": k,
        "barrier_heteroclinic": fmt(seg.barrier_value),
        "barrier_via_derivative": fmt(via),
        "tail_decay": fmt(seg.tail_decay),
        "lambda_monodromy": fmt(orbit.eigen.lam),
    }
    print(f"barrier (heteroclinic) {data['barrier_heteroclinic']}")
    print(f"barrier (derivative)   {data['barrier_via_derivative']}")
    _write(cfg.get("out"), json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    p, q = _check_fraction(cfg)
    curve = build_domain(cfg["domain"])
    res = verify(curve, p, q, N_min=cfg.get("N_min") or 3, N_max=cfg.get("N_max") or 20,
                 precision=cfg["precision"], seed=cfg["seed"], K=cfg.get("K"))
    out = Path(cfg.get("out") or "verify_out")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(res.to_json())
    (out / "sweep.csv").write_text(res.to_csv())
    (out / "plot.gp").write_text(res.gnuplot("sweep.csv"))
    print(f"B_est        {res.data['B_est']}")
    print(f"B_het        {res.data['barrier_heteroclinic']}")
    print(f"log lam fit  {res.data['log_lambda_fit']}")
    print(f"lambda       {res.data['lambda_monodromy']}")
    for err in res.data["errors"]:
        print(err)
    print(f"status       {res.status}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_lazutkin_check(cfg: dict) -> int:
    curve = build_domain(cfg["domain"])
    rep = lazutkin_asymptotics(curve)
    print(f"slope_x {rep.slope_x:.6f}")
    print("slope_y exact" if rep.exact_y else f"slope_y {rep.slope_y:.6f}")
    ok_x = 2.8 <= rep.slope_x <= 3.2
    ok_y = rep.exact_y or 3.8 <= rep.slope_y <= 4.2
    return EXIT_OK if ok_x and ok_y else EXIT_FAIL


def cmd_domain_check(cfg: dict) -> int:
    try:
        curve = build_domain(cfg["domain"])
    except NotStrictlyConvex as exc:
        print(str(exc))
        return EXIT_CONFIG
    # one bounce as a smoke test of the map
    step(curve, PhasePoint(0.0, 1.0))
    data = {
        "domain": curve.spec.to_dict(),
        "perimeter": repr(float(curve.total_length)),
        "kappa_min": repr(float(curve.kappa_min)),
        "kappa_max": repr(float(curve.kappa_max)),
        "lazutkin_perimeter": repr(float(curve.lazutkin_constant)),
    }
    print(json.dumps(data, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "orbit": cmd_orbit,
    "spectrum": cmd_spectrum,
    "barrier": cmd_barrier,
    "verify": cmd_verify,
    "lazutkin-check": cmd_lazutkin_check,
    "domain-check": cmd_domain_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlspectrum", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--domain", help="built-in name (circle, ellipse, generic) or domain JSON file")
        sp.add_argument("--precision", choices=nx.PRECISIONS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--out", help="output file, or directory for verify")
        if name in ("orbit", "barrier", "verify"):
            sp.add_argument("-p", type=int)
            sp.add_argument("-q", type=int)
        if name in ("barrier", "verify"):
            sp.add_argument("--N-min", dest="N_min", type=int)
            sp.add_argument("--N-max", dest="N_max", type=int)
            sp.add_argument("-K", type=int, help="heteroclinic half-window in periods")
        if name == "spectrum":
            sp.add_argument("--q-max", dest="q_max", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, InvalidSpec, NotStrictlyConvex) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BilliardError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
