"""Command-line front end.

    stickslip simulate --config run.json --t-end 18.85
    stickslip criterion --config run.json
    stickslip detect --config run.json [--eps-list 1e-2 1e-3 1e-4]
    stickslip sweep --config sweep.json [--workers 4]
    stickslip compare-divergence --config run.json

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
1 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .criterion import divergence, perturbation_margin, stribeck_report
from .detector import (
    DEFAULT_HORIZON,
    DEFAULT_TIE_TOL,
    convergence_csv,
    convergence_table,
    detect_stick_slip,
)
from .integrator import IntegrationError, IntegratorConfig, config_from_dict, simulate
from .model import (
    ConfigError,
    FrictionLaw,
    Mode,
    Params,
    State,
    friction_from_dict,
    friction_to_dict,
    params_from_dict,
)
from .serialize import dumps, fmt
from .sweep import run_sweep, spec_from_dict, sweep_csv, sweep_sidecar

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_RUN_KEYS = {"c", "V", "epsilon", "friction", "integrator", "horizon", "t_end", "tie_tol",
             "n_panels", "x0"}


@dataclass(frozen=True)
class RunConfig:
    params: Params
    friction: FrictionLaw
    integrator: IntegratorConfig
    horizon: float
    tie_tol: float
    n_panels: int
    t_end: float | None
    x0: tuple[float, float] | None
    out: Path

    def to_dict(self) -> dict:
        return {
            **self.params.to_dict(),
            "friction": friction_to_dict(self.friction),
            "integrator": self.integrator.to_dict(),
            "horizon": self.horizon,
            "tie_tol": self.tie_tol,
            "n_panels": self.n_panels,
            "t_end": self.t_end,
            "x0": None if self.x0 is None else list(self.x0),
        }


def _number(doc, key, default=None):
    value = doc.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", key)
    return value


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}", "--config") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}", "--config") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "--config")
    return doc


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file with command-line overrides and validate everything."""
    doc = _load_json(args.config)
    unknown = set(doc) - _RUN_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key {key!r}", key)
    for key in ("c", "V", "epsilon", "horizon", "t_end"):
        override = getattr(args, key, None)
        if override is not None:
            doc[key] = override
    params = params_from_dict(doc)
    friction = friction_from_dict(doc.get("friction"))
    cfg = config_from_dict(doc.get("integrator"))
    horizon = _number(doc, "horizon", DEFAULT_HORIZON)
    tie_tol = _number(doc, "tie_tol", DEFAULT_TIE_TOL)
    n_panels = doc.get("n_panels", 256)
    if isinstance(n_panels, bool) or not isinstance(n_panels, int):
        raise ConfigError("n_panels must be an integer", "n_panels")
    if n_panels < 16 or n_panels % 2:
        raise ConfigError("n_panels must be an even integer >= 16", "n_panels")
    t_end = _number(doc, "t_end")
    if t_end is not None and not t_end > 0:
        raise ConfigError("t_end must be positive", "t_end")
    x0 = doc.get("x0")
    if x0 is not None:
        if not (isinstance(x0, list) and len(x0) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x0)):
            raise ConfigError("x0 must be a list [x1, x2]", "x0")
        x0 = (float(x0[0]), float(x0[1]))
    return RunConfig(params, friction, cfg, float(horizon), float(tie_tol), n_panels,
                     None if t_end is None else float(t_end), x0, Path(args.out))


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_simulate(args) -> int:
    rc = build_run_config(args)
    t_end = rc.t_end if rc.t_end is not None else rc.horizon
    p = rc.params
    x1, x2 = rc.x0 if rc.x0 is not None else (p.exit_point, p.V)
    traj = simulate(State(x1, x2, Mode.STICK), p, rc.friction, t_end, rc.integrator)
    csv_path = _write(rc.out, "trajectory.csv", traj.to_csv())
    ev_path = _write(rc.out, "events.json", dumps({
        "config": rc.to_dict(),
        "events": [e.to_dict() for e in traj.events],
    }))
    _say(args, f"{len(traj.samples)} samples, {len(traj.events)} events -> {csv_path}, {ev_path}")
    return EXIT_OK


def cmd_criterion(args) -> int:
    rc = build_run_config(args)
    report = perturbation_margin(rc.friction, rc.params, rc.n_panels)
    doc = {"config": rc.to_dict(), "criterion": report.to_dict()}
    if rc.friction.constants is not None:
        doc["stribeck"] = stribeck_report(rc.friction.constants, rc.params).to_dict()
    path = _write(rc.out, "criterion.json", dumps(doc))
    roots = "none" if report.a_plus is None else f"a+- = +-{fmt(report.a_plus)}"
    _say(args, f"margin = {fmt(report.margin)}, roots: {roots} -> {path}")
    return EXIT_OK


def cmd_detect(args) -> int:
    rc = build_run_config(args)
    report = detect_stick_slip(rc.params, rc.friction, rc.horizon, rc.integrator, rc.tie_tol)
    path = _write(rc.out, "cycle.json", dumps({"config": rc.to_dict(), "cycle": report.to_dict()}))
    _say(args, f"exists = {report.exists} ({report.diagnostic}) -> {path}")
    if args.eps_list:
        rows = convergence_table(rc.params, rc.friction, args.eps_list, rc.integrator, rc.horizon)
        cpath = _write(rc.out, "convergence.csv", convergence_csv(rows))
        _say(args, f"convergence table -> {cpath}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _load_json(args.config)
    if not doc:
        raise ConfigError("sweep needs a --config specification", "--config")
    spec = spec_from_dict(doc)
    records = run_sweep(spec, workers=args.workers)
    csv_path = _write(Path(args.out), "sweep.csv", sweep_csv(records))
    _write(Path(args.out), "sweep.json", sweep_sidecar(spec, records))
    n_bad = sum(r.agreement is False for r in records)
    _say(args, f"{len(records)} points, {n_bad} disagreements -> {csv_path}")
    return EXIT_OK


def cmd_compare_divergence(args) -> int:
    rc = build_run_config(args)
    k = rc.friction.constants
    if k is None:
        raise ConfigError("compare-divergence needs friction.kind = 'stribeck'", "friction.kind")
    p = rc.params
    sr = stribeck_report(k, p)
    cr = perturbation_margin(rc.friction, p, rc.n_panels)
    doc = {
        "config": rc.to_dict(),
        "perturbation_margin": cr.margin,
        "closed_form_margin": sr.closed_form_margin,
        "instability_margin": sr.instability_margin,
        "equilibrium_xi": sr.equilibrium_xi,
        "perturbation_test": sr.closed_form_margin > 0,
        "instability_test": sr.instability_margin > 0,
        "tests_agree": (sr.closed_form_margin > 0) == (sr.instability_margin > 0),
        "divergence_at_rest": divergence(0.0, k, p),
        "divergence_at_belt": divergence(p.V, k, p),
        "notes": [],
    }
    if p.epsilon == 0:
        doc["notes"].append("epsilon = 0: every divergence term vanishes; tests are degenerate")
        doc["cycle"] = None
    else:
        cycle = detect_stick_slip(p, rc.friction, rc.horizon, rc.integrator, rc.tie_tol)
        doc["cycle"] = {"exists": cycle.exists, "diagnostic": cycle.diagnostic}
        if cycle.exists:
            traj = cycle.ret.trajectory
            div = divergence(traj.x2, k, p)
            doc["divergence_samples"] = [
                {"t": t, "x2": v, "divergence": d} for t, v, d in zip(traj.t, traj.x2, div)
            ]
            doc["divergence_min"] = float(np.min(div))
            doc["divergence_max"] = float(np.max(div))
    if not doc["tests_agree"]:
        doc["notes"].append("the two sufficient tests disagree; neither is an existence claim")
    path = _write(rc.out, "divergence.json", dumps(doc))
    _say(args, f"perturbation margin {fmt(sr.closed_form_margin)}, instability margin "
               f"{fmt(sr.instability_margin)} -> {path}")
    return EXIT_OK


def _common(parser: argparse.ArgumentParser, top: bool) -> None:
    default = None if top else argparse.SUPPRESS
    parser.add_argument("--config", default=default, help="JSON configuration file")
    parser.add_argument("--out", default="." if top else argparse.SUPPRESS,
                        help="output directory (default: current directory)")
    parser.add_argument("--quiet", action="store_true", default=False if top else argparse.SUPPRESS)


def _overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--c", type=float, help="override c")
    parser.add_argument("--V", type=float, help="override V")
    parser.add_argument("--epsilon", type=float, help="override epsilon")
    parser.add_argument("--horizon", type=float, help="override horizon")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stickslip", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Filippov trajectory to CSV plus events JSON")
    _common(p, top=False)
    _overrides(p)
    p.add_argument("--t-end", dest="t_end", type=float, help="end time")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("criterion", help="first-order criterion report")
    _common(p, top=False)
    _overrides(p)
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("detect", help="verify a stick-slip cycle numerically")
    _common(p, top=False)
    _overrides(p)
    p.add_argument("--eps-list", dest="eps_list", type=float, nargs="+",
                   help="also write a return-time convergence table for these epsilons")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="grid sweep from a specification file")
    _common(p, top=False)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-divergence", help="criterion vs equilibrium-instability test")
    _common(p, top=False)
    _overrides(p)
    p.set_defaults(func=cmd_compare_divergence)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"error{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # precondition failures inside the numerics
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
