"""Command-line front end.

    laguerre-mzi sweep --sweep r --range 0.1:1.5:50 --n 1 --phi 0.001
    laguerre-mzi figure fig7 --out figures/
    laguerre-mzi optimize-phi --n 2 --r 0.7 --scenario external --t1 0.95
    laguerre-mzi verify --level full
    laguerre-mzi energy-solve --nbar 8 --n 1 --dump-state state.json

Any long flag may also be given in a TOML or JSON file passed via
``--config``; flags on the command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .closed_form import DEFAULT_DERIV_STEP, SchemeParams, optimal_sensitivity_over_phi, r_for_energy
from .errors import LaguerreMziError, UsageError
from .fock import DEFAULT_TAIL_TOL, build_laguerre_state
from .sweep import (
    COLUMNS,
    ENV_OUTDIR,
    SCENARIOS,
    SWEEP_VARIABLES,
    ScanSpec,
    default_output_dir,
    default_workers,
    format_value,
    parse_range,
    preset_names,
    run_figure_preset,
    run_sweep,
)
from .verify import LEVELS, run_verify

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# flag dest -> ScanSpec parameter name
PARAM_FLAGS = {"n": "n", "r": "r", "phi": "phi", "t1": "T1", "t2": "T2", "eta": "eta"}


def load_config(path: str) -> dict:
    """Read a flat TOML or JSON table; keys are long flag names (dashes or underscores)."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if p.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        data = tomllib.loads(text)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a table of flag values")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _add_params(p: argparse.ArgumentParser, scenario_default: str = "ideal"):
    g = p.add_argument_group("model parameters")
    g.add_argument("--n", type=int, help="Fock order of the twin-Fock seed |n,n>")
    g.add_argument("--r", type=float, help="squeezing parameter")
    g.add_argument("--phi", type=float, help="shifted phase (optimum of the ideal scheme at 0)")
    g.add_argument("--t1", type=float, help="external transmissivity T1")
    g.add_argument("--t2", type=float, help="internal transmissivity T2")
    g.add_argument("--eta", type=float, help="transmissivity of the QFI loss model")
    g.add_argument("--nbar", type=float, help="fix the total mean photon number; r is derived per point")
    g.add_argument("--scenario", choices=SCENARIOS, default=scenario_default)
    g.add_argument("--deriv-step", type=float, default=DEFAULT_DERIV_STEP, help="phase step of the numerical derivative")


def _add_output(p: argparse.ArgumentParser, out_help: str):
    p.add_argument("--out", help=out_help)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_workers(p: argparse.ArgumentParser):
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: number of cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laguerre-mzi", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML or JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="sweep one parameter and tabulate outputs")
    sw.add_argument("--sweep", choices=SWEEP_VARIABLES, help="swept parameter")
    sw.add_argument("--range", help="lo:hi:count, endpoints included")
    sw.add_argument("--values", help="comma-separated explicit sweep values")
    sw.add_argument("--columns", default="parity,sensitivity", help=f"comma-separated subset of {','.join(COLUMNS)}")
    _add_params(sw)
    _add_output(sw, "output file (default: stdout)")
    _add_workers(sw)

    fg = sub.add_parser("figure", help="write the data behind one figure panel")
    fg.add_argument("preset", help=f"one of: {', '.join(preset_names())}")
    _add_output(fg, f"output directory (default: ${ENV_OUTDIR} or ./figures)")
    _add_workers(fg)

    op = sub.add_parser("optimize-phi", help="minimize the phase sensitivity over phi")
    _add_params(op)
    op.add_argument("--phi-lo", type=float, default=1e-4)
    op.add_argument("--phi-hi", type=float, default=1.0)
    _add_output(op, "output file (default: stdout)")

    vf = sub.add_parser("verify", help="check closed forms against the Fock-space oracle")
    vf.add_argument("--level", choices=LEVELS, default="quick")
    vf.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL, help="oracle truncation tolerance")
    vf.add_argument("--out", help="also write the JSON report here")
    _add_workers(vf)

    es = sub.add_parser("energy-solve", help="squeezing r giving a target mean photon number")
    es.add_argument("--nbar", type=float, help="target total mean photon number")
    es.add_argument("--n", type=int, default=0)
    es.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL, help="truncation tolerance of the dumped state")
    es.add_argument("--dump-state", metavar="PATH", help="write the Fock amplitudes of S(r)|n,n> as JSON")
    _add_output(es, "output file (default: stdout)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = load_config(known.config)
        args = parser.parse_args(argv)
        sub = _subparser(parser, args.command)
        valid = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - valid)
        if unknown:
            raise UsageError(f"unknown config keys for {args.command!r}: {unknown}")
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise UsageError(f"unknown command {name!r}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fixed_params(args, exclude: str | None = None) -> dict:
    fixed = {}
    for dest, name in PARAM_FLAGS.items():
        value = getattr(args, dest)
        if value is not None and name != exclude:
            fixed[name] = value
    return fixed


def _cmd_sweep(args) -> int:
    if not args.sweep:
        raise UsageError("--sweep is required")
    if (args.range is None) == (args.values is None):
        raise UsageError("give exactly one of --range or --values")
    if args.range is not None:
        values = parse_range(args.range)
    else:
        try:
            values = tuple(float(v) for v in args.values.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --values list: {args.values!r}") from exc
    columns = tuple(c.strip() for c in args.columns.split(",") if c.strip())
    fixed = _fixed_params(args)
    if args.sweep in fixed:
        raise UsageError(f"--{args.sweep.lower()} conflicts with --sweep {args.sweep}")
    spec = ScanSpec(
        args.sweep,
        values,
        fixed,
        args.scenario,
        args.nbar,
        columns,
        derivative_step=args.deriv_step,
    )
    _emit(run_sweep(spec, args.workers).render(args.format), args.out)
    return EXIT_OK


def _cmd_figure(args) -> int:
    out = args.out if args.out is not None else default_output_dir()
    for path in run_figure_preset(args.preset, out, args.workers, args.format):
        print(path)
    return EXIT_OK


def _resolve_r(args) -> float:
    if args.nbar is not None:
        if args.r is not None:
            raise UsageError("give --r or --nbar, not both")
        return r_for_energy(args.nbar, args.n or 0)
    if args.r is None:
        raise UsageError("--r (or --nbar) is required")
    return args.r


def _cmd_optimize(args) -> int:
    n = args.n or 0
    r = _resolve_r(args)
    scenario = "ideal" if args.scenario == "qfi" else args.scenario
    T = {"external": args.t1, "internal": args.t2}.get(scenario) or 1.0
    params = SchemeParams(n, r, 0.0, scenario, T)
    phi, value = optimal_sensitivity_over_phi(params, (args.phi_lo, args.phi_hi), args.deriv_step)
    row = {"n": n, "r": r, "scenario": scenario, "T": T, "phi_opt": phi, "sensitivity_opt": value}
    if args.format == "json":
        _emit(json.dumps(row, sort_keys=True) + "\n", args.out)
    else:
        _emit(",".join(row) + "\n" + ",".join(format_value(v) for v in row.values()) + "\n", args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = run_verify(args.level, args.workers, args.tail_tol)
    text = report.to_json()
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: max_error={c.max_error:.3e} tol={c.tolerance:.0e}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def _cmd_energy(args) -> int:
    if args.nbar is None:
        raise UsageError("--nbar is required")
    r = r_for_energy(args.nbar, args.n)
    row = {"n": args.n, "nbar": args.nbar, "r": r}
    if args.dump_state:
        state = build_laguerre_state(args.n, r, tail_tol=args.tail_tol)
        dump = dict(state.to_json(), n=args.n, r=r, tail_tol=args.tail_tol)
        Path(args.dump_state).write_text(json.dumps(dump) + "\n")
    if args.format == "json":
        _emit(json.dumps(row, sort_keys=True) + "\n", args.out)
    else:
        _emit("n,nbar,r\n" + ",".join(format_value(v) for v in row.values()) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "sweep": _cmd_sweep,
    "figure": _cmd_figure,
    "optimize-phi": _cmd_optimize,
    "verify": _cmd_verify,
    "energy-solve": _cmd_energy,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(parser, argv)
        if getattr(args, "workers", 1) is None:
            args.workers = default_workers()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"laguerre-mzi: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LaguerreMziError as exc:
        print(f"laguerre-mzi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
