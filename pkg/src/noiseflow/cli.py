"""
Command-line entry point ``noiseflow``.

Exit codes: 0 success, 1 user or configuration error, 2 numerical or
internal error (including disagreement between the two steady-state
routes, which signals a bug rather than bad input).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import conditions
from .config import parse_config, model_from_dict, regime_warnings
from .errors import NoiseflowError, NumericalError, OracleMismatchError
from .netmodel import NetworkModel, build_dynamics
from .spectral import make_grid, write_spectra_csv
from .steady import Method, flow_report, oracle_disagreement
from .sweep import FigurePreset, SweepSpec, apply_override, parse_axis, parse_override, reproduce, run_sweep

EXIT_OK = 0
EXIT_USER = 1
EXIT_NUMERICAL = 2

ORACLE_RTOL = 1e-6


class UserError(NoiseflowError):
    """Bad command-line input that is not a config or sweep-spec problem."""


def _load(path: str, overrides: Sequence[str]) -> tuple[NetworkModel, list[str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UserError(f"cannot read config {path}: {exc.strerror}") from None
    model = model_from_dict(parse_config(text))
    for item in overrides:
        selector, value = parse_override(item)
        model = apply_override(model, selector, value)
    return model, regime_warnings(model)


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _report_jsonl(report) -> str:
    lines = []
    for label in report.labels:
        lines.append(json.dumps({"mode": label, **report.row(label), "method": report.method.value}))
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    model, warns = _load(args.config, args.set)
    for w in warns:
        print(f"warning: {w}", file=sys.stderr)
    sys_ = build_dynamics(model)
    lyap = flow_report(sys_, Method.LYAPUNOV)
    spec = flow_report(sys_, Method.SPECTRAL)
    gap = oracle_disagreement(spec, lyap)
    if args.format == "jsonl":
        text = _report_jsonl(lyap) + _report_jsonl(spec)
    else:
        text = lyap.to_csv() + spec.to_csv().split("\n", 1)[1]
    if args.transmission:
        Path(args.transmission).write_text(lyap.transmission_csv())
    if args.spectra:
        Path(args.spectra).write_text(write_spectra_csv(sys_, make_grid(sys_)))
    _emit(text, args.output)
    print(f"# oracle disagreement {gap:.3e} (limit {ORACLE_RTOL:g})", file=sys.stderr)
    if gap > ORACLE_RTOL:
        raise OracleMismatchError(f"spectral and Lyapunov occupations disagree by {gap:.3e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    model, _ = _load(args.config, args.set)
    spec = SweepSpec(model, tuple(parse_axis(a) for a in args.axis), tuple(args.out), Method(args.method))
    table = run_sweep(spec, workers=args.workers)
    _emit(table.to_jsonl() if args.format == "jsonl" else table.to_csv(), args.output)
    return EXIT_OK


def cmd_check_conditions(args) -> int:
    model, _ = _load(args.config, args.set)
    reports = conditions.check_all(model, args.omega)
    if args.format == "jsonl":
        lines = [
            json.dumps({
                "condition": r.condition.value,
                "residual": r.residual,
                "satisfied": r.satisfied,
                "required_phase": r.required_phase,
            })
            for r in reports
        ]
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(conditions.format_table(reports) + "\n", args.output)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    table = reproduce(args.preset)
    _emit(table.to_jsonl() if args.format == "jsonl" else table.to_csv(), args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    model, warns = _load(args.config, args.set)
    sys_ = build_dynamics(model)
    print(
        f"ok: {len(model.optical)} optical, {len(model.mechanical)} mechanical, "
        f"{len(model.couplings)} couplings, convention {model.convention.value}, "
        f"max Re eig(M) = {sys_.max_real_eigenvalue():.4g}"
    )
    for w in warns:
        print(f"warning: {w}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage mistakes are user errors, not argparse's default exit 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noiseflow", description="Thermal noise flow in optomechanical networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config=True):
        if config:
            p.add_argument("config", help="JSON network description")
            p.add_argument("--set", action="append", default=[], metavar="SELECTOR=VALUE", help="parameter override")
        p.add_argument("--output", "-o", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    p = sub.add_parser("simulate", help="steady-state occupations by both routes")
    common(p)
    p.add_argument("--spectra", help="write s_b(w) and T(w) on the default grid to this CSV")
    p.add_argument("--transmission", help="write the integrated T matrix to this CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="one- or two-axis parameter sweep")
    common(p)
    p.add_argument("--axis", action="append", required=True, metavar="SELECTOR=START:STOP:NUM")
    p.add_argument("--out", action="append", required=True, metavar="QUANTITY", help="e.g. n_bar:b1, T:b2->b1")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.LYAPUNOV.value)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check-conditions", help="interference, matching and nonreciprocity residuals")
    common(p)
    p.add_argument("--omega", type=float, default=0.0)
    p.set_defaults(func=cmd_check_conditions)

    p = sub.add_parser("reproduce-figure", help="regenerate figure data and summary metrics")
    p.add_argument("preset", choices=[f.value for f in FigurePreset])
    common(p, config=False)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("validate", help="check a config and list regime warnings")
    p.add_argument("config")
    p.add_argument("--set", action="append", default=[], metavar="SELECTOR=VALUE")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NoiseflowError as exc:
        invariant = getattr(exc, "invariant", None)
        suffix = f" [invariant: {invariant}]" if invariant else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # internal bug: keep the contract, show the cause
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
