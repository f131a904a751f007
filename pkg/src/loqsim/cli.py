"""Command-line interface.

    loqsim run FILE [--seed S] [--trials N] [--format json|csv] [--out PATH]
    loqsim hom [--steps K] ...
    loqsim cnot-herald ...
    loqsim teleport-cnot --trials N --seed S ...
    loqsim cluster-demo [--alpha A] [--beta B] [--gamma G] ...

Exit codes: 0 on success, 2 on experiment-description errors, 1 on
runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .dsl import SpecError, parse
from .runner import (
    Report,
    cluster_demo_report,
    cnot_herald_report,
    format_report,
    hom_report,
    run,
    teleport_cnot_report,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loqsim",
        description="Desk-scale linear-optical quantum computing simulator",
    )
    parser.add_argument("--version", action="version", version=f"loqsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument(
            "--format", choices=("json", "csv"), default=None, help="output format"
        )
        p.add_argument("--out", type=Path, default=None, help="write to a file")

    p_run = sub.add_parser("run", help="run an experiment description file")
    p_run.add_argument("file", type=Path)
    p_run.add_argument("--trials", type=int, default=None, help="override trial count")
    common(p_run)

    p_hom = sub.add_parser("hom", help="two-photon coincidence vs overlap")
    p_hom.add_argument("--steps", type=int, default=11)
    common(p_hom)

    p_cnot = sub.add_parser("cnot-herald", help="heralded CNOT success table")
    common(p_cnot)

    p_tc = sub.add_parser("teleport-cnot", help="teleported-CNOT resource Monte Carlo")
    p_tc.add_argument("--trials", type=int, default=10000)
    common(p_tc)

    p_cd = sub.add_parser("cluster-demo", help="5-node linear-cluster rotation")
    p_cd.add_argument("--alpha", type=float, default=50.0, help="degrees")
    p_cd.add_argument("--beta", type=float, default=-35.0, help="degrees")
    p_cd.add_argument("--gamma", type=float, default=20.0, help="degrees")
    common(p_cd)

    return parser


def _emit(report: Report, fmt: str, out: Path | None) -> None:
    text = format_report(report, fmt)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    seed = args.seed if args.seed is not None else 0
    try:
        if args.command == "run":
            try:
                text = args.file.read_text()
            except OSError as exc:
                print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
                return 1
            try:
                spec = parse(text)
            except SpecError as exc:
                print(f"{args.file}: {exc}", file=sys.stderr)
                return 2
            fmt = args.format or spec.emit
            report = run(spec, seed=args.seed, trials=args.trials)
        elif args.command == "hom":
            fmt = args.format or "json"
            report = hom_report(steps=args.steps, seed=seed)
        elif args.command == "cnot-herald":
            fmt = args.format or "json"
            report = cnot_herald_report(seed=seed)
        elif args.command == "teleport-cnot":
            fmt = args.format or "json"
            report = teleport_cnot_report(trials=args.trials, seed=seed)
        else:  # cluster-demo
            fmt = args.format or "json"
            report = cluster_demo_report(
                alpha_deg=args.alpha,
                beta_deg=args.beta,
                gamma_deg=args.gamma,
                seed=seed,
            )
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    _emit(report, fmt, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
