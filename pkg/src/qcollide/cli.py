"""Command-line entry point.

Subcommands: collide (single run, JSON), sweep (CSV), regime (JSON
diagnostics), smatrix (CSV dump of s(E) over the experiment's energy
window). Exit codes: 0 success, 2 configuration error, 3 numerical-quality
failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .kinetics import classify_regime
from .maps import QuadratureError
from .runner import dump_smatrix, run_single, run_sweep
from .smatrix import ClosedChannelError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcollide",
        description="Quantum collision simulator: exact scattering maps, "
                    "semi-classical reductions, and collision thermodynamics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("collide", "run each configured model once and write JSON reports"),
        ("sweep", "run the configured sweep and write a CSV"),
        ("regime", "evaluate the validity-condition ratios and write JSON"),
        ("smatrix", "dump exact S-matrix blocks over the energy window to CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--out", default=None, help="output directory (default: config)")
        p.add_argument("--threads", type=int, default=1, help="sweep worker threads")
        p.add_argument("--quad-tol", type=float, default=None,
                       help="override quadrature refinement tolerance")
        p.add_argument("--ode-tol", type=float, default=None,
                       help="override ODE local-error tolerance")
    return parser


def _load(args) -> tuple:
    config = load_config(args.config)
    if args.ode_tol is not None:
        config.ode_tol = float(args.ode_tol)
    if args.quad_tol is not None:
        config.quadrature = dataclasses.replace(config.quadrature, tol=float(args.quad_tol))
    out_dir = Path(args.out if args.out is not None else config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return config, out_dir


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config, out_dir = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "collide":
            reports = run_single(config)
            payload = {
                "schema_version": 1,
                "reports": {name: rep.to_dict() for name, rep in reports.items()},
            }
            path = out_dir / "collide.json"
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
            print(path)
        elif args.command == "sweep":
            if config.sweep_variable is None:
                print("config error: sweep: missing [sweep] table", file=sys.stderr)
                return EXIT_CONFIG
            csv_text = run_sweep(config, threads=max(1, args.threads))
            path = out_dir / "sweep.csv"
            path.write_text(csv_text)
            print(path)
            if _error_cells(csv_text):
                return EXIT_NUMERICAL
        elif args.command == "regime":
            if config.spatial is None:
                print("config error: potential.spatial: required for regime checks",
                      file=sys.stderr)
                return EXIT_CONFIG
            report = classify_regime(config.kinetic_state(), config.system, config.spatial)
            payload = {"schema_version": 1, "regime": report.to_dict()}
            path = out_dir / "regime.json"
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
            print(path)
        else:  # smatrix
            csv_text = dump_smatrix(config)
            path = out_dir / "smatrix.csv"
            path.write_text(csv_text)
            print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, ClosedChannelError) as exc:
        print(f"numerical-quality failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _error_cells(csv_text: str) -> set[str]:
    import csv as _csv
    import io as _io

    reader = _csv.DictReader(_io.StringIO(csv_text))
    return {row["error"] for row in reader if row.get("error")} or set()


if __name__ == "__main__":
    raise SystemExit(main())
