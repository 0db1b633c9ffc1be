"""Command-line entry point.

Subcommands: ``sweep`` (displacement sweep -> CSV), ``wigner``
(phase-space panels -> text grids), ``calibrate`` (temperature-sweep fit
-> JSON) and ``selftest`` (analytic invariant suite). Exit codes:
0 success, 1 selftest violation, 2 configuration error, 3 reconstruction
failure in a sweep, 4 calibration fit failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .calibration import IllConditionedFitError
from .harness import (
    ConfigError,
    OUTPUT_DIR_ENV,
    export_wigner_panels,
    load_config,
    run_calibration,
    run_displacement_sweep,
    write_sweep_csv,
)
from .selftest import run_selftest

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_CONFIG = 2
EXIT_RECONSTRUCTION = 3
EXIT_FIT = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sqdisp",
        description="Simulate displacement of propagating squeezed microwave states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("sweep", "run the displacement sweep and write sweep.csv"),
        ("wigner", "export phase-space panels of the displaced states"),
        ("calibrate", "simulate and fit the calibration temperature sweep"),
    ):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="path to the JSON configuration")
        cmd.add_argument("--seed", type=int, default=None, help="override the configured seed")
        cmd.add_argument("--out", default=None, help="override the output directory")
        cmd.add_argument(
            "--samples", type=int, default=None,
            help="override samples per point (0 selects analytic moments)",
        )
    sub.add_parser("selftest", help="run the analytic invariant suite")
    return parser


def _load(args):
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["outputs"] = args.out
    elif os.environ.get(OUTPUT_DIR_ENV):
        overrides["outputs"] = os.environ[OUTPUT_DIR_ENV]
    if args.samples is not None:
        overrides["samples_per_point"] = args.samples
    return dataclasses.replace(config, **overrides) if overrides else config


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return EXIT_OK if run_selftest() else EXIT_SELFTEST
    try:
        config = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "sweep":
        rows = run_displacement_sweep(config)
        os.makedirs(config.outputs, exist_ok=True)
        path = os.path.join(config.outputs, "sweep.csv")
        write_sweep_csv(rows, path)
        failed = [row for row in rows if row.error]
        print(f"wrote {path} ({len(rows)} rows, {len(failed)} failed)")
        for row in failed:
            print(
                f"  failed point power={row.power_dbm} theta={row.theta_deg}: {row.error}",
                file=sys.stderr,
            )
        return EXIT_RECONSTRUCTION if failed else EXIT_OK
    if args.command == "wigner":
        paths = export_wigner_panels(config)
        for path in paths:
            print(f"wrote {path}")
        return EXIT_OK
    if args.command == "calibrate":
        try:
            result, path = run_calibration(config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except IllConditionedFitError as exc:
            print(f"fit error: {exc}", file=sys.stderr)
            return EXIT_FIT
        print(
            f"wrote {path} (gain {result.total_gain:.6g}, "
            f"noise {result.noise_photons:.6g} photons, residual {result.fit_residual:.3g})"
        )
        return EXIT_OK
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
