"""
Command-line front end.

Subcommands::

    simulate           Monte Carlo + closed-form rates over a sweep, CSV out
    analyze            closed-form rates only (trials = 0)
    check-assumption2  linear-independence margins of every user
    plot               render a figure from a sweep CSV

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .asymptotics import check_assumption2
from .channel_stats import build_statistics
from .detection import DETECTORS
from .linalg import NumericalError
from .metrics import TrialError
from .scenario import ZS_MODES, ConfigError, builtin_scenario_path, load_scenario
from .sweep import (DEFAULT_N, DEFAULT_SIGMA, point_config, read_csv, run_sweep, write_csv)

log = logging.getLogger("ricianmimo")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def parse_sweep(text: str | None, corr_kind: str):
    """``"n=32,64"`` or ``"sigma=0,2,4"``; defaults depend on the correlation model."""
    if text is None:
        if corr_kind == "lognormal_diag":
            return "sigma", list(DEFAULT_SIGMA)
        return "n", list(DEFAULT_N)
    name, sep, values = text.partition("=")
    name = name.strip().lower()
    if not sep or name not in ("n", "sigma"):
        raise ConfigError(f"bad --sweep {text!r}: expected n=... or sigma=...")
    try:
        if name == "n":
            vals = [int(v) for v in values.split(",") if v.strip()]
        else:
            vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --sweep values {values!r}") from None
    if not vals:
        raise ConfigError("--sweep needs at least one value")
    return name, vals


def parse_detectors(text: str):
    dets = [d.strip().lower().replace("-", "") for d in text.split(",") if d.strip()]
    bad = [d for d in dets if d not in DETECTORS]
    if bad or not dets:
        raise ConfigError(f"unknown detectors {bad}; choose from {', '.join(DETECTORS)}")
    return tuple(d for d in DETECTORS if d in dets)


def _load(args):
    path = args.config or builtin_scenario_path("scenario1")
    cfg = load_scenario(path)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["base_seed"] = args.seed
    if getattr(args, "zs_mode", None) is not None:
        changes["zs_mode"] = args.zs_mode
    return cfg.replace(**changes) if changes else cfg


def cmd_sweep(args, trials: int) -> int:
    cfg = _load(args)
    axis, values = parse_sweep(args.sweep, cfg.corr_model.kind)
    detectors = parse_detectors(args.detectors)
    rows = run_sweep(cfg, axis, values, detectors, trials=trials, workers=args.workers)
    write_csv(rows, args.out, unit=args.unit)
    log.info("wrote %d rows to %s", len(rows), args.out)
    if args.figure:
        from .plotting import plot_rates
        plot_rates(read_csv(args.out), args.figure, axis=axis, unit=args.unit)
        log.info("wrote figure %s", args.figure)
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _load(args)
    axis, values = parse_sweep(args.sweep, cfg.corr_model.kind) if args.sweep else (None, [None])
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("axis", "cell", "user", "other_cell", "margin", "min_margin"))
        for v in values:
            point = cfg if v is None else point_config(cfg, axis, v)
            stats = build_statistics(point)
            for j, k in np.ndindex(point.L, point.K):
                m = check_assumption2(stats, j, k)
                for lp in range(point.L):
                    writer.writerow(("" if v is None else format(v, "g"), j, k, lp,
                                     format(m[lp], ".10g"), format(m.min(), ".10g")))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_rates
    records = read_csv(args.csv)
    plot_rates(records, args.out, axis=args.axis, unit=args.unit, title=args.title)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ricianmimo", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_trials: bool):
        sp.add_argument("--config", help="scenario YAML (default: bundled scenario1)")
        sp.add_argument("--sweep", help="n=32,64,... or sigma=0,1,...")
        sp.add_argument("--detectors", default="mrc,smmse,mmmse")
        sp.add_argument("--zs-mode", choices=ZS_MODES, default=None)
        if with_trials:
            sp.add_argument("--trials", type=int, default=1000)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--unit", choices=("nats", "bits"), default="nats")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", required=True, help="CSV output path")
        sp.add_argument("--figure", help="also render a PNG/PDF figure to this path")

    common(sub.add_parser("simulate", help="Monte Carlo and closed-form rates"), True)
    common(sub.add_parser("analyze", help="closed-form rates only"), False)

    chk = sub.add_parser("check-assumption2", help="linear-independence margins")
    chk.add_argument("--config")
    chk.add_argument("--sweep")
    chk.add_argument("--seed", type=int, default=None)
    chk.add_argument("--out")

    plot = sub.add_parser("plot", help="figure from a sweep CSV")
    plot.add_argument("csv")
    plot.add_argument("--axis", choices=("n", "sigma"), default="n")
    plot.add_argument("--unit", choices=("nats", "bits"), default="nats")
    plot.add_argument("--title")
    plot.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            if args.trials < 0:
                raise ConfigError("--trials must be >= 0")
            return cmd_sweep(args, args.trials)
        if args.command == "analyze":
            return cmd_sweep(args, 0)
        if args.command == "check-assumption2":
            return cmd_check(args)
        return cmd_plot(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, TrialError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
