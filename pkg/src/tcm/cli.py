"""Command-line entry points: simulate, sweep, verify, inequalities, plotdata."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import replace

from .config import ConfigError, load_config
from .io import CheckpointError, read_checkpoint, write_checkpoint, write_series, write_table

log = logging.getLogger("tcm")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_CHECKPOINT = 5
EXIT_NUMERICAL = 6
EXIT_VERIFY = 7


class _Parser(argparse.ArgumentParser):
    """Prints the complete help (every command and flag) on a usage error."""

    def error(self, message):
        sys.stderr.write(f"{self.prog}: error: {message}\n\n")
        sys.stderr.write(full_help())
        raise SystemExit(EXIT_USAGE)


def _float_list(text: str) -> list:
    try:
        values = [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty amplitude list")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tcm", description="Pseudo-spectral tropical climate model toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one simulation and write the diagnostic series")
    s.add_argument("--config", required=True, help="run configuration file")
    s.add_argument("--resume", metavar="CKPT", help="continue from a checkpoint up to the configured horizon")
    s.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")

    s = sub.add_parser("sweep", help="small-data protocol over a list of amplitudes")
    s.add_argument("--config", required=True)
    s.add_argument("--c0", required=True, type=_float_list, metavar="LIST", help='e.g. "1e-3,1e-2"')
    s.add_argument("--workers", type=int, default=1, help="worker processes (TCM_THREADS overrides)")
    s.add_argument("--out", metavar="DIR")

    s = sub.add_parser("verify", help="identity and oracle checks with a summary table")
    s.add_argument("--config", required=True)
    s.add_argument("--quick", action="store_true", help="smaller sample counts")

    s = sub.add_parser("inequalities", help="empirical ratio sweeps for the functional inequalities")
    s.add_argument("--config", required=True)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", metavar="DIR")

    s = sub.add_parser("plotdata", help="split a series CSV into two-column files")
    s.add_argument("--series", required=True, metavar="CSV")
    s.add_argument("--out", required=True, metavar="DIR")
    return p


def full_help() -> str:
    parser = build_parser()
    parts = [parser.format_help()]
    for action in parser._subparsers._group_actions:
        for name, sp in action.choices.items():
            parts.append(f"\n--- {name} ---\n" + sp.format_help())
    return "".join(parts)


def _config(args):
    cfg = load_config(args.config)
    for w in cfg.warnings:
        log.warning(w)
    out = getattr(args, "out", None)
    if out:
        cfg = replace(cfg, output=replace(cfg.output, dir=out))
    os.makedirs(cfg.output.dir, exist_ok=True)
    return cfg


def cmd_simulate(args) -> int:
    from .diagnostics import BlowupMonitor
    from .driver import run
    from .experiments import make_initial_data
    from .spectral import Grid

    cfg = _config(args)
    grid = Grid(cfg.grid.n, cfg.grid.box_length)
    monitor = BlowupMonitor(C_pi=cfg.diagnostics.C_pi, bmo_mode=cfg.diagnostics.bmo_mode)
    params = cfg.model
    if args.resume:
        state, head = read_checkpoint(args.resume, with_header=True)
        if head.n != grid.n or head.box_length != grid.box_length:
            raise CheckpointError(f"{args.resume}: grid n={head.n} does not match config n={grid.n}")
        if head.params != params:
            log.warning("checkpoint parameters differ from config; using the checkpoint's")
            params = head.params
        monitor.pi, monitor.pi_tilde = head.pi, head.pi_tilde
        horizon = max(0.0, cfg.integrator.T - state.time)
    else:
        state = make_initial_data(cfg.initial, grid).state
        horizon = cfg.integrator.T
    it = cfg.integrator
    d = cfg.diagnostics
    result = run(
        state, params, horizon, it.sample_every, dt=it.dt, adaptive=it.adaptive,
        safety=it.safety, dt_max=it.dt_max, monitor=monitor,
        smallness={"C1": d.C1, "C2": d.C2, "eps": d.eps},
    )
    series = result.series
    if args.resume:
        # the checkpoint-time sample already closes the earlier series
        series = series[1:]
    write_series(series, cfg.output.path("series"))
    if cfg.output.checkpoint:
        write_checkpoint(result.state, params, cfg.output.path("checkpoint"), monitor.pi, monitor.pi_tilde)
    print(f"{len(series)} samples, {result.steps} steps -> {cfg.output.path('series')}")
    if result.aborted:
        print(f"aborted: {result.reason}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .experiments import SWEEP_COLUMNS, amplitude_sweep

    cfg = _config(args)
    res = amplitude_sweep(cfg, args.c0, workers=args.workers)
    path = cfg.output.path("sweep")
    write_table(SWEEP_COLUMNS, [[row[c] for c in SWEEP_COLUMNS] for row in res.rows], path)
    for row in res.rows:
        print(f"c0={row['c0']:.3e}  R={row['R']:.3e}  violations={row['violations']}  {row['classification']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verification

    cfg = _config(args)
    report = run_verification(cfg, quick=args.quick)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_inequalities(args) -> int:
    from .inequalities import RatioReport, h1_interpolation_check, standard_battery
    from .spectral import Grid

    if args.samples < 1:
        raise ConfigError([f"--samples must be >= 1 (got {args.samples})"])
    cfg = _config(args)
    grid = Grid(cfg.grid.n, cfg.grid.box_length)
    reports = standard_battery(grid, args.samples, args.seed)
    write_table(RatioReport.CSV_HEADER, [r.row() for r in reports], cfg.output.path("ratios"))
    for r in reports:
        print(f"{r.instance:<18} max={r.max_ratio:.6g} mean={r.mean_ratio:.6g} scale_defect={r.max_scale_defect:.1e}")
    interp = h1_interpolation_check()
    print(
        f"H1 interpolation: exponent 3/4 has scaling defect {interp['three_quarter_defect']}; "
        f"dilation-consistent exponent is {interp['consistent_kappa']}"
    )
    return EXIT_OK


def cmd_plotdata(args) -> int:
    with open(args.series, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "time":
        raise ValueError(f"{args.series}: not a series file")
    header, body = rows[0], rows[1:]
    os.makedirs(args.out, exist_ok=True)
    for j, name in enumerate(header[1:], start=1):
        with open(os.path.join(args.out, f"{name}.dat"), "w", encoding="utf-8") as fh:
            fh.write(f"# time {name}\n")
            for r in body:
                fh.write(f"{r[0]} {r[j]}\n")
    print(f"{len(header) - 1} files -> {args.out}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "inequalities": cmd_inequalities,
    "plotdata": cmd_plotdata,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
