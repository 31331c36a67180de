"""``mmshare-sim`` command line.

    mmshare-sim run   [--config FILE] [--scenario s1..s4] [--model m1..m4] [--drops N]
                      [--seed S] [--out DIR] [--format csv|json] [--plot] [--workers W]
    mmshare-sim sweep [same options, minus --scenario/--model]

Exit status: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io, plot
from .config import (ChannelModel, ConfigError, Scenario, SimulationConfig, load_config, parse_model,
                     parse_scenario, validate)
from .engine import run_campaign
from .metrics import rate_coverage, rate_grid_bps, sinr_coverage, sinr_grid_db

log = logging.getLogger("mmshare")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _label(config: SimulationConfig) -> str:
    return f"{config.scenario.short}/{config.channel_model.short}"


def _grids(args):
    sinr_th = sinr_grid_db(args.sinr_min, args.sinr_max, args.sinr_step)
    rate_th = rate_grid_bps(args.rate_min, args.rate_max, args.rate_points)
    return sinr_th, rate_th


def _base_config(args) -> SimulationConfig:
    config = load_config(args.config) if args.config else SimulationConfig()
    changes = {}
    try:
        if getattr(args, "scenario", None):
            changes["scenario"] = parse_scenario(args.scenario)
        if getattr(args, "model", None):
            changes["channel_model"] = parse_model(args.model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.drops is not None:
        changes["num_drops"] = args.drops
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    config = config.replace(**changes)
    problems = validate(config)
    if problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems), problems)
    if config.num_drops == 0:
        raise ConfigError("num_drops is 0: nothing to simulate or export")
    return config


def _simulate(config, args, sinr_th, rate_th, out_dir: Path):
    t0 = time.perf_counter()
    results = run_campaign(config, workers=args.workers)
    label = _label(config)
    curves = [sinr_coverage(results, sinr_th, label), rate_coverage(results, rate_th, label)]
    io.export(results, curves, out_dir, args.format, config)
    outage = np.mean([r.outage for r in results]) if results else float("nan")
    log.info("%s: %d drops in %.1fs, outage %.3f, median SINR %.1f dB", label, len(results),
             time.perf_counter() - t0, outage, np.median([r.sinr_db for r in results]))
    return results, curves


def cmd_run(args) -> int:
    config = _base_config(args)
    sinr_th, rate_th = _grids(args)
    out = Path(args.out)
    _, curves = _simulate(config, args, sinr_th, rate_th, out)
    if args.plot:
        plot.emit_plot([curves[0]], out / "sinr_coverage.svg", f"SINR coverage, {_label(config)}")
        plot.emit_plot([curves[1]], out / "rate_coverage.svg", f"Rate coverage, {_label(config)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _base_config(args)
    sinr_th, rate_th = _grids(args)
    out = Path(args.out)
    curves = {}
    for sc in Scenario:
        for m in ChannelModel:
            cfg = base.replace(scenario=sc, channel_model=m)
            _, (cs, cr) = _simulate(cfg, args, sinr_th, rate_th, out / f"{sc.short}_{m.short}")
            curves[sc, m] = (cs, cr)
    all_sinr = [curves[k][0] for k in curves]
    all_rate = [curves[k][1] for k in curves]
    plot.emit_plot(all_sinr, out / "sinr_coverage.svg", "SINR coverage, all scenarios and models")
    plot.emit_plot(all_rate, out / "rate_coverage.svg", "Rate coverage, all scenarios and models")
    # per-figure views: each scenario across models, and Model 3 across scenarios
    for sc in Scenario:
        plot.emit_plot([curves[sc, m][0] for m in ChannelModel], out / f"sinr_coverage_{sc.short}.svg",
                       f"SINR coverage, {sc.name}, all models")
    m3 = ChannelModel.Model3
    plot.emit_plot([curves[sc, m3][0] for sc in Scenario], out / "sinr_coverage_m3.svg",
                   "SINR coverage, Model 3, all scenarios")
    plot.emit_plot([curves[sc, m3][1] for sc in Scenario], out / "rate_coverage_m3.svg",
                   "Rate coverage, Model 3, all scenarios")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmshare-sim",
                                     description="Multi-operator mmWave sharing Monte Carlo simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value configuration file (defaults if omitted)")
        p.add_argument("--drops", type=int, help="number of Monte Carlo drops")
        p.add_argument("--seed", type=int, help="RNG seed (overrides config and MMSHARE_SEED)")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--sinr-min", type=float, default=-20.0)
        p.add_argument("--sinr-max", type=float, default=60.0)
        p.add_argument("--sinr-step", type=float, default=1.0)
        p.add_argument("--rate-min", type=float, default=1e5)
        p.add_argument("--rate-max", type=float, default=1e10)
        p.add_argument("--rate-points", type=int, default=50)

    run = sub.add_parser("run", help="one scenario/model campaign")
    common(run)
    run.add_argument("--scenario", help="s1|s2|s3|s4 or scenario name")
    run.add_argument("--model", help="m1|m2|m3|m4 or model name")
    run.add_argument("--plot", action="store_true", help="also write SVG coverage plots")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="full 4x4 scenario x model grid with comparison plots")
    common(sweep)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mmshare-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"mmshare-sim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
