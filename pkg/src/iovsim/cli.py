"""Command-line interface: run scenarios, compare modes, sweep seeds.

Outputs per run (under --out): a per-tick CSV (RFC-4180, header row), a
summary JSON, decision and plan logs as JSON lines, and optional SVG charts
per metric family. Exit codes: 0 success, 1 configuration error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import (PRESETS, ScenarioConfig, config_from_dict, load_config,
                     preset, topology_from_dict)
from .engine import World
from .errors import ConfigParseError, ConfigValidationError, SimulationError
from .metrics import (ScenarioSummary, compare, csv_header, record_to_row,
                      summarize)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _resolve_config(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "scenario", None):
        cfg = preset(args.scenario)
    else:
        cfg = ScenarioConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "duration", None) is not None:
        cfg.duration_s = args.duration
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "topology", None):
        with open(args.topology, "r", encoding="utf-8") as fh:
            cfg.topology = json.load(fh)
        topology_from_dict(cfg.topology)
    mode = getattr(args, "mode", None)
    if mode and mode != "both":
        cfg.mode = mode
    return cfg


def run_single(cfg: ScenarioConfig, plot=False):
    """Execute one run, write its artifacts, return (summary, written paths)."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    base = os.path.join(cfg.output_dir, f"{cfg.name}_{cfg.mode}_seed{cfg.seed}")
    written = []
    try:
        world = World(cfg)
        records = world.run()
        summary = summarize(records, name=cfg.name, mode=cfg.mode,
                            seed=cfg.seed, dt=cfg.controller.dt)

        csv_path = base + "_ticks.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(csv_header(world.topology.servers,
                                       [s.name for s in world.topology.switches]))
            for rec in records:
                writer.writerow(record_to_row(rec))
        written.append(csv_path)

        summary_path = base + "_summary.json"
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(summary_path)

        decisions_path = base + "_decisions.jsonl"
        with open(decisions_path, "w", encoding="utf-8") as fh:
            for d in world.decision_log:
                fh.write(json.dumps(dataclasses.asdict(d), sort_keys=True) + "\n")
        written.append(decisions_path)

        plans_path = base + "_plans.jsonl"
        with open(plans_path, "w", encoding="utf-8") as fh:
            for entry in world.plan_log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        written.append(plans_path)

        if plot:
            written.extend(_write_plots(records, world, base))
        return summary, written
    except Exception:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise


def _write_plots(records, world, base):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ticks = [r.tick for r in records]
    files = []

    def save(fig, name):
        path = f"{base}_{name}.svg"
        fig.savefig(path)
        plt.close(fig)
        files.append(path)

    fig, ax = plt.subplots(figsize=(8, 4))
    for i, name in enumerate(world.topology.servers):
        ax.plot(ticks, [r.pm_utilization[i] for r in records], label=name)
    ax.set_xlabel("tick"); ax.set_ylabel("CPU utilization"); ax.legend()
    save(fig, "utilization")

    fig, ax = plt.subplots(figsize=(8, 4))
    for i, name in enumerate(world.topology.servers):
        ax.plot(ticks, [r.pm_power_w[i] for r in records], label=name)
    ax.plot(ticks, [sum(r.pm_power_w) for r in records], label="total", ls="--")
    ax.set_xlabel("tick"); ax.set_ylabel("power [W]"); ax.legend()
    save(fig, "power")

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(ticks, [r.mean_delay_ms for r in records], label="delay")
    ax.plot(ticks, [r.mean_jitter_ms for r in records], label="jitter")
    ax.plot(ticks, [r.mean_setup_ms for r in records], label="setup")
    ax.set_xlabel("tick"); ax.set_ylabel("ms"); ax.legend()
    save(fig, "qos")

    from .metrics import mos, r_factor
    fig, ax = plt.subplots(figsize=(8, 4))
    rs = [r_factor(r.mean_delay_ms, r.lost / r.offered if r.offered else 0.0)
          for r in records]
    ax.plot(ticks, rs, label="R factor")
    ax2 = ax.twinx()
    ax2.plot(ticks, [mos(v) for v in rs], label="MOS", color="tab:orange")
    ax.set_xlabel("tick"); ax.set_ylabel("R"); ax2.set_ylabel("MOS")
    save(fig, "qoe")

    fig, ax = plt.subplots(figsize=(8, 4))
    good = [1.0 - (r.rejected + r.lost) / r.offered if r.offered else 1.0
            for r in records]
    ax.plot(ticks, good)
    ax.set_xlabel("tick"); ax.set_ylabel("goodput fraction")
    save(fig, "goodput")

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(ticks, [r.on_pm_count for r in records], label="PMs on")
    ax.plot(ticks, [r.system_temperature for r in records], label="system temp")
    ax.set_xlabel("tick"); ax.legend()
    save(fig, "resources")
    return files


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    modes = ["proposed", "traditional"] if args.mode == "both" else [cfg.mode]
    summaries = {}
    for mode in modes:
        run_cfg = dataclasses.replace(cfg, mode=mode)
        summary, written = run_single(run_cfg, plot=args.plot)
        summaries[mode] = summary
        print(f"{run_cfg.name} [{mode}] seed={run_cfg.seed}: "
              f"energy={summary.total_energy_kwh:.4f} kWh "
              f"goodput={summary.goodput:.4f} mos={summary.mean_mos:.3f}")
        for path in written:
            print(f"  wrote {path}")
    if args.mode == "both":
        report = compare(summaries["proposed"], summaries["traditional"])
        path = os.path.join(cfg.output_dir,
                            f"{cfg.name}_seed{cfg.seed}_comparison.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"  energy reduction {report.energy_reduction_pct:.1f}% "
              f"(proposed vs traditional), wrote {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    with open(args.summary_a, "r", encoding="utf-8") as fh:
        a = ScenarioSummary.from_dict(json.load(fh))
    with open(args.summary_b, "r", encoding="utf-8") as fh:
        b = ScenarioSummary.from_dict(json.load(fh))
    report = compare(a, b)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def _sweep_worker(cfg_dict):
    cfg = config_from_dict(cfg_dict)
    summary, _ = run_single(cfg)
    return summary.to_dict()


def _parse_seed_range(text):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    seeds = _parse_seed_range(args.seeds)
    modes = ["proposed", "traditional"] if args.mode == "both" else [cfg.mode]
    jobs = []
    for seed in seeds:
        for mode in modes:
            jobs.append(dataclasses.replace(cfg, seed=seed, mode=mode).to_dict())
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(job) for job in jobs]
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, f"{cfg.name}_sweep.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path} ({len(results)} runs)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="iovsim",
                                     description="Software-defined multimedia "
                                     "IoV simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--scenario", choices=sorted(PRESETS))
    run.add_argument("--config", help="scenario configuration file (JSON)")
    run.add_argument("--mode", choices=["proposed", "traditional", "both"],
                     default="proposed")
    run.add_argument("--seed", type=int)
    run.add_argument("--duration", type=float)
    run.add_argument("--out")
    run.add_argument("--topology", help="topology JSON file")
    run.add_argument("--plot", action="store_true")
    run.set_defaults(func=cmd_run)

    cmp_p = sub.add_parser("compare", help="compare two run summaries")
    cmp_p.add_argument("summary_a")
    cmp_p.add_argument("summary_b")
    cmp_p.add_argument("--out")
    cmp_p.set_defaults(func=cmd_compare)

    sweep = sub.add_parser("sweep", help="run a seed sweep")
    sweep.add_argument("--scenario", choices=sorted(PRESETS))
    sweep.add_argument("--config")
    sweep.add_argument("--mode", choices=["proposed", "traditional", "both"],
                       default="proposed")
    sweep.add_argument("--seeds", required=True, help="A:B inclusive or comma list")
    sweep.add_argument("--duration", type=float)
    sweep.add_argument("--out")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
