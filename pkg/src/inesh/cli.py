"""Command line entry point: ``inesh simulate`` and ``inesh campaign``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness.campaign import CampaignError, format_tables, parse_campaign, run_campaign, write_outputs
from .harness.config import ConfigError, ScenarioConfig, parse_config
from .harness.scenario import run_scenario

log = logging.getLogger("inesh")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="inesh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run one scenario")
    sim.add_argument("--config", type=Path, help="scenario file (defaults apply when omitted)")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--protocol", choices=("aodv", "dsr"))
    sim.add_argument("--inesh", action="store_true", default=None,
                     help="enable trust-filtered next-hop admission")
    sim.add_argument("--duration", type=float, help="simulated seconds")
    sim.add_argument("--out", type=Path, default=Path("."), help="output directory")
    sim.add_argument("--trace", action="store_true", help="also write trace.log and drops.log")

    camp = sub.add_parser("campaign", parents=[common], help="run a sweep of scenarios")
    camp.add_argument("--spec", type=Path, required=True)
    camp.add_argument("--out", type=Path, required=True)
    camp.add_argument("--workers", type=int, default=1)
    return parser


def _load_config(args) -> ScenarioConfig:
    cfg = parse_config(args.config.read_text()) if args.config else ScenarioConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.protocol is not None:
        overrides["protocol"] = args.protocol
    if args.inesh:
        overrides["inesh_enabled"] = True
    if args.duration is not None:
        overrides["duration_s"] = args.duration
    return cfg.but(**overrides) if overrides else cfg


def simulate(args) -> int:
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    try:
        result = run_scenario(cfg, trace=args.trace)
    except Exception as e:
        log.error("run failed: %s", e)
        return EXIT_RUNTIME
    summary_csv, throughput_csv = format_tables(
        [(cfg, result.report, len(result.adversary.nodes))])
    write_outputs(args.out, summary_csv, throughput_csv)
    if args.trace:
        (args.out / "trace.log").write_text(result.trace)
        (args.out / "drops.log").write_text(result.drop_log)
    r = result.report
    log.info("sent=%d delivered=%d pdr=%.4f overhead=%.3f", r.sent, r.delivered, r.pdr,
             r.routing_overhead)
    return EXIT_OK


def campaign(args) -> int:
    try:
        spec = parse_campaign(args.spec.read_text())
    except (ConfigError, OSError) as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    try:
        run_campaign(spec, args.out, workers=args.workers)
    except CampaignError as e:
        log.error("%s", e)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return simulate(args) if args.command == "simulate" else campaign(args)


if __name__ == "__main__":
    sys.exit(main())
