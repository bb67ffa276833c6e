"""Command line entry point: ``camroute [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .config import ConfigError, ScenarioConfig, parse_config
from .experiment import run_experiment, run_paired
from .metrics import export, summarize

# flag -> config key; every flag defaults to None so unset flags never shadow the config file
_FLAGS = [
    ("--nodes", int, "number of camera nodes (default 400)"),
    ("--area", str, "deployment area, WxH metres (default 2000x2000)"),
    ("--range", float, "radio range in metres (default 150)"),
    ("--seed", int, "first seed of the sweep (default 1)"),
    ("--runs", int, "number of seeds (default 1)"),
    ("--alpha", float, "weight of R_2hop in TQ (default 0.5)"),
    ("--beta", float, "weight of R_relay in TQ (default 0.5)"),
    ("--path-factor", float, "paths per image/s of capture rate (default 1)"),
    ("--capture-rate", float, "images per second per source (default 1)"),
    ("--images-per-burst", int, "images each source sends per event (default 1)"),
    ("--energy-floor", float, "minimum member residual energy for selection (default 0)"),
    ("--image-file", str, "raw image bytes to fragment instead of synthetic payloads"),
]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="camroute", description="Cover-set selection and GPSR / T-GPSR image routing "
                                                             "over a simulated camera sensor network.")
    p.add_argument("--scenario", default=None, help="1, 2, 3, or 'all' for a paired run of the three (default 1)")
    for flag, kind, text in _FLAGS:
        p.add_argument(flag, type=kind, default=None, help=text)
    p.add_argument("--config", default=None, help="flat 'key = value' file; flags override it")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any other configuration key (repeatable)")
    p.add_argument("--out", default="results", help="output directory (default ./results)")
    p.add_argument("--format", choices=("csv", "structured"), default="csv")
    p.add_argument("--workers", type=int, default=1, help="parallel processes for the seed sweep")
    p.add_argument("--dry-run", action="store_true", help="print the resolved configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve(args: argparse.Namespace) -> tuple[ScenarioConfig, tuple[int, ...]]:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    for flag, _, _ in _FLAGS:
        overrides[flag[2:]] = getattr(args, flag[2:].replace("-", "_"))
    scenarios: tuple[int, ...] = ()
    if args.scenario is not None:
        if args.scenario == "all":
            scenarios = (1, 2, 3)
        else:
            overrides["scenario"] = args.scenario
    cfg = parse_config(args.config, overrides)
    return cfg, scenarios or (cfg.scenario,)


def _print_config(cfg: ScenarioConfig, scenarios, out) -> None:
    d = cfg.as_dict()
    d["scenario"] = ",".join(map(str, scenarios))
    for k, v in d.pop("mac").items():
        d[f"mac_{k}"] = v
    for k in sorted(d):
        out.write(f"{k} = {d[k]}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg, scenarios = resolve(args)
    except ConfigError as exc:
        print(f"camroute: error: {exc}", file=sys.stderr)
        return 2
    if args.dry_run:
        _print_config(cfg, scenarios, sys.stdout)
        return 0
    if args.workers < 1:
        print("camroute: error: --workers must be >= 1", file=sys.stderr)
        return 2

    if len(scenarios) > 1:
        by_scen = run_paired(cfg, scenarios, workers=args.workers)
        metrics = [m for s in scenarios for m in by_scen[s]]
    else:
        metrics = run_experiment(cfg, workers=args.workers)
    try:
        files = export(metrics, args.format, args.out)
    except OSError as exc:
        print(f"camroute: error: {exc}", file=sys.stderr)
        return 1

    for row in summarize(metrics):
        lat = row["latency_ratio_mean"]
        print(f"scenario {row['scenario']}: runs={row['runs']} loss={row['avg_loss_ratio_mean']:.3f} "
              f"usable={row['usable_mean'] + row['complete_mean']:.2f} "
              f"latency_ratio={'n/a' if lat is None else f'{lat:.2f}'}")
    warned = sum(1 for m in metrics if m.counters.get("disconnected_sink_warning"))
    if warned:
        print(f"warning: {warned} run(s) had nodes without a radio path to the sink")
    for f in files:
        print(f"wrote {f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
