"""Scenario orchestration: deploy, discover, enumerate cover sets, simulate, aggregate."""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Optional

from .config import ScenarioConfig
from .metrics import RunMetrics, aggregate
from .netsim import Simulation

log = logging.getLogger(__name__)


def sink_reachable(sim: Simulation) -> bool:
    """Whether every sensor node has a radio path to the sink at its start position."""
    seen = {sim.sink_id}
    stack = [sim.sink_id]
    nbrs = sim.channel.neighbors
    while stack:
        for j in nbrs[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(sim.nodes) + 1


def run_once(config: ScenarioConfig, seed: int, cover_cache: Optional[dict] = None) -> tuple[RunMetrics, Simulation]:
    sim = Simulation(config, seed)
    stats = sim.run(cover_cache=cover_cache)
    counters = dict(stats)
    counters.update(sim.counters)
    counters.update({f"drop_{k}": v for k, v in sorted(sim.drops.items())})
    counters["events"] = len(sim.events)
    if not sink_reachable(sim):
        counters["disconnected_sink_warning"] = 1
        log.warning("seed %d: some nodes have no radio path to the sink", seed)
    m = aggregate(sim.image_results(), counters, config.scenario, seed, config.best_case_latency)
    return m, sim


def _run_seed(args) -> RunMetrics:
    config, seed = args
    return run_once(config, seed)[0]


def run_experiment(config: ScenarioConfig, workers: int = 1) -> list[RunMetrics]:
    """One RunMetrics per seed of the sweep, in seed order."""
    jobs = [(config, s) for s in config.seeds()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_seed, jobs))
    return [_run_seed(j) for j in jobs]


def _run_paired(args) -> list[RunMetrics]:
    config, seed, scenarios = args
    cache: dict = {}
    return [run_once(config.with_(scenario=s), seed, cache)[0] for s in scenarios]


def run_paired(config: ScenarioConfig, scenarios: Iterable[int] = (1, 2, 3), workers: int = 1) -> dict[int, list[RunMetrics]]:
    """Every scenario on every seed, sharing topology and cover sets per seed."""
    scenarios = tuple(scenarios)
    jobs = [(config, s, scenarios) for s in config.seeds()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(_run_paired, jobs))
    else:
        per_seed = [_run_paired(j) for j in jobs]
    return {s: [runs[i] for runs in per_seed] for i, s in enumerate(scenarios)}


class _PinnedBackoff(random.Random):
    """Backoff source that always draws the smallest or the largest slot count."""

    def __init__(self, largest: bool):
        super().__init__(0)
        self.largest = largest

    def randrange(self, n, *args):
        return n - 1 if self.largest else 0


def chain_latency(config: ScenarioConfig, hops: int = 1, seed: int = 1, spacing: float = 100.0,
                  backoff: Optional[str] = None) -> float:
    """Latency of one image sent alone along a straight chain of ``hops`` hops to a static sink.

    ``backoff`` pins every CSMA backoff draw to "min" or "max" slots; None uses the seeded draws.
    """
    layout = [(i * spacing, 0.0, 0.0, 100.0) for i in range(hops)]
    cfg = config.with_(node_count=hops, sink_x=hops * spacing, sink_y=0.0, sink_speed=0.0, sink_waypoints=(),
                       area=(max(config.area[0], (hops + 1) * spacing), config.area[1]))
    sim = Simulation(cfg, seed, layout=layout)
    if backoff is not None:
        if backoff not in ("min", "max"):
            raise ValueError(f"backoff must be 'min' or 'max', got {backoff!r}")
        pinned = _PinnedBackoff(backoff == "max")
        for mac in [n.mac for n in sim.nodes] + [sim.sink.mac]:
            mac.rng = pinned
    sim.discover()
    sim.engine.schedule(sim.beacon_start, sim.sink.sink_process)
    t0 = sim.beacon_start + 1.0
    sim.last_event = t0
    sim.engine.schedule(t0, sim.nodes[0].start_burst, t0)
    sim.engine.run_until(t0 + 4 * cfg.display_timer + 30.0)
    (res,) = sim.image_results()
    if res.latency is None:
        raise RuntimeError("image never reached the sink")
    return res.latency


def serialization_bound(config: ScenarioConfig) -> float:
    """Time to clock the encoded image alone through the radio, ignoring all overheads."""
    return config.encoded_size * 8 / config.bitrate


def latency_band(config: ScenarioConfig, seeds: Iterable[int] = range(1, 6)) -> dict:
    """Single-image, single-hop, contention-free latency under the configured MAC.

    ``low``/``high`` come from pinning every backoff draw to its smallest and
    largest value; ``sampled`` holds the latencies with ordinary seeded draws.
    """
    sampled = [chain_latency(config, 1, seed) for seed in seeds]
    return {
        "bound": serialization_bound(config),
        "low": chain_latency(config, 1, backoff="min"),
        "high": chain_latency(config, 1, backoff="max"),
        "sampled": sampled,
    }
