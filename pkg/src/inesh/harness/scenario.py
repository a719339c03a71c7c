"""Wire one scenario together, run it to its horizon and measure it."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..adversary import AdversaryAssignment, assign
from ..core import TrustTable
from ..kernel import MobileNode, RadioModel, Simulator, EventKind, rng_stream
from ..network import Network
from ..protocols.aodv import AodvRouter
from ..protocols.base import IneshSettings
from ..protocols.dsr import DsrRouter
from ..protocols.messages import DataPacket
from .config import ScenarioConfig
from .metrics import DROP_REASONS, THROUGHPUT_WINDOW, MetricsReport, compute_throughput, cumulative_bits

ROUTERS = {"aodv": AodvRouter, "dsr": DsrRouter}


@dataclass(frozen=True)
class TrafficTick:
    flow: int
    k: int

    def describe(self) -> str:
        return f"flow={self.flow} k={self.k}"


@dataclass
class RunResult:
    config: ScenarioConfig
    report: MetricsReport
    adversary: AdversaryAssignment
    delivery_trace: str
    drop_log: str
    trace: str = ""
    tables: dict[float, str] = field(default_factory=dict)
    network: Network | None = field(default=None, repr=False)


def _place(cfg: ScenarioConfig, rng) -> dict[int, tuple[float, float]]:
    return {v: (rng.uniform(0.0, cfg.terrain_x_m), rng.uniform(0.0, cfg.terrain_y_m))
            for v in range(1, cfg.node_count + 1)}


def run_scenario(cfg: ScenarioConfig, *, positions: Mapping[int, tuple[float, float]] | None = None,
                 with_adversary: bool = True, false_suspicion: float = 0.0, trace: bool = False,
                 dump_tables_at: Sequence[float] = (), keep_network: bool = False) -> RunResult:
    """Run one simulation to ``cfg.duration_s`` and report its metrics.

    ``positions`` overrides the seeded uniform placement.  With
    ``max_speed_mps == 0`` nodes never move.  ``with_adversary=False`` skips the
    adversary module entirely.
    """
    for s, d in cfg.flow_pairs:
        if s == d:
            raise ValueError(f"flow {s}-{d} has identical source and destination")
    if not 0.0 <= false_suspicion <= 1.0:
        raise ValueError(f"false_suspicion must lie in [0, 1], got {false_suspicion}")

    mobility_rng = rng_stream(cfg.seed, "mobility")
    adversary_rng = rng_stream(cfg.seed, "adversary")
    if positions is None:
        positions = _place(cfg, mobility_rng)
    elif sorted(positions) != list(range(1, cfg.node_count + 1)):
        raise ValueError("positions must cover nodes 1..node_count exactly")
    for v, (x, y) in positions.items():
        if not (0.0 <= x <= cfg.terrain_x_m and 0.0 <= y <= cfg.terrain_y_m):
            raise ValueError(f"node {v} at ({x}, {y}) lies outside the terrain")

    if with_adversary:
        endpoints = {v for pair in cfg.flow_pairs for v in pair}
        adversary = assign(cfg.node_count, cfg.malicious_fraction, endpoints, adversary_rng,
                           explicit=dict(cfg.malicious_nodes) or None)
    else:
        adversary = AdversaryAssignment({})

    trace_buf = io.StringIO() if trace else None
    sim = Simulator(horizon=cfg.duration_s, trace=trace_buf)
    nodes = [MobileNode(v, tuple(positions[v])) for v in sorted(positions)]
    net = Network(sim, nodes, RadioModel(cfg.range_m), adversary,
                  mobility_rng=mobility_rng, adversary_rng=adversary_rng,
                  watchdog_rng=rng_stream(cfg.seed, "watchdog"),
                  false_suspicion=false_suspicion, terrain=cfg.terrain,
                  max_speed=cfg.max_speed_mps)
    inesh = IneshSettings(cfg.trust_threshold) if cfg.inesh_enabled else None
    router_cls = ROUTERS[cfg.protocol]
    for v in sorted(positions):
        table = TrustTable(cfg.trust_init, cfg.trust_reward, cfg.trust_penalty)
        net.routers[v] = router_cls(v, net, table, inesh)
    if cfg.max_speed_mps > 0:
        net.start_mobility()

    tables: dict[float, str] = {}
    for t in dump_tables_at:
        net.timer(0, t, lambda t=t: tables.__setitem__(
            t, "\n".join(filter(None, (net.routers[v].dump_table() for v in sorted(net.routers))))),
            f"table-dump t={t}")

    interval = 1.0 / cfg.data_rate_pps
    uid = iter(range(1, 1 << 62))

    def generate(flow_index: int, k: int) -> None:
        src, dest = cfg.flow_pairs[flow_index]
        pkt = DataPacket(next(uid), src, dest, k, sim.now, payload_bytes=cfg.payload_bytes)
        net.ledger.sent += 1
        sim.at((k + 1) * interval, EventKind.TRAFFIC_GENERATION, src, TrafficTick(flow_index, k + 1))
        net.routers[src].send_data(pkt)

    sim.handlers[EventKind.TRAFFIC_GENERATION] = lambda ev: generate(ev.data.flow, ev.data.k)
    for i, (src, _) in enumerate(cfg.flow_pairs):
        sim.at(0.0, EventKind.TRAFFIC_GENERATION, src, TrafficTick(i, 0))

    sim.run()

    ledger = net.ledger
    deliveries = [(t, p.bits) for t, p in ledger.delivered]
    delays = [t - p.sent_at for t, p in ledger.delivered]
    by_reason = {r: 0 for r in DROP_REASONS}
    for _, _, reason, _ in ledger.drops:
        by_reason[reason] = by_reason.get(reason, 0) + 1
    report = MetricsReport(
        sent=ledger.sent,
        delivered=len(ledger.delivered),
        dropped=len(ledger.drops),
        in_flight=net.in_flight(),
        control_packets=ledger.control_tx,
        throughput_series=compute_throughput(deliveries, THROUGHPUT_WINDOW, cfg.duration_s),
        cumulative_bits=cumulative_bits(deliveries, THROUGHPUT_WINDOW, cfg.duration_s),
        mean_end_to_end_delay=math.fsum(delays) / len(delays) if delays else 0.0,
        drops_by_reason=by_reason,
    )
    return RunResult(cfg, report, adversary, ledger.delivery_trace(), ledger.drop_log(),
                     trace_buf.getvalue() if trace_buf else "", tables,
                     net if keep_network else None)
