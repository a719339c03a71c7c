"""Radio medium, watchdog and bookkeeping shared by all routers in one run."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .adversary import AdversaryAssignment, AttackKind, Decision, blackhole_on_rreq, maybe_drop
from .core import CostMode, Graph, Outcome, update_trust
from .kernel import (MOBILITY_TICK, Event, EventKind, MobileNode, RadioModel, Simulator,
                     snapshot_graph, waypoint_advance)
from .protocols.messages import Arrival, ControlMessage, DataPacket, MsgKind

WATCHDOG_TIMEOUT = 0.05
SILENT_REASONS = frozenset({"blackhole", "dropper"})


class Timer:
    def __init__(self, callback: Callable, label: str, args: tuple):
        self.callback = callback
        self.label = label
        self.args = args
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def fire(self) -> None:
        if not self.cancelled:
            self.callback(*self.args)

    def describe(self) -> str:
        return f"timer={self.label.replace(' ', '_')}"


@dataclass
class Ledger:
    """Per-run counters for data and control traffic."""

    sent: int = 0
    delivered: list[tuple[float, DataPacket]] = field(default_factory=list)
    drops: list[tuple[float, int, str, DataPacket]] = field(default_factory=list)
    control_tx: int = 0
    bad_installs: int = 0
    installs: int = 0

    def delivery_trace(self) -> str:
        return "".join(
            f"t={t:.6f} deliver src={p.src} dst={p.dest} seq={p.seq} hops={p.hops}\n"
            for t, p in self.delivered
        )

    def drop_log(self) -> str:
        return "".join(f"t={t:.6f} drop node={v} reason={r}\n" for t, v, r, _ in self.drops)


class Network:
    def __init__(self, sim: Simulator, nodes: list[MobileNode], radio: RadioModel,
                 adversary: AdversaryAssignment | None = None,
                 mobility_rng: random.Random | None = None,
                 adversary_rng: random.Random | None = None,
                 watchdog_rng: random.Random | None = None,
                 false_suspicion: float = 0.0,
                 terrain=(500.0, 550.0), max_speed: float = 20.0):
        self.sim = sim
        self.nodes = {m.id: m for m in nodes}
        self.radio = radio
        self.adversary = adversary or AdversaryAssignment({})
        self.mobility_rng = mobility_rng
        self.adversary_rng = adversary_rng or random.Random(0)
        self.watchdog_rng = watchdog_rng or random.Random(0)
        self.false_suspicion = false_suspicion
        self.terrain = terrain
        self.max_speed = max_speed
        self.routers: dict = {}
        self.ledger = Ledger()
        self.watches: dict[int, tuple[int, int, Timer]] = {}
        self._forged: set[tuple[int, int, int]] = set()
        self.refresh_topology()
        sim.handlers[EventKind.PACKET_ARRIVAL] = self._on_arrival
        sim.handlers[EventKind.TIMER_EXPIRY] = lambda ev: ev.data.fire()
        sim.handlers[EventKind.MOBILITY_UPDATE] = self._on_mobility

    # -- topology ----------------------------------------------------------

    def refresh_topology(self) -> None:
        self.graph: Graph = snapshot_graph(list(self.nodes.values()), self.radio, CostMode.HOP)
        self._adj = {v: frozenset(self.graph.neighbors(v)) for v in self.graph.nodes}

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def linked(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def start_mobility(self) -> None:
        self.sim.at(MOBILITY_TICK, EventKind.MOBILITY_UPDATE)

    def _on_mobility(self, ev: Event) -> None:
        start = ev.fire_at - MOBILITY_TICK
        for v in sorted(self.nodes):
            waypoint_advance(self.nodes[v], MOBILITY_TICK, self.mobility_rng, start,
                             self.terrain, self.max_speed)
        self.refresh_topology()
        self.sim.after(MOBILITY_TICK, EventKind.MOBILITY_UPDATE)

    def note_install(self, node: int, next_hop: int) -> None:
        self.ledger.installs += 1
        if not self.linked(node, next_hop):
            self.ledger.bad_installs += 1

    # -- medium ------------------------------------------------------------

    def timer(self, node: int, delay: float, callback: Callable, label: str, *args) -> Timer:
        t = Timer(callback, label, args)
        self.sim.after(delay, EventKind.TIMER_EXPIRY, node, t)
        return t

    def broadcast(self, sender: int, msg: ControlMessage) -> None:
        self.ledger.control_tx += 1
        for w in sorted(self._adj[sender]):
            self.sim.after(self.radio.per_hop_delay, EventKind.PACKET_ARRIVAL, w,
                           Arrival(sender, msg))

    def unicast(self, sender: int, to: int, msg: ControlMessage) -> bool:
        if not self.linked(sender, to):
            return False
        self.ledger.control_tx += 1
        self.sim.after(self.radio.per_hop_delay, EventKind.PACKET_ARRIVAL, to, Arrival(sender, msg))
        return True

    def transmit(self, sender: int, to: int, pkt: DataPacket) -> None:
        """Send a data packet one hop; callers have already checked the link."""
        self._resolve_watch(pkt, sender, forwarded=True)
        pkt.hops += 1
        self.sim.after(self.radio.per_hop_delay, EventKind.PACKET_ARRIVAL, to, Arrival(sender, pkt))
        router = self.routers[sender]
        if router.inesh is not None and to != pkt.dest:
            t = self.timer(sender, WATCHDOG_TIMEOUT, self._watch_expired,
                           f"watchdog pkt={pkt.uid} next={to}", pkt.uid)
            self.watches[pkt.uid] = (sender, to, t)

    def deliver(self, pkt: DataPacket) -> None:
        self.ledger.delivered.append((self.sim.now, pkt))

    def drop(self, node: int, pkt: DataPacket, reason: str) -> None:
        self.ledger.drops.append((self.sim.now, node, reason, pkt))
        if reason not in SILENT_REASONS:
            # the upstream watchdog overhears the error report
            self._resolve_watch(pkt, node, forwarded=None)

    # -- watchdog ----------------------------------------------------------

    def _resolve_watch(self, pkt: DataPacket, subject: int, forwarded: bool | None) -> None:
        w = self.watches.get(pkt.uid)
        if w is None or w[1] != subject:
            return
        observer, _, t = self.watches.pop(pkt.uid)
        t.cancel()
        if forwarded:
            outcome = Outcome.REWARD
            if self.false_suspicion > 0 and self.watchdog_rng.random() < self.false_suspicion:
                outcome = Outcome.PENALIZE
            update_trust(self.routers[observer].trust, observer, subject, outcome, self.sim.now)

    def _watch_expired(self, uid: int) -> None:
        observer, subject, _ = self.watches.pop(uid)
        update_trust(self.routers[observer].trust, observer, subject, Outcome.PENALIZE,
                     self.sim.now)

    # -- reception ---------------------------------------------------------

    def _on_arrival(self, ev: Event) -> None:
        node, arrival = ev.node, ev.data
        router = self.routers[node]
        profile = self.adversary.get(node)
        if arrival.is_data:
            pkt = arrival.item
            if profile is not None and pkt.dest != node:
                if maybe_drop(profile, pkt, self.adversary_rng) is Decision.DROP:
                    self.drop(node, pkt, profile.reason)
                    return
            router.on_data(pkt, arrival.sender)
            return
        msg = arrival.item
        if not self.linked(node, arrival.sender):
            return
        if (profile is not None and profile.kind is AttackKind.BLACKHOLE
                and msg.kind is MsgKind.RREQ):
            key = (msg.origin, msg.request_id, node)
            if key not in self._forged and msg.origin != node and msg.dest != node:
                self._forged.add(key)
                self.unicast(node, arrival.sender, blackhole_on_rreq(profile, msg, node))
            return
        router.on_control(msg, arrival.sender)

    # -- accounting --------------------------------------------------------

    def in_flight(self) -> int:
        """Data packets still moving or buffered when the run stops."""
        moving = sum(1 for ev in self.sim.pending()
                     if ev.kind is EventKind.PACKET_ARRIVAL and ev.data.is_data)
        return moving + sum(r.buffered() for r in self.routers.values())
