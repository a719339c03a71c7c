"""Seeded discrete-event engine, random-waypoint mobility and unit-disk radio."""

from __future__ import annotations

import enum
import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, TextIO

from .core import CostMode, Graph, build_graph

TERRAIN = (500.0, 550.0)
MAX_SPEED = 20.0
RANGE_M = 150.0
PER_HOP_DELAY = 0.002
MOBILITY_TICK = 0.5
PAUSE_TIME = 2.0


class EventKind(enum.Enum):
    PACKET_ARRIVAL = "arrival"
    TIMER_EXPIRY = "timer"
    MOBILITY_UPDATE = "mobility"
    TRAFFIC_GENERATION = "traffic"


@dataclass(order=True)
class Event:
    fire_at: float
    seq: int
    kind: EventKind = field(compare=False)
    node: int = field(default=0, compare=False)
    data: Any = field(default=None, compare=False)


class SchedulingError(ValueError):
    """An event was scheduled before the current simulation time."""


def rng_stream(seed: int, concern: str) -> random.Random:
    """Independent generator per concern, so toggling one feature leaves the others' draws alone."""
    return random.Random(f"{seed}/{concern}")


class Simulator:
    """Single-threaded event loop ordered by ``(fire_at, seq)``."""

    def __init__(self, horizon: float = math.inf, trace: TextIO | None = None):
        self.now = 0.0
        self.horizon = horizon
        self.trace = trace
        self._queue: list[Event] = []
        self._seq = 0
        self.handlers: dict[EventKind, Callable[[Event], None]] = {}

    def __len__(self):
        return len(self._queue)

    def at(self, fire_at: float, kind: EventKind, node: int = 0, data: Any = None) -> Event:
        ev = Event(fire_at, self._seq, kind, node, data)
        self.schedule(ev)
        return ev

    def after(self, delay: float, kind: EventKind, node: int = 0, data: Any = None) -> Event:
        return self.at(self.now + delay, kind, node, data)

    def schedule(self, event: Event) -> None:
        if event.fire_at < self.now:
            raise SchedulingError(f"event at t={event.fire_at} is before now={self.now}")
        if event.seq >= self._seq:
            self._seq = event.seq + 1
        heapq.heappush(self._queue, event)

    def step(self) -> Event | None:
        """Fire the next event, or return None when the queue is empty or the horizon is reached.

        Events at exactly the horizon are left unfired.
        """
        if not self._queue or self._queue[0].fire_at >= self.horizon:
            return None
        ev = heapq.heappop(self._queue)
        self.now = ev.fire_at
        if self.trace is not None:
            self.trace.write(f"t={ev.fire_at:.6f} ev={ev.kind.value} node={ev.node}{_describe(ev.data)}\n")
        handler = self.handlers.get(ev.kind)
        if handler is not None:
            handler(ev)
        return ev

    def run(self) -> int:
        fired = 0
        while self.step() is not None:
            fired += 1
        if self.horizon != math.inf:
            self.now = max(self.now, self.horizon)
        return fired

    def pending(self) -> list[Event]:
        return sorted(self._queue)


def _describe(data: Any) -> str:
    if data is None:
        return ""
    describe = getattr(data, "describe", None)
    if describe is not None:
        return " " + describe()
    return f" data={data}"


@dataclass
class MobileNode:
    id: int
    position: tuple[float, float]
    waypoint: tuple[float, float] | None = None
    speed: float = 0.0
    pause_until: float = 0.0


@dataclass(frozen=True)
class RadioModel:
    range: float = RANGE_M
    per_hop_delay: float = PER_HOP_DELAY

    def __post_init__(self):
        if self.range <= 0:
            raise ValueError(f"radio range must be positive, got {self.range}")
        if self.per_hop_delay < 0:
            raise ValueError(f"per-hop delay must be >= 0, got {self.per_hop_delay}")


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def in_range(a: MobileNode, b: MobileNode, radio: RadioModel) -> bool:
    return distance(a.position, b.position) <= radio.range


def draw_waypoint(rng: random.Random, terrain=TERRAIN) -> tuple[float, float]:
    return (rng.uniform(0.0, terrain[0]), rng.uniform(0.0, terrain[1]))


def draw_speed(rng: random.Random, max_speed: float = MAX_SPEED) -> float:
    # uniform on (0, max_speed]
    return max_speed * (1.0 - rng.random())


def _clamp(p, terrain):
    return (min(max(p[0], 0.0), terrain[0]), min(max(p[1], 0.0), terrain[1]))


def waypoint_advance(node: MobileNode, dt: float, rng: random.Random, now: float = 0.0,
                     terrain=TERRAIN, max_speed: float = MAX_SPEED,
                     pause: float = PAUSE_TIME) -> MobileNode:
    """Move ``node`` through the interval ``[now, now + dt]`` under random waypoint.

    On reaching its waypoint a node pauses for ``pause`` seconds, then heads for a
    fresh uniform waypoint at a fresh uniform speed.  Mutates and returns ``node``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    t, end = now, now + dt
    while t < end:
        if node.pause_until > t:
            t = min(end, node.pause_until)
            continue
        if node.waypoint is None:
            node.waypoint = draw_waypoint(rng, terrain)
            node.speed = draw_speed(rng, max_speed)
        remaining = distance(node.position, node.waypoint)
        if remaining == 0.0:
            node.waypoint = None
            node.pause_until = t + pause
            if pause <= 0:
                # zero pause: draw the next leg right away
                node.waypoint = draw_waypoint(rng, terrain)
                node.speed = draw_speed(rng, max_speed)
            continue
        budget = node.speed * (end - t)
        if budget < remaining:
            f = budget / remaining
            x, y = node.position
            wx, wy = node.waypoint
            node.position = _clamp((x + (wx - x) * f, y + (wy - y) * f), terrain)
            t = end
        else:
            t += remaining / node.speed
            node.position = node.waypoint
    return node


def snapshot_graph(nodes: list[MobileNode], radio: RadioModel,
                   cost_mode: CostMode = CostMode.HOP) -> Graph:
    return build_graph({m.id: m.position for m in nodes}, radio.range, cost_mode)
