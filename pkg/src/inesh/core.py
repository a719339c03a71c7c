"""Trust-filtered shortest path search (INESH) and its brute-force oracle.

Nodes are integers ``1..n``.  A :class:`TrustTable` holds one observer's view
of its peers; :func:`inesh_search` removes peers that fail the trust filter and
runs a priority-queue min-cost search over what is left.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

INF = math.inf

DEFAULT_THRESHOLD = 0.5
DEFAULT_INITIAL_TRUST = 0.5
DEFAULT_REWARD = 0.1
DEFAULT_PENALTY = 0.2

ORACLE_MAX_NODES = 14


class CostMode(enum.Enum):
    HOP = "hop"
    EUCLIDEAN = "euclidean"


class ObservationKind(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Outcome(enum.Enum):
    REWARD = "reward"
    PENALIZE = "penalize"


class Verdict(enum.Enum):
    KEEP = "keep"
    EXCLUDE = "exclude"


class UnknownNodeError(KeyError):
    """Raised when a search names a node the graph does not contain."""


@dataclass(frozen=True)
class Observation:
    kind: ObservationKind
    sim_time: float = 0.0

    def __post_init__(self):
        if self.sim_time < 0:
            raise ValueError(f"observation time must be >= 0, got {self.sim_time}")


@dataclass
class Graph:
    """Undirected weighted graph stored as symmetric adjacency lists."""

    n: int
    adjacency: dict[int, list[tuple[int, float]]] = field(default_factory=dict)

    def __post_init__(self):
        for v in range(1, self.n + 1):
            self.adjacency.setdefault(v, [])

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def __contains__(self, node: object) -> bool:
        return isinstance(node, int) and 1 <= node <= self.n

    def neighbors(self, node: int) -> list[int]:
        return [w for w, _ in self.adjacency[node]]

    def cost(self, u: int, w: int) -> float:
        for x, c in self.adjacency[u]:
            if x == w:
                return c
        raise KeyError((u, w))

    def add_edge(self, u: int, w: int, cost: float = 1.0) -> None:
        if u == w:
            raise ValueError(f"self-loop on node {u}")
        if cost < 0:
            raise ValueError(f"negative edge cost {cost} on ({u}, {w})")
        for v in (u, w):
            if v not in self:
                raise UnknownNodeError(v)
        self.adjacency[u].append((w, cost))
        self.adjacency[w].append((u, cost))
        self.adjacency[u].sort()
        self.adjacency[w].sort()

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency.values()) // 2

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple]) -> "Graph":
        """Build from ``(u, w)`` or ``(u, w, cost)`` tuples; cost defaults to 1."""
        g = cls(n)
        for e in edges:
            g.add_edge(*e)
        return g

    def dump(self) -> str:
        lines = []
        for v in self.nodes:
            adj = " ".join(f"{w}:{c:.3f}" for w, c in self.adjacency[v])
            lines.append(f"{v}: {adj}".rstrip())
        return "\n".join(lines) + "\n"


@dataclass
class TrustTable:
    """Trust scores in [0, 1] and first-hand observations, keyed by (observer, subject)."""

    initial: float = DEFAULT_INITIAL_TRUST
    reward: float = DEFAULT_REWARD
    penalty: float = DEFAULT_PENALTY
    trust: dict[tuple[int, int], float] = field(default_factory=dict)
    observations: dict[tuple[int, int], list[Observation]] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.initial <= 1.0:
            raise ValueError(f"initial trust must lie in [0, 1], got {self.initial}")
        if self.reward < 0 or self.penalty < 0:
            raise ValueError("reward and penalty magnitudes must be non-negative")

    def get(self, observer: int, subject: int) -> float:
        return self.trust.get((observer, subject), self.initial)

    def set(self, observer: int, subject: int, value: float) -> None:
        self.trust[(observer, subject)] = min(1.0, max(0.0, value))

    def last_observation(self, observer: int, subject: int) -> Observation | None:
        obs = self.observations.get((observer, subject))
        return obs[-1] if obs else None

    def last_is_negative(self, observer: int, subject: int) -> bool:
        last = self.last_observation(observer, subject)
        return last is not None and last.kind is ObservationKind.NEGATIVE

    def suspects(self, observer: int) -> list[int]:
        """Subjects whose latest observation by ``observer`` is negative."""
        return sorted(
            s for (o, s), obs in self.observations.items()
            if o == observer and obs and obs[-1].kind is ObservationKind.NEGATIVE
        )


def update_trust(table: TrustTable, observer: int, subject: int,
                 outcome: Outcome, now: float = 0.0) -> float:
    """Reward or penalize ``subject`` in ``observer``'s view and log the observation."""
    current = table.get(observer, subject)
    if outcome is Outcome.REWARD:
        value = current + table.reward
        kind = ObservationKind.POSITIVE
    else:
        value = current - table.penalty
        kind = ObservationKind.NEGATIVE
    table.set(observer, subject, value)
    table.observations.setdefault((observer, subject), []).append(Observation(kind, now))
    return table.trust[(observer, subject)]


def trust_filter(candidate: int, best_alternative: int | None, table: TrustTable,
                 observer: int, threshold: float = DEFAULT_THRESHOLD) -> Verdict:
    """Decide whether ``candidate`` should be dropped in favour of ``best_alternative``.

    A candidate is excluded only when all three hold: it is less trusted than
    the alternative, the observer's latest first-hand record of it is negative,
    and its trust is below ``threshold``.  With no alternative there is nothing
    to prefer, so the candidate is kept.
    """
    if candidate == observer:
        raise ValueError("observer cannot screen itself")
    if best_alternative is None:
        return Verdict.KEEP
    t_cand = table.get(observer, candidate)
    if (t_cand < table.get(observer, best_alternative)
            and table.last_is_negative(observer, candidate)
            and t_cand < threshold):
        return Verdict.EXCLUDE
    return Verdict.KEEP


def build_graph(positions: Mapping[int, tuple[float, float]] | Iterable[tuple[int, tuple[float, float]]],
                range_m: float, cost_mode: CostMode = CostMode.HOP) -> Graph:
    """Unit-disk graph: ``u`` and ``w`` are linked iff their distance is at most ``range_m``."""
    items = list(positions.items()) if isinstance(positions, Mapping) else list(positions)
    if not items:
        raise ValueError("positions must be non-empty")
    if range_m <= 0:
        raise ValueError(f"range must be positive, got {range_m}")
    ids = [v for v, _ in items]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate node ids in positions")
    n = max(ids)
    if sorted(ids) != list(range(1, n + 1)):
        raise ValueError("node ids must be exactly 1..n")
    items.sort()
    g = Graph(n)
    for i, (u, (ux, uy)) in enumerate(items):
        row = g.adjacency[u]
        for w, (wx, wy) in items[i + 1:]:
            d = math.hypot(ux - wx, uy - wy)
            if d <= range_m:
                c = 1.0 if cost_mode is CostMode.HOP else d
                row.append((w, c))
                g.adjacency[w].append((u, c))
    for row in g.adjacency.values():
        row.sort()
    return g


@dataclass
class PathResult:
    path: list[int]
    total_cost: float
    sdist: dict[int, float]
    excluded: set[int] = field(default_factory=set)

    @property
    def reachable(self) -> bool:
        return bool(self.path)

    def dump(self) -> str:
        path = ",".join(map(str, self.path))
        cost = "inf" if math.isinf(self.total_cost) else f"{self.total_cost:g}"
        excl = ",".join(map(str, sorted(self.excluded)))
        return f"path={path} cost={cost} excluded={excl}"


def best_alternative(graph: Graph, table: TrustTable, observer: int, candidate: int) -> int | None:
    """Most trusted node competing with ``candidate`` for a hop.

    Competitors are the other neighbors of any node adjacent to ``candidate``,
    i.e. every node that could be picked instead of it at some hop.  Ties go
    to the lower id.
    """
    best, best_t = None, -1.0
    seen = {candidate, observer}
    for v in graph.neighbors(candidate):
        for w in graph.neighbors(v):
            if w in seen:
                continue
            seen.add(w)
            t = table.get(observer, w)
            if t > best_t or (t == best_t and w < best):
                best, best_t = w, t
    return best


def screen_nodes(graph: Graph, table: TrustTable, observer: int, source: int, dest: int,
                 threshold: float = DEFAULT_THRESHOLD) -> set[int]:
    """Nodes removed from the search by the trust filter.

    Source, destination and the observer are never screened.  Only nodes with
    a negative latest observation can fail the filter, so others are skipped.
    """
    excluded = set()
    for v in table.suspects(observer):
        if v in (source, dest, observer) or v not in graph:
            continue
        alt = best_alternative(graph, table, observer, v)
        if trust_filter(v, alt, table, observer, threshold) is Verdict.EXCLUDE:
            excluded.add(v)
    return excluded


def _check_endpoints(graph: Graph, *nodes: int) -> None:
    for v in nodes:
        if v not in graph:
            raise UnknownNodeError(v)


def inesh_search(graph: Graph, table: TrustTable, source: int, dest: int,
                 threshold: float = DEFAULT_THRESHOLD, *, observer: int | None = None,
                 reward_on_select: bool = False, now: float = 0.0,
                 first_hops: Iterable[int] | None = None) -> PathResult:
    """Min-cost path from ``source`` to ``dest`` over trust-admissible nodes.

    ``observer`` defaults to ``source``.  ``first_hops`` optionally restricts
    which neighbors of the source may start the path.  With
    ``reward_on_select`` every intermediate node on the returned path is
    rewarded in ``table``.
    """
    _check_endpoints(graph, source, dest)
    if observer is None:
        observer = source
    excluded = screen_nodes(graph, table, observer, source, dest, threshold)
    allowed_first = None if first_hops is None else set(first_hops)

    sdist = {v: INF for v in graph.nodes}
    sdist[source] = 0.0
    prev: dict[int, int] = {}
    settled = set()
    queue = [(sdist[v], v) for v in graph.nodes]
    heapq.heapify(queue)
    while queue:
        d, v = heapq.heappop(queue)
        if v in settled or d > sdist[v]:
            continue
        if d == INF:
            break
        settled.add(v)
        for w, c in graph.adjacency[v]:
            if w in excluded or w in settled:
                continue
            if v == source and allowed_first is not None and w not in allowed_first:
                continue
            nd = d + c
            if nd < sdist[w] or (nd == sdist[w] and v < prev.get(w, v)):
                sdist[w] = nd
                prev[w] = v
                heapq.heappush(queue, (nd, w))

    for v in graph.nodes:
        if v not in settled:
            sdist[v] = INF

    if sdist[dest] == INF:
        return PathResult([], INF, sdist, excluded)
    path = [dest]
    while path[-1] != source:
        path.append(prev[path[-1]])
    path.reverse()
    total = 0.0
    for u, w in zip(path, path[1:]):
        total += graph.cost(u, w)
    if reward_on_select:
        for v in path[1:-1]:
            update_trust(table, observer, v, Outcome.REWARD, now)
    return PathResult(path, total, sdist, excluded)


def oracle_search(graph: Graph, table: TrustTable, source: int, dest: int,
                  threshold: float = DEFAULT_THRESHOLD, *, observer: int | None = None) -> PathResult:
    """Exhaustive reference for :func:`inesh_search` on small graphs.

    Walks every simple path, rejects any path with an interior node that some
    hop into it would screen out, and keeps the cheapest survivor (ties go to
    the lexicographically smallest path).
    """
    if graph.n > ORACLE_MAX_NODES:
        raise ValueError(f"oracle refuses graphs above {ORACLE_MAX_NODES} nodes (got {graph.n})")
    _check_endpoints(graph, source, dest)
    if observer is None:
        observer = source

    def rejected_at_some_hop(w):
        if w in (source, dest, observer):
            return False
        for v in graph.neighbors(w):
            siblings = [x for x in graph.neighbors(v) if x != w and x != observer]
            if not siblings:
                continue
            top = max(table.get(observer, x) for x in siblings)
            alt = min(x for x in siblings if table.get(observer, x) == top)
            if trust_filter(w, alt, table, observer, threshold) is Verdict.EXCLUDE:
                return True
        return False

    excluded = {w for w in graph.nodes if rejected_at_some_hop(w)}

    best_cost, best_path = INF, []
    stack = [(source, [source], 0.0)]
    while stack:
        v, path, cost = stack.pop()
        if cost > best_cost:
            continue
        if v == dest:
            if cost < best_cost or (cost == best_cost and path < best_path):
                best_cost, best_path = cost, path
            continue
        for w, c in graph.adjacency[v]:
            if w in path or w in excluded or cost + c > best_cost:
                continue
            stack.append((w, path + [w], cost + c))

    sdist = {v: INF for v in graph.nodes}
    if best_path:
        acc = 0.0
        sdist[source] = 0.0
        for u, w in zip(best_path, best_path[1:]):
            acc += graph.cost(u, w)
            sdist[w] = acc
    return PathResult(best_path, best_cost, sdist, excluded)
