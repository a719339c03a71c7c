"""Shared router machinery and the INESH next-hop admission hook."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from ..core import DEFAULT_THRESHOLD, Graph, TrustTable, inesh_search, screen_nodes

if TYPE_CHECKING:
    from ..network import Network
    from .messages import ControlMessage, DataPacket

ROUTE_LIFETIME = 10.0
RREQ_WAIT = 0.5
RREQ_ATTEMPTS = 3


@dataclass(frozen=True)
class IneshSettings:
    threshold: float = DEFAULT_THRESHOLD


def inesh_admit_next_hop(graph: Graph, trust: TrustTable, node: int, candidates: Iterable[int],
                         dest: int, threshold: float = DEFAULT_THRESHOLD) -> int | None:
    """Second node of the trust-filtered shortest path from ``node`` to ``dest``.

    Only ``candidates`` may serve as the first hop.  Returns None when no
    trust-admissible path starts with one of them.
    """
    if node == dest:
        return None
    result = inesh_search(graph, trust, node, dest, threshold, first_hops=candidates)
    return result.path[1] if len(result.path) >= 2 else None


class Router:
    """Per-node protocol state driven by network callbacks."""

    protocol = "base"

    def __init__(self, node_id: int, net: "Network", trust: TrustTable,
                 inesh: IneshSettings | None = None):
        self.id = node_id
        self.net = net
        self.trust = trust
        self.inesh = inesh
        self.request_id = 0
        self.seen: set[tuple[int, int]] = set()
        self.buffer: dict[int, list[DataPacket]] = {}
        self.discovery: dict[int, list] = {}
        self.flows: set[int] = set()

    @property
    def now(self) -> float:
        return self.net.sim.now

    # -- INESH hooks -------------------------------------------------------

    def _screening(self) -> bool:
        # Without a negative latest observation nothing can be screened out,
        # so the search would admit every hop the protocol proposes.
        return self.inesh is not None and bool(self.trust.suspects(self.id))

    def excluded_for(self, dest: int) -> set[int]:
        if not self._screening():
            return set()
        return screen_nodes(self.net.graph, self.trust, self.id, self.id, dest, self.inesh.threshold)

    def admits(self, hop: int, dest: int) -> bool:
        """Whether the protocol's proposed next hop survives the trust filter.

        When the search finds no admissible path through ``hop`` but ``hop``
        itself was not screened out, protocol-native behaviour is kept.
        """
        if not self._screening():
            return True
        chosen = inesh_admit_next_hop(self.net.graph, self.trust, self.id, [hop], dest,
                                      self.inesh.threshold)
        if chosen == hop:
            return True
        return hop not in self.excluded_for(dest)

    # -- discovery bookkeeping ---------------------------------------------

    def _discover(self, dest: int) -> None:
        if dest in self.discovery:
            return
        self.discovery[dest] = [0, None]
        self._attempt(dest)

    def _attempt(self, dest: int) -> None:
        state = self.discovery[dest]
        self.send_rreq(dest)
        state[1] = self.net.timer(self.id, RREQ_WAIT * 2 ** state[0], self._rreq_timeout,
                                  f"rreq-wait dest={dest} attempt={state[0] + 1}", dest)

    def _rreq_timeout(self, dest: int) -> None:
        state = self.discovery.get(dest)
        if state is None:
            return
        state[0] += 1
        if state[0] < RREQ_ATTEMPTS:
            self._attempt(dest)
            return
        del self.discovery[dest]
        for pkt in self.buffer.pop(dest, []):
            self.net.drop(self.id, pkt, "noroute")

    def _found(self, dest: int) -> None:
        state = self.discovery.pop(dest, None)
        if state is not None and state[1] is not None:
            state[1].cancel()
        pending = self.buffer.pop(dest, [])
        for pkt in pending:
            if not self._launch(pkt):
                self.buffer.setdefault(dest, []).append(pkt)
        if dest in self.buffer:
            self._discover(dest)

    def _next_request_id(self) -> int:
        self.request_id += 1
        self.seen.add((self.id, self.request_id))
        return self.request_id

    # -- entry points ------------------------------------------------------

    def send_data(self, pkt: "DataPacket") -> None:
        """Originate a data packet; buffer it and discover a route if needed."""
        self.flows.add(pkt.dest)
        if pkt.dest == self.id:
            self.net.deliver(pkt)
            return
        if self._launch(pkt):
            return
        self.buffer.setdefault(pkt.dest, []).append(pkt)
        self._discover(pkt.dest)

    def buffered(self) -> int:
        return sum(len(v) for v in self.buffer.values())

    def _launch(self, pkt: "DataPacket") -> bool:
        raise NotImplementedError

    def send_rreq(self, dest: int) -> None:
        raise NotImplementedError

    def on_data(self, pkt: "DataPacket", sender: int) -> None:
        raise NotImplementedError

    def on_control(self, msg: "ControlMessage", sender: int) -> None:
        raise NotImplementedError

    def dump_table(self) -> str:
        raise NotImplementedError
