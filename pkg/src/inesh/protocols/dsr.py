"""Teaching-grade DSR: source routes, accumulated-route flooding, route cache."""

from __future__ import annotations

from dataclasses import dataclass

from .base import ROUTE_LIFETIME, Router
from .messages import ControlMessage, DataPacket, MsgKind


@dataclass(frozen=True)
class CachedRoute:
    route: tuple[int, ...]
    inserted_at: float


def has_link(route: tuple[int, ...], a: int, b: int) -> bool:
    return any({u, w} == {a, b} for u, w in zip(route, route[1:]))


class DsrRouteCache:
    """Source routes learned by one node, each starting at that node."""

    def __init__(self, owner: int, timeout: float = ROUTE_LIFETIME):
        self.owner = owner
        self.timeout = timeout
        self.routes: list[CachedRoute] = []

    def __len__(self):
        return len(self.routes)

    def add(self, route: tuple[int, ...], now: float) -> bool:
        if not route or route[0] != self.owner or len(set(route)) != len(route):
            return False
        self.routes = [r for r in self.routes if r.route != route]
        self.routes.append(CachedRoute(route, now))
        return True

    def expire(self, now: float) -> None:
        self.routes = [r for r in self.routes if now - r.inserted_at <= self.timeout]

    def find(self, dest: int, now: float, avoid: set[int] = frozenset()) -> tuple[int, ...] | None:
        """Shortest cached route to ``dest`` avoiding ``avoid``; earliest insertion breaks ties."""
        self.expire(now)
        best = None
        for r in self.routes:
            if r.route[-1] != dest or avoid.intersection(r.route[1:-1]):
                continue
            if best is None or len(r.route) < len(best.route):
                best = r
        return best.route if best else None

    def remove_link(self, a: int, b: int) -> int:
        before = len(self.routes)
        self.routes = [r for r in self.routes if not has_link(r.route, a, b)]
        return before - len(self.routes)

    def remove_through(self, node: int) -> int:
        before = len(self.routes)
        self.routes = [r for r in self.routes if node not in r.route[1:-1]]
        return before - len(self.routes)


class DsrRouter(Router):
    protocol = "dsr"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.cache = DsrRouteCache(self.id)

    def dump_table(self) -> str:
        self.cache.expire(self.now)
        return "\n".join(
            f"node={self.id} route={','.join(map(str, r.route))} inserted={r.inserted_at:.3f}"
            for r in self.cache.routes
        )

    # -- discovery ---------------------------------------------------------

    def send_rreq(self, dest: int) -> None:
        self.discover(dest)

    def discover(self, dest: int) -> ControlMessage | None:
        """Flood an RREQ carrying the accumulated route ``[self]``."""
        if self.cache.find(dest, self.now, self.excluded_for(dest)) is not None:
            return None
        msg = ControlMessage(MsgKind.RREQ, origin=self.id, dest=dest,
                             request_id=self._next_request_id(), route=(self.id,),
                             sender=self.id)
        self.net.broadcast(self.id, msg)
        return msg

    def handle_rreq(self, msg: ControlMessage, sender: int) -> str:
        if self.id in msg.route:
            return "discard"
        if self.inesh is not None and not self.admits(sender, msg.origin):
            return "discard"
        route = msg.route + (self.id,)
        if msg.dest == self.id:
            # every copy is answered so the source learns alternatives
            reply = ControlMessage(MsgKind.RREP, origin=msg.origin, dest=self.id,
                                   request_id=msg.request_id, hop_count=len(route) - 1,
                                   route=route, sender=self.id)
            self.net.unicast(self.id, sender, reply)
            return "reply"
        key = (msg.origin, msg.request_id)
        if key in self.seen:
            return "discard"
        self.seen.add(key)
        self.net.broadcast(self.id, msg.but(route=route, hop_count=msg.hop_count + 1,
                                            sender=self.id))
        return "rebroadcast"

    def handle_rrep(self, msg: ControlMessage, sender: int) -> None:
        route = msg.route
        if self.id not in route or len(set(route)) != len(route):
            return
        if self.inesh is not None:
            if not self.admits(sender, msg.dest) or self.excluded_for(msg.dest) & set(route):
                return
        i = route.index(self.id)
        if i == 0:
            self.net.note_install(self.id, route[1])
            self.cache.add(route, self.now)
            self._found(msg.dest)
            return
        self.net.unicast(self.id, route[i - 1], msg.but(sender=self.id))

    # -- maintenance -------------------------------------------------------

    def _report_break(self, pkt: DataPacket, broken_to: int) -> None:
        back = tuple(reversed(pkt.route[:pkt.route.index(self.id) + 1]))
        msg = ControlMessage(MsgKind.RERR, origin=self.id, dest=pkt.src, route=back,
                             unreachable=((self.id, broken_to),), sender=self.id)
        if len(back) > 1:
            self.net.unicast(self.id, back[1], msg)

    def handle_rerr(self, msg: ControlMessage, sender: int) -> None:
        (a, b), = msg.unreachable
        self.cache.remove_link(a, b)
        if self.id not in msg.route:
            return
        i = msg.route.index(self.id)
        if i + 1 < len(msg.route):
            self.net.unicast(self.id, msg.route[i + 1], msg.but(sender=self.id))
            return
        for d in sorted(self.flows):
            if self.cache.find(d, self.now) is None:
                self._discover(d)

    # -- data plane --------------------------------------------------------

    def _launch(self, pkt: DataPacket) -> bool:
        avoid = self.excluded_for(pkt.dest)
        while True:
            route = self.cache.find(pkt.dest, self.now, avoid)
            if route is None:
                return False
            if self.inesh is not None and not self.admits(route[1], pkt.dest):
                self.cache.remove_through(route[1])
                continue
            if not self.net.linked(self.id, route[1]):
                self.cache.remove_link(self.id, route[1])
                continue
            pkt.route = route
            self.net.transmit(self.id, route[1], pkt)
            return True

    def forward_data(self, pkt: DataPacket, sender: int) -> str:
        if pkt.dest == self.id:
            self.net.deliver(pkt)
            return "delivered"
        i = pkt.route.index(self.id)
        nxt = pkt.route[i + 1]
        if self.inesh is not None and not self.admits(nxt, pkt.dest):
            self._report_break(pkt, nxt)
            self.net.drop(self.id, pkt, "noroute")
            return "noroute"
        if not self.net.linked(self.id, nxt):
            self._report_break(pkt, nxt)
            self.net.drop(self.id, pkt, "linkbreak")
            return "linkbreak"
        self.net.transmit(self.id, nxt, pkt)
        return "forwarded"

    def on_data(self, pkt: DataPacket, sender: int) -> None:
        self.forward_data(pkt, sender)

    def on_control(self, msg: ControlMessage, sender: int) -> None:
        if msg.kind is MsgKind.RREQ:
            self.handle_rreq(msg, sender)
        elif msg.kind is MsgKind.RREP:
            self.handle_rrep(msg, sender)
        else:
            self.handle_rerr(msg, sender)
