"""Teaching-grade AODV: flooded RREQ, unicast RREP, RERR on link break."""

from __future__ import annotations

from dataclasses import dataclass, field

from .base import ROUTE_LIFETIME, Router
from .messages import ControlMessage, DataPacket, MsgKind


@dataclass
class AodvRouteEntry:
    dest: int
    next_hop: int
    hop_count: int
    dest_seq: int
    lifetime: float
    valid: bool = True
    precursors: set[int] = field(default_factory=set)

    def live(self, now: float) -> bool:
        return self.valid and now <= self.lifetime


class AodvRouter(Router):
    protocol = "aodv"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.seq = 0
        self.table: dict[int, AodvRouteEntry] = {}

    # -- table -------------------------------------------------------------

    def live_route(self, dest: int) -> AodvRouteEntry | None:
        e = self.table.get(dest)
        return e if e is not None and e.live(self.now) else None

    def _update_route(self, dest: int, next_hop: int, hop_count: int, dest_seq: int) -> bool:
        """Install or refresh a route; returns whether the table changed."""
        e = self.table.get(dest)
        fresher = (e is None or not e.live(self.now) or dest_seq > e.dest_seq
                   or (dest_seq == e.dest_seq and hop_count < e.hop_count))
        if not fresher:
            if e.next_hop == next_hop and dest_seq == e.dest_seq:
                e.lifetime = self.now + ROUTE_LIFETIME
            return False
        self.net.note_install(self.id, next_hop)
        if e is None:
            self.table[dest] = AodvRouteEntry(dest, next_hop, hop_count, dest_seq,
                                              self.now + ROUTE_LIFETIME)
        else:
            e.next_hop, e.hop_count, e.dest_seq = next_hop, hop_count, dest_seq
            e.lifetime = self.now + ROUTE_LIFETIME
            e.valid = True
        return True

    def dump_table(self) -> str:
        lines = []
        for d in sorted(self.table):
            e = self.table[d]
            lines.append(f"node={self.id} dest={d} next={e.next_hop} hops={e.hop_count} "
                         f"seq={e.dest_seq} lifetime={e.lifetime:.3f} "
                         f"valid={int(e.live(self.now))}")
        return "\n".join(lines)

    # -- discovery ---------------------------------------------------------

    def send_rreq(self, dest: int) -> None:
        self.originate_rreq(dest)

    def originate_rreq(self, dest: int) -> ControlMessage | None:
        """Flood a fresh RREQ for ``dest`` unless a live route already exists."""
        if self.live_route(dest) is not None:
            return None
        self.seq += 1
        known = self.table[dest].dest_seq if dest in self.table else 0
        msg = ControlMessage(MsgKind.RREQ, origin=self.id, dest=dest,
                             request_id=self._next_request_id(), hop_count=0,
                             dest_seq=known, origin_seq=self.seq, sender=self.id)
        self.net.broadcast(self.id, msg)
        return msg

    def handle_rreq(self, msg: ControlMessage, sender: int) -> str:
        """Returns what happened: ``discard``, ``reply`` or ``rebroadcast``."""
        key = (msg.origin, msg.request_id)
        if key in self.seen or msg.origin == self.id:
            return "discard"
        if self.inesh is not None and not self.admits(sender, msg.origin):
            return "discard"
        self.seen.add(key)
        self._update_route(msg.origin, sender, msg.hop_count + 1, msg.origin_seq)

        if msg.dest == self.id:
            self.seq = max(self.seq + 1, msg.dest_seq)
            reply = ControlMessage(MsgKind.RREP, origin=msg.origin, dest=self.id,
                                   request_id=msg.request_id, hop_count=0,
                                   dest_seq=self.seq, sender=self.id)
            self.net.unicast(self.id, sender, reply)
            return "reply"

        e = self.live_route(msg.dest)
        if (e is not None and e.dest_seq >= msg.dest_seq and e.next_hop != sender
                and (self.inesh is None or self.admits(e.next_hop, msg.dest))):
            e.precursors.add(sender)
            reply = ControlMessage(MsgKind.RREP, origin=msg.origin, dest=msg.dest,
                                   request_id=msg.request_id, hop_count=e.hop_count,
                                   dest_seq=e.dest_seq, sender=self.id)
            self.net.unicast(self.id, sender, reply)
            return "reply"

        self.net.broadcast(self.id, msg.but(hop_count=msg.hop_count + 1, sender=self.id))
        return "rebroadcast"

    def handle_rrep(self, msg: ControlMessage, sender: int) -> None:
        if self.inesh is not None and not self.admits(sender, msg.dest):
            return
        changed = self._update_route(msg.dest, sender, msg.hop_count + 1, msg.dest_seq)
        if msg.origin == self.id:
            if self.live_route(msg.dest) is not None:
                self._found(msg.dest)
            return
        if not changed:
            return
        back = self.live_route(msg.origin)
        if back is None:
            return
        self.table[msg.dest].precursors.add(back.next_hop)
        self.net.unicast(self.id, back.next_hop,
                         msg.but(hop_count=msg.hop_count + 1, sender=self.id))

    # -- maintenance -------------------------------------------------------

    def handle_link_break(self, broken_next_hop: int) -> list[tuple[int, int]]:
        """Invalidate every route through ``broken_next_hop`` and broadcast one RERR."""
        lost = []
        for d in sorted(self.table):
            e = self.table[d]
            if e.valid and e.next_hop == broken_next_hop:
                e.valid = False
                e.dest_seq += 1
                lost.append((d, e.dest_seq))
        if lost:
            self._send_rerr(lost)
        return lost

    def _send_rerr(self, lost: list[tuple[int, int]], broadcast: bool = True) -> None:
        if broadcast:
            self.net.broadcast(self.id, ControlMessage(MsgKind.RERR, origin=self.id,
                                                       dest=lost[0][0], unreachable=tuple(lost),
                                                       sender=self.id))
        for d, _ in lost:
            if d in self.flows:
                self._discover(d)

    def handle_rerr(self, msg: ControlMessage, sender: int) -> None:
        lost, upstream = [], False
        for d, seq in msg.unreachable:
            e = self.table.get(d)
            if e is None or not e.valid or e.next_hop != sender:
                continue
            e.valid = False
            e.dest_seq = max(e.dest_seq, seq)
            lost.append((d, e.dest_seq))
            upstream = upstream or bool(e.precursors)
        if lost:
            self._send_rerr(lost, broadcast=upstream)

    # -- data plane --------------------------------------------------------

    def _try_forward(self, pkt: DataPacket, sender: int | None) -> str | None:
        """Hand ``pkt`` to its next hop; returns a drop reason on failure."""
        e = self.live_route(pkt.dest)
        if e is None:
            return "noroute"
        if self.inesh is not None and not self.admits(e.next_hop, pkt.dest):
            self.handle_link_break(e.next_hop)
            return "noroute"
        if not self.net.linked(self.id, e.next_hop):
            self.handle_link_break(e.next_hop)
            return "linkbreak"
        e.lifetime = self.now + ROUTE_LIFETIME
        if sender is not None:
            e.precursors.add(sender)
        self.net.transmit(self.id, e.next_hop, pkt)
        return None

    def _launch(self, pkt: DataPacket) -> bool:
        return self._try_forward(pkt, None) is None

    def forward_data(self, pkt: DataPacket, sender: int) -> str:
        if pkt.dest == self.id:
            self.net.deliver(pkt)
            return "delivered"
        had_route = self.live_route(pkt.dest) is not None
        reason = self._try_forward(pkt, sender)
        if reason is None:
            return "forwarded"
        if not had_route:
            # upstream still believes we have a route: tell it otherwise
            e = self.table.get(pkt.dest)
            self._send_rerr([(pkt.dest, e.dest_seq if e else 0)])
        self.net.drop(self.id, pkt, reason)
        return reason

    def on_data(self, pkt: DataPacket, sender: int) -> None:
        self.forward_data(pkt, sender)

    def on_control(self, msg: ControlMessage, sender: int) -> None:
        if msg.kind is MsgKind.RREQ:
            self.handle_rreq(msg, sender)
        elif msg.kind is MsgKind.RREP:
            self.handle_rrep(msg, sender)
        else:
            self.handle_rerr(msg, sender)
