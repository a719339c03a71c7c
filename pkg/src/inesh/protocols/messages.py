"""Wire-level records exchanged between routers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

CONTROL_BITS = 120
PAYLOAD_BYTES = 512


class MsgKind(enum.Enum):
    RREQ = "rreq"
    RREP = "rrep"
    RERR = "rerr"


@dataclass(frozen=True)
class ControlMessage:
    kind: MsgKind
    origin: int
    dest: int
    request_id: int = 0
    hop_count: int = 0
    dest_seq: int = 0
    origin_seq: int = 0
    # DSR: accumulated route (RREQ), full route (RREP) or return path (RERR)
    route: tuple[int, ...] = ()
    sender: int = 0
    # AODV RERR: (dest, seq) pairs; DSR RERR: the broken (from, to) link
    unreachable: tuple[tuple[int, int], ...] = ()
    size_bits: int = CONTROL_BITS

    def but(self, **changes) -> "ControlMessage":
        return replace(self, **changes)

    def describe(self) -> str:
        s = (f"msg={self.kind.value} origin={self.origin} dest={self.dest} "
             f"id={self.request_id} hops={self.hop_count}")
        if self.route:
            s += " route=" + ",".join(map(str, self.route))
        if self.dest_seq:
            s += f" dseq={self.dest_seq}"
        return s


@dataclass
class DataPacket:
    uid: int
    src: int
    dest: int
    seq: int
    sent_at: float
    route: tuple[int, ...] = ()
    payload_bytes: int = PAYLOAD_BYTES
    hops: int = 0

    @property
    def bits(self) -> int:
        return self.payload_bytes * 8

    def describe(self) -> str:
        s = f"pkt={self.uid} src={self.src} dst={self.dest} seq={self.seq}"
        if self.route:
            s += " route=" + ",".join(map(str, self.route))
        return s


@dataclass
class Arrival:
    """Payload of a packet-arrival event."""

    sender: int
    item: ControlMessage | DataPacket

    @property
    def is_data(self) -> bool:
        return isinstance(self.item, DataPacket)

    def describe(self) -> str:
        return f"from={self.sender} {self.item.describe()}"
