"""Malicious node profiles: blackhole route forgery and selective dropping."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, replace
from typing import Iterable, Mapping


class AttackKind(enum.Enum):
    BLACKHOLE = "blackhole"
    DROPPER = "dropper"


class Decision(enum.Enum):
    FORWARD = "forward"
    DROP = "drop"


@dataclass(frozen=True)
class MaliciousProfile:
    kind: AttackKind = AttackKind.BLACKHOLE
    drop_probability: float = 1.0
    seq_inflation: int = 100
    hop_claim: int = 1

    def __post_init__(self):
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError(f"drop_probability must lie in [0, 1], got {self.drop_probability}")
        if self.seq_inflation < 1:
            raise ValueError(f"seq_inflation must be >= 1, got {self.seq_inflation}")

    @property
    def reason(self) -> str:
        return self.kind.value


BLACKHOLE = MaliciousProfile()


def dropper(p: float) -> MaliciousProfile:
    return MaliciousProfile(AttackKind.DROPPER, drop_probability=p)


def blackhole_on_rreq(profile: MaliciousProfile, msg, node: int):
    """Forge the reply a blackhole sends for any route request.

    AODV requests get an inflated destination sequence number and a short hop
    claim.  DSR requests (those carrying an accumulated route) get a route that
    puts the destination one hop past the attacker.
    """
    from .protocols.messages import ControlMessage, MsgKind

    if profile.kind is not AttackKind.BLACKHOLE:
        raise ValueError("only blackhole profiles forge replies")
    if msg.kind is not MsgKind.RREQ:
        raise ValueError(f"expected an RREQ, got {msg.kind}")
    if msg.route:
        return ControlMessage(
            MsgKind.RREP, origin=msg.origin, dest=msg.dest, request_id=msg.request_id,
            hop_count=profile.hop_claim, route=msg.route + (node, msg.dest), sender=node,
        )
    return ControlMessage(
        MsgKind.RREP, origin=msg.origin, dest=msg.dest, request_id=msg.request_id,
        hop_count=profile.hop_claim, dest_seq=msg.dest_seq + profile.seq_inflation,
        sender=node,
    )


def maybe_drop(profile: MaliciousProfile, pkt, rng: random.Random) -> Decision:
    """Data-plane decision for a packet transiting a malicious node.

    Only data packets reach this function; control traffic is never dropped
    here, so droppers stay visible to route discovery.
    """
    if profile.kind is AttackKind.BLACKHOLE:
        return Decision.DROP
    p = profile.drop_probability
    if p <= 0.0:
        return Decision.FORWARD
    if p >= 1.0:
        return Decision.DROP
    return Decision.DROP if rng.random() < p else Decision.FORWARD


@dataclass(frozen=True)
class AdversaryAssignment:
    profiles: Mapping[int, MaliciousProfile]
    fraction: float = 0.0

    def __contains__(self, node: object) -> bool:
        return node in self.profiles

    def get(self, node: int) -> MaliciousProfile | None:
        return self.profiles.get(node)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.profiles)


def malicious_count(fraction: float, n: int) -> int:
    return int(math.floor(fraction * n + 0.5))


def assign(node_count: int, fraction: float, protected: Iterable[int], rng: random.Random,
           explicit: Mapping[int, MaliciousProfile] | None = None,
           profile: MaliciousProfile = BLACKHOLE) -> AdversaryAssignment:
    """Pick malicious nodes.

    An explicit mapping wins over ``fraction``.  Otherwise ``round(fraction * n)``
    nodes are sampled from those not in ``protected`` (flow endpoints).
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"malicious fraction must lie in [0, 1], got {fraction}")
    protected = set(protected)
    if explicit:
        bad = [v for v in explicit if not 1 <= v <= node_count]
        if bad:
            raise ValueError(f"malicious nodes {bad} are not in 1..{node_count}")
        clash = sorted(protected & set(explicit))
        if clash:
            raise ValueError(f"flow endpoints {clash} cannot be malicious")
        return AdversaryAssignment(dict(explicit), fraction)
    pool = [v for v in range(1, node_count + 1) if v not in protected]
    k = min(malicious_count(fraction, node_count), len(pool))
    if k == 0:
        return AdversaryAssignment({}, fraction)
    chosen = sorted(rng.sample(pool, k))
    return AdversaryAssignment({v: replace(profile) for v in chosen}, fraction)
