import pytest

from inesh.adversary import BLACKHOLE, AdversaryAssignment
from inesh.core import Graph, Observation, ObservationKind, TrustTable, inesh_search
from inesh.harness import ScenarioConfig, run_scenario
from inesh.harness import scenario as scenario_module
from inesh.kernel import EventKind, MobileNode, RadioModel, Simulator
from inesh.network import Network
from inesh.protocols import AodvRouter, DsrRouter, IneshSettings, inesh_admit_next_hop
from inesh.protocols.dsr import DsrRouteCache
from inesh.protocols.messages import ControlMessage, DataPacket, MsgKind


def chain(n):
    return {v: (100.0 * (v - 1), 0.0) for v in range(1, n + 1)}


def make_net(positions, router=AodvRouter, inesh=None, adversary=None, trust_init=0.5):
    sim = Simulator()
    net = Network(sim, [MobileNode(v, p) for v, p in positions.items()], RadioModel(), adversary)
    for v in positions:
        net.routers[v] = router(v, net, TrustTable(trust_init), inesh)
    return sim, net


def queued(sim, kind=None):
    """Messages waiting in the event queue as (receiver, sender, item)."""
    out = []
    for ev in sim.pending():
        if ev.kind is EventKind.PACKET_ARRIVAL and (kind is None or getattr(ev.data.item, "kind", None) is kind):
            out.append((ev.node, ev.data.sender, ev.data.item))
    return out


def pkt(uid=1, src=1, dest=4, seq=0, t=0.0):
    return DataPacket(uid, src, dest, seq, t)


# -- AODV ----------------------------------------------------------------------

def test_aodv_rreq_broadcast_without_route():
    sim, net = make_net(chain(3))
    msg = net.routers[1].originate_rreq(9)
    assert (msg.kind, msg.origin, msg.dest, msg.request_id) == (MsgKind.RREQ, 1, 9, 1)
    assert net.ledger.control_tx == 1
    assert [r for r, _, _ in queued(sim)] == [2]


def test_aodv_no_rreq_with_live_route():
    sim, net = make_net(chain(3))
    net.routers[1]._update_route(3, 2, 2, 1)
    assert net.routers[1].originate_rreq(3) is None
    assert net.ledger.control_tx == 0


def test_aodv_duplicate_rreq_is_discarded():
    sim, net = make_net(chain(4))
    msg = ControlMessage(MsgKind.RREQ, origin=1, dest=4, request_id=1, origin_seq=1, sender=1)
    r2 = net.routers[2]
    assert r2.handle_rreq(msg, 1) == "rebroadcast"
    before = net.ledger.control_tx
    assert r2.handle_rreq(msg, 1) == "discard"
    assert net.ledger.control_tx == before


def test_aodv_intermediate_rebroadcasts_with_incremented_hops():
    sim, net = make_net(chain(4))
    msg = ControlMessage(MsgKind.RREQ, origin=1, dest=4, request_id=1, hop_count=0, origin_seq=1, sender=1)
    assert net.routers[2].handle_rreq(msg, 1) == "rebroadcast"
    (_, _, fwd), = [q for q in queued(sim) if q[0] == 3]
    assert fwd.hop_count == 1
    # reverse route towards the origin is installed
    assert net.routers[2].live_route(1).next_hop == 1


def test_aodv_destination_replies_with_own_sequence():
    sim, net = make_net(chain(2))
    msg = ControlMessage(MsgKind.RREQ, origin=1, dest=2, request_id=1, dest_seq=0, origin_seq=1, sender=1)
    assert net.routers[2].handle_rreq(msg, 1) == "reply"
    (_, _, rrep), = queued(sim, MsgKind.RREP)
    assert rrep.dest_seq == net.routers[2].seq == 1


def test_aodv_discovery_gives_up_after_three_attempts():
    # two nodes out of range of each other
    sim, net = make_net({1: (0.0, 0.0), 2: (400.0, 0.0)})
    net.routers[1].send_data(pkt(dest=2))
    sim.run()
    assert net.ledger.control_tx == 3
    (t, node, reason, _), = net.ledger.drops
    assert (node, reason) == (1, "noroute")
    assert t == pytest.approx(0.5 + 1.0 + 2.0)
    assert net.routers[1].buffered() == 0


def test_aodv_link_break_invalidates_and_reports():
    sim, net = make_net(chain(3))
    r1 = net.routers[1]
    r1._update_route(3, 2, 2, 4)
    assert r1.handle_link_break(2) == [(3, 5)]
    assert r1.live_route(3) is None
    assert net.ledger.control_tx == 1
    assert queued(sim, MsgKind.RERR)


def test_aodv_link_break_without_routes_is_noop():
    sim, net = make_net(chain(3))
    assert net.routers[1].handle_link_break(2) == []
    assert net.ledger.control_tx == 0


def test_aodv_rerr_at_source_with_traffic_rediscovers():
    sim, net = make_net(chain(3))
    r1 = net.routers[1]
    r1.flows.add(3)
    r1._update_route(3, 2, 2, 4)
    rerr = ControlMessage(MsgKind.RERR, origin=2, dest=3, unreachable=((3, 5),), sender=2)
    r1.handle_rerr(rerr, 2)
    assert 3 in r1.discovery
    assert queued(sim, MsgKind.RREQ)


def test_aodv_end_to_end_and_table_dump():
    sim, net = make_net(chain(4))
    net.routers[1].send_data(pkt())
    sim.run()
    assert len(net.ledger.delivered) == 1
    dump = net.routers[1].dump_table()
    assert "node=1 dest=4 next=2 hops=3" in dump


def test_forward_at_destination_delivers():
    sim, net = make_net(chain(2))
    assert net.routers[2].forward_data(pkt(dest=2), 1) == "delivered"
    assert net.ledger.delivered[0][1].dest == 2


def test_aodv_forward_over_broken_link_drops():
    sim, net = make_net(chain(3))
    r2 = net.routers[2]
    r2._update_route(3, 3, 1, 1)
    net.nodes[3].position = (400.0, 0.0)
    net.refresh_topology()
    assert r2.forward_data(pkt(dest=3), 1) == "linkbreak"
    assert net.ledger.drops[0][2] == "linkbreak"
    assert queued(sim, MsgKind.RERR)


# -- DSR -----------------------------------------------------------------------

def test_dsr_rreq_accumulates_route():
    sim, net = make_net(chain(4), DsrRouter)
    msg = ControlMessage(MsgKind.RREQ, origin=1, dest=4, request_id=1, route=(1, 2), sender=2)
    assert net.routers[3].handle_rreq(msg, 2) == "rebroadcast"
    routes = {item.route for _, _, item in queued(sim, MsgKind.RREQ)}
    assert routes == {(1, 2, 3)}


def test_dsr_rreq_loop_guard():
    sim, net = make_net(chain(4), DsrRouter)
    msg = ControlMessage(MsgKind.RREQ, origin=1, dest=4, request_id=1, route=(1, 3, 2), sender=2)
    assert net.routers[3].handle_rreq(msg, 2) == "discard"


def test_dsr_destination_returns_full_route():
    sim, net = make_net(chain(4), DsrRouter)
    msg = ControlMessage(MsgKind.RREQ, origin=1, dest=4, request_id=1, route=(1, 2, 3), sender=3)
    assert net.routers[4].handle_rreq(msg, 3) == "reply"
    (to, _, rrep), = queued(sim, MsgKind.RREP)
    assert to == 3 and rrep.route == (1, 2, 3, 4)


def test_dsr_discovery_fills_cache():
    sim, net = make_net(chain(4), DsrRouter)
    net.routers[1].send_data(pkt())
    sim.run()
    assert net.routers[1].cache.find(4, sim.now) == (1, 2, 3, 4)
    assert len(net.ledger.delivered) == 1
    assert net.routers[1].discover(4) is None


def test_dsr_cache_rejects_loops_and_foreign_routes():
    c = DsrRouteCache(1)
    assert not c.add((1, 2, 1, 3), 0.0)
    assert not c.add((2, 3), 0.0)
    assert c.add((1, 2, 3), 0.0)
    assert c.add((1, 4, 5, 3), 0.0)
    assert c.find(3, 1.0) == (1, 2, 3)
    assert c.find(3, 1.0, {2}) == (1, 4, 5, 3)
    assert c.remove_link(3, 2) == 1
    assert c.find(3, 11.5) is None


def test_dsr_link_break_reports_to_source():
    sim, net = make_net(chain(4), DsrRouter)
    p = pkt()
    p.route = (1, 2, 3, 4)
    net.routers[1].cache.add((1, 2, 3, 4), 0.0)
    net.nodes[4].position = (450.0, 200.0)
    net.refresh_topology()
    assert net.routers[3].forward_data(p, 2) == "linkbreak"
    sim.run()
    assert net.routers[1].cache.find(4, sim.now) is None


# -- timing --------------------------------------------------------------------

@pytest.mark.parametrize("protocol", ["aodv", "dsr"])
def test_three_hop_delay_in_static_network(protocol):
    cfg = ScenarioConfig(node_count=4, max_speed_mps=0.0, duration_s=5.0, protocol=protocol,
                         malicious_fraction=0.0)
    res = run_scenario(cfg, positions=chain(4), keep_network=True)
    steady = [t - p.sent_at for t, p in res.network.ledger.delivered if p.seq > 0]
    assert steady
    assert all(d == pytest.approx(0.006) for d in steady)


# -- INESH admission -----------------------------------------------------------

def grid_graph():
    # 1 reaches 6 via 2-5 (short) or 7-8-9 (long)
    return Graph.from_edges(9, [(1, 2), (2, 5), (5, 6), (1, 7), (7, 8), (8, 9), (9, 6), (2, 7)])


def test_admit_full_trust_matches_shortest_path():
    g = grid_graph()
    t = TrustTable(initial=1.0)
    plain = inesh_search(g, t, 1, 6).path
    assert inesh_admit_next_hop(g, t, 1, [2, 7], 6) == plain[1] == 2


def test_admit_only_path_via_seven():
    g = grid_graph()
    t = TrustTable()
    t.set(1, 2, 0.1)
    t.set(1, 7, 0.9)
    t.observations[(1, 2)] = [Observation(ObservationKind.NEGATIVE, 0.0)]
    assert inesh_admit_next_hop(g, t, 1, [2, 7], 6) == 7


def test_admit_none_when_every_candidate_excluded():
    g = grid_graph()
    t = TrustTable()
    for v in (2, 7):
        t.set(1, v, 0.1)
        t.observations[(1, v)] = [Observation(ObservationKind.NEGATIVE, 0.0)]
    t.set(1, 5, 0.9)
    t.set(1, 8, 0.9)
    assert inesh_admit_next_hop(g, t, 1, [2, 7], 6) is None
    assert inesh_admit_next_hop(g, t, 1, [], 6) is None


def test_watchdog_penalises_blackhole_and_rerouting_follows():
    # diamond: 1-2-4 and 1-3-4 with 2 a blackhole
    pos = {1: (0.0, 100.0), 2: (100.0, 0.0), 3: (100.0, 200.0), 4: (200.0, 100.0)}
    adv = AdversaryAssignment({2: BLACKHOLE})
    sim, net = make_net(pos, AodvRouter, IneshSettings(), adv)
    for k in range(20):
        sim.at(k * 0.25, EventKind.TIMER_EXPIRY, 1, _Send(net, pkt(uid=k + 1, seq=k, t=k * 0.25)))
    sim.run()
    r1 = net.routers[1]
    assert r1.trust.get(1, 2) < 0.5
    assert r1.trust.last_is_negative(1, 2)
    assert r1.trust.get(1, 3) > 0.5
    assert len(net.ledger.delivered) >= 18


class _Send:
    def __init__(self, net, p):
        self.net, self.p = net, p

    def fire(self):
        self.p.sent_at = self.net.sim.now
        self.net.ledger.sent += 1
        self.net.routers[self.p.src].send_data(self.p)

    def describe(self):
        return f"send={self.p.uid}"


# -- invariants over mobile runs -------------------------------------------------

MOBILE = [ScenarioConfig(duration_s=60.0, seed=s, protocol=p, inesh_enabled=i, node_count=n)
          for s, p, i, n in [(1, "aodv", True, 35), (2, "dsr", True, 50), (3, "aodv", False, 45),
                             (4, "dsr", False, 40)]]


class CheckedAodv(AodvRouter):
    @property
    def seq(self):
        return self._seq

    @seq.setter
    def seq(self, value):
        assert value >= getattr(self, "_seq", 0)
        self._seq = value


class CheckedDsr(DsrRouter):
    def on_control(self, msg, sender):
        if msg.route:
            assert len(set(msg.route)) == len(msg.route)
        super().on_control(msg, sender)

    def on_data(self, p, sender):
        assert len(set(p.route)) == len(p.route)
        super().on_data(p, sender)


@pytest.mark.parametrize("cfg", MOBILE, ids=lambda c: f"{c.protocol}-{c.node_count}-{int(c.inesh_enabled)}")
def test_protocol_invariants_on_mobile_runs(cfg, monkeypatch):
    monkeypatch.setitem(scenario_module.ROUTERS, "aodv", CheckedAodv)
    monkeypatch.setitem(scenario_module.ROUTERS, "dsr", CheckedDsr)
    res = run_scenario(cfg, keep_network=True)
    ledger = res.network.ledger
    assert ledger.installs > 0
    assert ledger.bad_installs == 0
    assert res.report.conserved
    if cfg.protocol == "dsr":
        for router in res.network.routers.values():
            for r in router.cache.routes:
                assert len(set(r.route)) == len(r.route)


@pytest.mark.parametrize("protocol", ["aodv", "dsr"])
def test_full_trust_inesh_reduces_to_baseline(protocol):
    cfg = ScenarioConfig(duration_s=60.0, seed=6, protocol=protocol, malicious_fraction=0.0,
                         trust_init=1.0)
    base = run_scenario(cfg)
    enhanced = run_scenario(cfg.but(inesh_enabled=True))
    assert enhanced.delivery_trace == base.delivery_trace
