import random

import pytest

from inesh.adversary import (
    BLACKHOLE, AttackKind, Decision, MaliciousProfile, assign, blackhole_on_rreq, dropper,
    malicious_count, maybe_drop,
)
from inesh.harness import ScenarioConfig, run_scenario
from inesh.protocols.messages import ControlMessage, DataPacket, MsgKind

PKT = DataPacket(1, 1, 9, 0, 0.0)


def grid_positions():
    # 4 rows x 5 columns; row neighbours 100 m apart, column neighbours 120 m
    return {i + 1: (50.0 + (i % 5) * 100.0, 50.0 + (i // 5) * 120.0) for i in range(20)}


@pytest.mark.parametrize("seq, forged", [(5, 105), (0, 100)])
def test_blackhole_inflates_aodv_sequence(seq, forged):
    rreq = ControlMessage(MsgKind.RREQ, origin=1, dest=9, request_id=4, dest_seq=seq, sender=2)
    rrep = blackhole_on_rreq(BLACKHOLE, rreq, 3)
    assert rrep.kind is MsgKind.RREP
    assert rrep.dest_seq == forged
    assert rrep.hop_count == 1
    assert (rrep.origin, rrep.dest, rrep.request_id, rrep.sender) == (1, 9, 4, 3)


def test_blackhole_forges_one_hop_dsr_route():
    rreq = ControlMessage(MsgKind.RREQ, origin=1, dest=9, request_id=1, route=(1,), sender=1)
    assert blackhole_on_rreq(BLACKHOLE, rreq, 5).route == (1, 5, 9)


def test_blackhole_only_answers_requests():
    rrep = ControlMessage(MsgKind.RREP, origin=1, dest=9, request_id=1)
    with pytest.raises(ValueError):
        blackhole_on_rreq(BLACKHOLE, rrep, 5)
    with pytest.raises(ValueError):
        blackhole_on_rreq(dropper(0.5), rrep.but(kind=MsgKind.RREQ), 5)


@pytest.mark.parametrize("profile, expected", [
    (BLACKHOLE, Decision.DROP),
    (dropper(0.0), Decision.FORWARD),
    (dropper(1.0), Decision.DROP),
])
def test_maybe_drop_boundaries(profile, expected):
    rng = random.Random(0)
    assert all(maybe_drop(profile, PKT, rng) is expected for _ in range(200))


def test_dropper_rate_is_roughly_p():
    rng = random.Random(1)
    drops = sum(maybe_drop(dropper(0.3), PKT, rng) is Decision.DROP for _ in range(10_000))
    assert 2700 < drops < 3300


@pytest.mark.parametrize("kwargs", [
    {"drop_probability": 1.5}, {"drop_probability": -0.1}, {"seq_inflation": 0},
])
def test_profile_validation(kwargs):
    with pytest.raises(ValueError):
        MaliciousProfile(**kwargs)


def test_drop_reasons():
    assert BLACKHOLE.reason == "blackhole"
    assert dropper(0.2).reason == "dropper"
    assert dropper(0.2).kind is AttackKind.DROPPER


@pytest.mark.parametrize("fraction, n, k", [(0.1, 35, 4), (0.1, 50, 5), (0.0, 50, 0), (0.1, 45, 5)])
def test_malicious_count_rounds_half_up(fraction, n, k):
    assert malicious_count(fraction, n) == k


def test_assign_avoids_flow_endpoints():
    for seed in range(50):
        a = assign(20, 0.5, {1, 20}, random.Random(seed))
        assert len(a.nodes) == 10
        assert not {1, 20} & set(a.nodes)
        assert all(1 <= v <= 20 for v in a.nodes)


def test_assign_explicit_overrides_fraction():
    a = assign(10, 0.9, {1, 10}, random.Random(0), explicit={4: BLACKHOLE})
    assert a.nodes == [4]
    with pytest.raises(ValueError):
        assign(10, 0.0, {1, 10}, random.Random(0), explicit={1: BLACKHOLE})
    with pytest.raises(ValueError):
        assign(10, 0.0, {1, 10}, random.Random(0), explicit={11: BLACKHOLE})


def test_assign_is_seeded():
    a = assign(50, 0.1, {1, 50}, random.Random(9))
    b = assign(50, 0.1, {1, 50}, random.Random(9))
    assert a.nodes == b.nodes


# -- in-network behaviour ----------------------------------------------------

def static_grid(protocol="aodv", **kw):
    return ScenarioConfig(node_count=20, max_speed_mps=0.0, duration_s=30.0, seed=3,
                          protocol=protocol, malicious_fraction=0.0, **kw)


@pytest.mark.parametrize("protocol", ["aodv", "dsr"])
def test_blackhole_next_to_source_hurts_baseline(protocol):
    cfg = static_grid(protocol)
    clean = run_scenario(cfg, positions=grid_positions()).report
    attacked = run_scenario(cfg.but(malicious_nodes=((2, BLACKHOLE),)), positions=grid_positions()).report
    assert attacked.delivered < clean.delivered
    assert attacked.drops_by_reason["blackhole"] > 0


def test_drops_at_honest_nodes_are_routing_failures():
    cfg = ScenarioConfig(duration_s=60.0, seed=4, malicious_fraction=0.2, node_count=40)
    res = run_scenario(cfg, keep_network=True)
    bad = set(res.adversary.nodes)
    for _, node, reason, _ in res.network.ledger.drops:
        if node in bad:
            assert reason == res.adversary.get(node).reason
        else:
            assert reason in ("noroute", "linkbreak")


def test_drop_log_format():
    cfg = static_grid(malicious_nodes=((2, BLACKHOLE),))
    log = run_scenario(cfg, positions=grid_positions()).drop_log
    first = log.splitlines()[0]
    assert first.startswith("t=") and first.endswith(" drop node=2 reason=blackhole")


@pytest.mark.parametrize("protocol", ["aodv", "dsr"])
def test_zero_fraction_is_neutral(protocol):
    cfg = ScenarioConfig(duration_s=20.0, seed=8, protocol=protocol, malicious_fraction=0.0,
                         inesh_enabled=True)
    on = run_scenario(cfg, trace=True)
    off = run_scenario(cfg, trace=True, with_adversary=False)
    assert on.trace == off.trace
    assert on.delivery_trace == off.delivery_trace


def test_false_suspicion_only_moves_trust():
    cfg = static_grid(inesh_enabled=True)
    clean = run_scenario(cfg, positions=grid_positions(), keep_network=True)
    noisy = run_scenario(cfg, positions=grid_positions(), keep_network=True, false_suspicion=0.5)
    assert clean.network.routers[1].trust.trust != noisy.network.routers[1].trust.trust
    assert noisy.report.conserved
