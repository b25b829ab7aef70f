from __future__ import annotations

import pytest

from qkdn_trust import presets
from qkdn_trust.bits import BitString
from qkdn_trust.errors import ConfigurationError, KeyExhausted
from qkdn_trust.fabric import (
    Entry,
    TopologySpec,
    build_topology,
    draw_key,
    key_label,
    pool_level,
    provision_link_keys,
)
from qkdn_trust.rng import Rng


def chain2():
    return build_topology(presets.chain_spec(2))


def test_chain_links():
    topo = chain2()
    assert {frozenset(l.endpoints) for l in topo.links.values()} == {
        frozenset(p) for p in [("alice", "n1"), ("n1", "n2"), ("n2", "bob")]
    }
    assert topo.chain("alice", "bob") == ["alice", "n1", "n2", "bob"]


def test_dual_path_topology():
    topo = build_topology(presets.chain_spec(2, satellite="sat"))
    assert topo.nodes["sat"].kind == "satellite"
    assert topo.channel_between("alice", "sat", "classical").secure
    assert topo.channel_between("bob", "sat", "classical").secure
    assert topo.chain("alice", "bob") == ["alice", "n1", "n2", "bob"]


@pytest.mark.parametrize(
    "spec",
    [
        TopologySpec((("alice", "end_host"),), (("alice", "ghost"),)),
        TopologySpec((("alice", "end_host"), ("alice", "relay")), ()),
        TopologySpec((("alice", "wizard"),), ()),
        TopologySpec((("a-b", "relay"),), ()),
        TopologySpec((("alice", "end_host"),), (("alice", "alice"),)),
        TopologySpec((("a", "relay"), ("b", "relay")), (("a", "b"), ("b", "a"))),
        TopologySpec((("a", "relay"), ("b", "relay")), (), (("a", "b", True), ("b", "a", False))),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(ConfigurationError):
        build_topology(spec)


def test_non_chain_rejected_for_chain_protocols():
    topo = build_topology(presets.mesh_spec(2))
    with pytest.raises(ConfigurationError):
        topo.chain("alice", "bob")


def test_classical_channel_alongside_quantum_link():
    spec = TopologySpec((("a", "relay"), ("b", "relay")), (("a", "b"),), (("a", "b", True),))
    topo = build_topology(spec)
    assert topo.channel_between("a", "b", "classical").channel_id == "a-b/classical"
    assert topo.channel_between("a", "b", "link").channel_id == "a-b"


def test_provision_and_level():
    topo = chain2()
    link = topo.links["alice-n1"]
    assert pool_level(topo, link) == 0
    provision_link_keys(topo, link, 4, 16, Rng(0).stream("l"))
    assert pool_level(topo, link) == 4
    provision_link_keys(topo, link, 0, 16, Rng(0).stream("l"))
    assert pool_level(topo, link) == 4
    draw_key(topo, link, "alice")
    assert pool_level(topo, link) == 3


def test_provisioning_is_deterministic():
    a, b = chain2(), chain2()
    for topo in (a, b):
        provision_link_keys(topo, topo.links["n1-n2"], 3, 32, Rng(9).stream("link:n1-n2"))
    assert [k.value for k in a.links["n1-n2"].pool] == [k.value for k in b.links["n1-n2"].pool]


def test_draws_are_distinct_and_exhaust():
    topo = chain2()
    link = topo.links["alice-n1"]
    provision_link_keys(topo, link, 2, 8, Rng(0).stream("l"))
    first, _ = draw_key(topo, link, "n1")
    second, _ = draw_key(topo, link, "alice")
    assert first != second
    with pytest.raises(KeyExhausted):
        draw_key(topo, link, "alice")
    assert pool_level(topo, link) == 0


def test_draw_by_non_endpoint():
    topo = chain2()
    link = topo.links["alice-n1"]
    provision_link_keys(topo, link, 1, 8, Rng(0).stream("l"))
    with pytest.raises(ConfigurationError):
        draw_key(topo, link, "bob")


def test_both_endpoints_observe_drawn_key():
    topo = chain2()
    link = topo.links["alice-n1"]
    provision_link_keys(topo, link, 1, 8, Rng(0).stream("l"))
    key_id, value = draw_key(topo, link, "alice")
    for node in ("alice", "n1"):
        (entry,) = topo.transcripts[node].entries
        assert entry.role == "held_key" and entry.label == key_label(key_id) and entry.value == value
    assert len(topo.transcripts["n2"]) == 0


def test_send_logs_sender_receiver_and_tappers():
    topo = build_topology(presets.chain_spec(1, central="kms"))
    topo.tap("kms-bob", ["n1"])
    x = topo.space.declare("X", BitString(5, 4), "randomness")
    topo.send("kms", "bob", BitString(5, 4), "X", x)
    roles = {n: [(e.role, e.tapped) for e in t.entries] for n, t in topo.transcripts.items() if len(t)}
    assert roles == {"kms": [("sent", False)], "bob": [("received", False)], "n1": [("received", True)]}
    assert not topo.channels["kms-bob"].secure


def test_log_checks_bookkeeping():
    topo = chain2()
    x = topo.space.declare("X", BitString(5, 4), "randomness")
    with pytest.raises(AssertionError):
        topo.log("alice", "computed", "X", BitString(6, 4), x)


def test_transcripts_are_append_only_views():
    topo = chain2()
    t = topo.transcripts["alice"]
    t.append(Entry("computed", "x", BitString(1, 1), None))
    snapshot = t.entries
    assert isinstance(snapshot, tuple)
    t.append(Entry("computed", "y", BitString(0, 1), None))
    assert len(snapshot) == 1 and len(t) == 2
    with pytest.raises(ValueError):
        t.append(Entry("deleted", "z", BitString(0, 1), None))
