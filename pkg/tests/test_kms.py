"""Decentralized dual-path exchange and the centralized mask protocol."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkdn_trust import presets
from qkdn_trust.bits import BitString
from qkdn_trust.centralized import (
    Mask,
    bob_recover,
    central_combine,
    centralized_send,
    make_alice_mask,
    make_relay_mask,
)
from qkdn_trust.decentralized import dkms_compose_secret, dkms_exchange, dkms_prepare, dkms_recover
from qkdn_trust.errors import ConfigurationError, ProtocolAbort
from qkdn_trust.fabric import TopologySpec, build_topology, provision_link_keys
from qkdn_trust.rng import Rng, ScriptedRng

B = BitString.from_bits


def provisioned(spec, bits, count=2, seed=0):
    topo = build_topology(spec)
    rng = Rng(seed)
    for link_id in sorted(topo.links):
        provision_link_keys(topo, topo.links[link_id], count, bits, rng.stream(link_id))
    return topo


class TestDecentralized:
    def test_prepare(self):
        h = dkms_prepare(B("10110100"))
        assert (h.first_half, h.second_half, h.xor_mask) == (B("1011"), B("0100"), B("1111"))
        assert dkms_prepare(B("0000")).xor_mask == B("00")
        with pytest.raises(ValueError):
            dkms_prepare(B("101"))

    def test_recover_and_compose(self):
        assert dkms_recover(B("1111"), B("1011")) == B("0100")
        assert dkms_recover(B("0110"), B("0000")) == B("0110")
        assert dkms_compose_secret(B("0100"), B("1100")) == B("01001100")
        with pytest.raises(ValueError):
            dkms_compose_secret(BitString(0, 0), BitString(0, 0))

    @given(st.integers(0, 2**32 - 1))
    def test_second_half_round_trip(self, v):
        h = dkms_prepare(BitString(v, 32))
        assert h.xor_mask ^ h.first_half == h.second_half

    def test_worked_example(self):
        topo = provisioned(presets.chain_spec(2, satellite="sat"), 4)
        run = dkms_exchange(topo, "alice", "bob", "sat", ScriptedRng(bits=["10110100"]),
                            ScriptedRng(bits=["01011100"]), 8)
        assert run.delivered == run.alice_result == B("01001100")
        assert run.key_match
        computed = {(n, e.label): e.value for n, t in topo.transcripts.items() for e in t.entries
                    if e.role == "computed" and e.label in ("K'_A2", "K'_B2")}
        assert computed == {("bob", "K'_A2"): B("0100"), ("alice", "K'_B2"): B("1100")}

    def test_all_zero(self):
        topo = provisioned(presets.chain_spec(1, satellite="sat"), 3)
        run = dkms_exchange(topo, "alice", "bob", "sat", ScriptedRng(bits=["000000"]),
                            ScriptedRng(bits=["000000"]), 6)
        assert run.delivered == B("000000")

    @pytest.mark.parametrize("swap", [False, True])
    def test_swapped_paths_still_agree(self, swap):
        topo = provisioned(presets.chain_spec(3, satellite="sat"), 8)
        run = dkms_exchange(topo, "alice", "bob", "sat", Rng(1).stream("a"), Rng(1).stream("b"), 16,
                            swap_paths=swap)
        assert run.key_match

    def test_hidden_halves_stay_home(self):
        topo = provisioned(presets.chain_spec(2, satellite="sat"), 8)
        run = dkms_exchange(topo, "alice", "bob", "sat", Rng(2).stream("a"), Rng(2).stream("b"), 16)
        for t in run.topology.transcripts.values():
            for e in t.entries:
                if e.role in ("sent", "received"):
                    assert not e.expr.is_single("K'_A2") and not e.expr.is_single("K'_B2")

    def test_errors(self):
        topo = provisioned(presets.chain_spec(2), 4)
        with pytest.raises(ConfigurationError):
            dkms_exchange(topo, "alice", "bob", "sat", Rng(0).stream("a"), Rng(0).stream("b"), 8)
        spec = presets.chain_spec(2, satellite="sat")
        spec = TopologySpec(spec.nodes, spec.qlinks, spec.cchannels[:1])
        with pytest.raises(ConfigurationError):
            dkms_exchange(provisioned(spec, 4), "alice", "bob", "sat", Rng(0).stream("a"), Rng(0).stream("b"), 8)
        topo = provisioned(presets.chain_spec(2, satellite="sat"), 4)
        with pytest.raises(ConfigurationError):
            dkms_exchange(topo, "alice", "bob", "sat", Rng(0).stream("a"), Rng(0).stream("b"), 7)

    def test_exhaustion_aborts(self):
        topo = provisioned(presets.chain_spec(2, satellite="sat"), 4, count=1)  # one transit only
        with pytest.raises(ProtocolAbort) as info:
            dkms_exchange(topo, "alice", "bob", "sat", Rng(0).stream("a"), Rng(0).stream("b"), 8)
        assert info.value.run.delivered is None


def fixed_keys_topology(n, keys):
    topo = build_topology(presets.chain_spec(n, central="kms"))
    for link_id, bits in keys.items():
        provision_link_keys(topo, topo.links[link_id], 1, len(bits), ScriptedRng(bits=[bits]))
    return topo


class TestCentralized:
    def test_masks(self):
        assert make_alice_mask(B("1010"), B("0110")).value == B("1100")
        assert make_alice_mask(B("1010"), B("0000")).value == B("1010")
        assert make_relay_mask("n1", B("0110"), B("0011")).value == B("0101")
        assert make_relay_mask("n1", B("0110"), B("0110")).value == B("0000")
        assert bob_recover(B("0011"), B("1001")) == B("1010")

    def test_worked_example(self):
        masks = [Mask("alice", B("1100"), "a"), Mask("n1", B("0101"), "1"), Mask("n2", B("1010"), "2")]
        assert central_combine(masks) == B("0011") == B("1010") ^ B("1001")

    def test_protocol_on_worked_keys(self):
        topo = fixed_keys_topology(2, {"alice-n1": "0110", "n1-n2": "0011", "n2-bob": "1001"})
        run = centralized_send(topo, "alice", "bob", "kms", B("1010"))
        to_kms = [m.payload for m in topo.wire if m.receiver == "kms"]
        assert to_kms == [B("1100"), B("0101"), B("1010")]
        assert run.details["combined"] == B("0011") and run.delivered == B("1010")

    def test_last_relay_mask(self):
        topo = fixed_keys_topology(3, {"alice-n1": "0001", "n1-n2": "0010", "n2-n3": "0100", "n3-bob": "1000"})
        centralized_send(topo, "alice", "bob", "kms", B("1111"))
        (m,) = [m for m in topo.wire if m.sender == "n3"]
        assert m.payload == B("1100") and m.label == "K_{n2-n3#0}⊕K_{n3-bob#0}"

    def test_zero_keys(self):
        topo = fixed_keys_topology(2, {"alice-n1": "0000", "n1-n2": "0000", "n2-bob": "0000"})
        run = centralized_send(topo, "alice", "bob", "kms", B("0110"))
        assert run.details["combined"] == B("0110")

    def test_missing_mask_aborts(self):
        masks = [Mask("alice", B("1100"), "a"), Mask("n2", B("1010"), "2")]
        with pytest.raises(ProtocolAbort):
            central_combine(masks, expected_origins=["alice", "n1", "n2"])
        with pytest.raises(ValueError):
            central_combine([Mask("alice", B("1100"), "a"), Mask("n1", B("10"), "1")])

    def test_central_manager_is_a_single_point_of_failure(self):
        topo = provisioned(presets.chain_spec(2), 4)
        with pytest.raises(ProtocolAbort):
            centralized_send(topo, "alice", "bob", None, B("1010"))

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 8), seed=st.integers(0, 2**32), bits=st.integers(1, 64))
    def test_telescoping(self, n, seed, bits):
        topo = provisioned(presets.chain_spec(n, central="kms"), bits, count=1, seed=seed)
        secret = Rng(seed).stream("secret").bits(bits)
        run = centralized_send(topo, "alice", "bob", "kms", secret)
        last = topo.links[f"n{n}-bob"].pool[0].value
        assert run.details["combined"] == secret ^ last
        assert run.delivered == secret
