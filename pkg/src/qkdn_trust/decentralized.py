"""Dual-path decentralized key agreement.

Each party splits a local random string into halves, sends the XOR of its
halves over the terrestrial relay chain and its first half over the
satellite channel. The peer unmasks the second half, which never travels.
The agreed key is Alice's hidden half followed by Bob's hidden half.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitString
from .errors import ConfigurationError, ProtocolAbort
from .fabric import Topology
from .protocols import ProtocolRun, _abort, forward
from .rng import RandomSource
from .sharing import concat_join, concat_split


@dataclass(frozen=True)
class HalfSplit:
    original: BitString
    first_half: BitString
    second_half: BitString
    xor_mask: BitString

    def __post_init__(self) -> None:
        if self.first_half + self.second_half != self.original:
            raise ValueError("halves do not concatenate to the original")
        if self.first_half ^ self.second_half != self.xor_mask:
            raise ValueError("mask is not the xor of the halves")


def dkms_prepare(party_random: BitString) -> HalfSplit:
    first, second = concat_split(party_random)
    return HalfSplit(party_random, first, second, first ^ second)


def dkms_recover(mask: BitString, transmitted_half: BitString) -> BitString:
    """The hidden half from the peer's mask and its transmitted half."""
    return mask ^ transmitted_half


def dkms_compose_secret(alice_half: BitString, bob_half: BitString) -> BitString:
    """Alice-derived half first, Bob-derived half second, at both parties."""
    if alice_half.length != bob_half.length:
        raise ValueError("halves differ in length")
    return concat_join(alice_half, bob_half)


def dkms_exchange(
    topo: Topology,
    alice: str,
    bob: str,
    satellite: str,
    rng_alice: RandomSource,
    rng_bob: RandomSource,
    secret_bits: int,
    *,
    eastbound_first: bool = True,
    swap_paths: bool = False,
) -> ProtocolRun:
    """Run the two-way exchange; both parties end with the same composed key.

    ``swap_paths`` sends the masks via the satellite and the first halves via
    the relays, the wrong way round, to show how verdicts shift.
    """
    if secret_bits < 2 or secret_bits % 2:
        raise ConfigurationError(f"decentralized exchange needs an even secret length, got {secret_bits}")
    if satellite not in topo.nodes:
        raise ConfigurationError(f"no satellite node {satellite!r}")
    try:
        up_a = topo.channel_between(alice, satellite, "classical")
        up_b = topo.channel_between(bob, satellite, "classical")
    except ConfigurationError as exc:
        raise ConfigurationError(f"satellite channel missing: {exc}") from None
    chain = topo.chain(alice, bob)
    half = secret_bits // 2

    space = topo.space
    split_a = dkms_prepare(rng_alice.bits(secret_bits))
    split_b = dkms_prepare(rng_bob.bits(secret_bits))
    a1 = space.declare("K'_A1", split_a.first_half, "randomness")
    a2 = space.declare("K'_A2", split_a.second_half, "randomness")
    b1 = space.declare("K'_B1", split_b.first_half, "randomness")
    b2 = space.declare("K'_B2", split_b.second_half, "randomness")
    target = a2 + b2
    run = ProtocolRun(
        "decentralized", topo, alice, bob, target, "PAT",
        intermediates=tuple(dict.fromkeys([*chain[1:-1], satellite])),
        material=[("K'_A1", a1), ("K'_A2", a2), ("K'_B1", b1), ("K'_B2", b2)],
        paths=(tuple(chain), (alice, satellite, bob)),
        disjoint=satellite not in chain,
        secret=dkms_compose_secret(split_a.second_half, split_b.second_half),
    )
    run.details["half_bits"] = half

    for name, split, e1, e2, who in (("A", split_a, a1, a2, alice), ("B", split_b, b1, b2, bob)):
        topo.log(who, "held_key", f"K'_{name}1", split.first_half, e1)
        topo.log(who, "held_key", f"K'_{name}2", split.second_half, e2)
    k_x, k_y = a1 ^ a2, b1 ^ b2
    topo.log(alice, "computed", "K_X", split_a.xor_mask, k_x)
    topo.log(bob, "computed", "K_Y", split_b.xor_mask, k_y)

    def terrestrial(sender_path, value, label, expr):
        return forward(topo, sender_path, value, label, expr)

    def via_satellite(src, dst, up, down, value, label, expr):
        topo.send(src, satellite, value, label, expr, channel=up)
        topo.send(satellite, dst, value, label, expr, channel=down)
        return value

    east, west = chain, chain[::-1]
    if swap_paths:
        legs = {
            "east_relay": (east, split_a.first_half, "K'_A1", a1),
            "west_relay": (west, split_b.first_half, "K'_B1", b1),
            "east_sat": (alice, bob, up_a, up_b, split_a.xor_mask, "K_X", k_x),
            "west_sat": (bob, alice, up_b, up_a, split_b.xor_mask, "K_Y", k_y),
        }
    else:
        legs = {
            "east_relay": (east, split_a.xor_mask, "K_X", k_x),
            "west_relay": (west, split_b.xor_mask, "K_Y", k_y),
            "east_sat": (alice, bob, up_a, up_b, split_a.first_half, "K'_A1", a1),
            "west_sat": (bob, alice, up_b, up_a, split_b.first_half, "K'_B1", b1),
        }
    order = ("east", "west") if eastbound_first else ("west", "east")
    got: dict[str, BitString] = {}
    try:
        for direction in order:
            got[f"{direction}_relay"] = terrestrial(*legs[f"{direction}_relay"])
            got[f"{direction}_sat"] = via_satellite(*legs[f"{direction}_sat"])
    except ProtocolAbort as exc:
        raise _abort(run, exc)

    # Bob unmasks Alice's hidden half; Alice unmasks Bob's
    bob_a2 = dkms_recover(got["east_relay"], got["east_sat"])
    alice_b2 = dkms_recover(got["west_relay"], got["west_sat"])
    topo.log(bob, "computed", "K'_A2", bob_a2, a2)
    topo.log(alice, "computed", "K'_B2", alice_b2, b2)
    run.alice_result = dkms_compose_secret(split_a.second_half, alice_b2)
    run.delivered = dkms_compose_secret(bob_a2, split_b.second_half)
    topo.log(alice, "computed", "K_S", run.alice_result, target)
    topo.log(bob, "computed", "K_S", run.delivered, target)
    return run
