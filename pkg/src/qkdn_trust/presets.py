"""Ready-made scenarios: relay chains, multipath meshes and their variants."""

from __future__ import annotations

from .fabric import TopologySpec
from .scenario import Scenario, validate


def relay_names(n: int) -> list[str]:
    return [f"n{i}" for i in range(1, n + 1)]


def chain_spec(n: int, *, central: str | None = None, satellite: str | None = None,
               satellite_on_chain: bool = False) -> TopologySpec:
    """alice - n1 - ... - nN - bob, optionally with a central manager or a satellite.

    With ``satellite_on_chain`` the satellite replaces the middle relay, so
    the terrestrial and satellite paths share a node.
    """
    relays = relay_names(n)
    nodes = [("alice", "end_host")]
    if satellite is not None and satellite_on_chain:
        if n < 1:
            raise ValueError("an on-chain satellite needs at least one relay position")
        relays[(n - 1) // 2] = satellite
    nodes += [(r, "satellite" if r == satellite else "relay") for r in relays]
    nodes.append(("bob", "end_host"))
    hops = ["alice", *relays, "bob"]
    qlinks = tuple(zip(hops, hops[1:]))
    cchannels: list[tuple[str, str, bool]] = []
    if central is not None:
        nodes.append((central, "central_kms"))
        cchannels += [(h, central, True) for h in ["alice", *relays]] + [(central, "bob", True)]
    if satellite is not None:
        if not satellite_on_chain:
            nodes.append((satellite, "satellite"))
        cchannels += [("alice", satellite, True), ("bob", satellite, True)]
    return TopologySpec(tuple(nodes), qlinks, tuple(cchannels))


def mesh_spec(k: int, hops: int = 1) -> TopologySpec:
    """k parallel relay paths of ``hops`` relays each; path i uses p{i}r1 .. p{i}r{hops}."""
    nodes = [("alice", "end_host"), ("bob", "end_host")]
    qlinks = []
    for i in range(1, k + 1):
        chain = [f"p{i}r{j}" for j in range(1, hops + 1)]
        nodes += [(r, "relay") for r in chain]
        full = ["alice", *chain, "bob"]
        qlinks += list(zip(full, full[1:]))
    return TopologySpec(tuple(nodes), tuple(qlinks))


def _build(**kw) -> Scenario:
    s = Scenario(**kw)
    validate(s)
    return s


def fat_chain(n: int, secret_bits: int = 16, seed: int = 0, **kw) -> Scenario:
    return _build(topology=chain_spec(n), protocol="fat_chain", secret_bits=secret_bits, seed=seed, **kw)


def centralized(n: int, secret_bits: int = 16, seed: int = 0, **kw) -> Scenario:
    return _build(topology=chain_spec(n, central="kms"), protocol="centralized", secret_bits=secret_bits,
                  seed=seed, central="kms", **kw)


def decentralized(n: int, secret_bits: int = 16, seed: int = 0, *, intersect: bool = False, **kw) -> Scenario:
    spec = chain_spec(n, satellite="sat", satellite_on_chain=intersect)
    return _build(topology=spec, protocol="decentralized", secret_bits=secret_bits, seed=seed,
                  satellite="sat", **kw)


def pat_xor(k: int, secret_bits: int = 16, seed: int = 0, hops: int = 1, **kw) -> Scenario:
    return _build(topology=mesh_spec(k, hops), protocol="pat_xor", secret_bits=secret_bits, seed=seed, k=k, **kw)


def pat_shamir(q: int, t: int, k: int, secret_bits: int = 16, seed: int = 0, hops: int = 1, **kw) -> Scenario:
    return _build(topology=mesh_spec(k, hops), protocol="pat_shamir", secret_bits=secret_bits, seed=seed,
                  q=q, t=t, k=k, **kw)
