"""Deterministic simulator of QKD-network key relay with trust grading.

Runs key-management protocols over a network of quantum links and
classical channels, records each node's honest-but-curious view, and
grades every node or coalition as FAT (full access), PAT (partial) or
NAT (no access) to the delivered key.
"""

from __future__ import annotations

from .analysis import LEVELS, TrustVerdict, classify_coalition, classify_node
from .bits import BitString
from .centralized import central_combine, centralized_send
from .decentralized import dkms_exchange
from .errors import AnalysisError, ConfigurationError, KeyExhausted, ProtocolAbort, QkdnError
from .fabric import Topology, TopologySpec, build_topology, draw_key, provision_link_keys
from .harness import RunReport, emit_report, parse_report, run_scenario
from .protocols import ProtocolRun, fat_send, find_disjoint_paths, pat_multipath_send
from .rng import Rng
from .scenario import Scenario, apply_tap, load_scenario, parse_scenario
from .sharing import lagrange_at_zero, shamir_reconstruct, shamir_split, xor_combine, xor_split

__version__ = "0.1.0"

__all__ = [
    "LEVELS", "AnalysisError", "BitString", "ConfigurationError", "KeyExhausted", "ProtocolAbort",
    "ProtocolRun", "QkdnError", "Rng", "RunReport", "Scenario", "Topology", "TopologySpec", "TrustVerdict",
    "apply_tap", "build_topology", "central_combine", "centralized_send", "classify_coalition",
    "classify_node", "dkms_exchange", "draw_key", "emit_report", "fat_send", "find_disjoint_paths",
    "lagrange_at_zero", "load_scenario", "parse_report", "parse_scenario", "pat_multipath_send",
    "provision_link_keys", "run_scenario", "shamir_reconstruct", "shamir_split", "xor_combine", "xor_split",
]
