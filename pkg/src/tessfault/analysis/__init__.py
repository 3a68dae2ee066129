"""Certificates and checks: classification, islands, bridges, Toom potentials, flows, explanation graphs."""

from .certificates import (
    BridgeCertificate,
    IslandCertificate,
    OppositeEdgeSet,
    make_bridge,
    make_island,
    opposite_edge_set,
    verify_bridge,
    verify_island,
)
from .classify import Tolerance, classify, format_table, table
from .explanation import (
    ExplanationGraph,
    Trajectory,
    check_graph,
    count_bound,
    count_bound_sum,
    error_bound,
    error_bound_exact,
    extract_explanation_graph,
    record_trajectory,
)
from .flows import FlowAssignment, FlowReport, make_flow, verify_flows
from .toom import ToomPotential, ToomReport, build_potential, verify_toom

__all__ = [
    "BridgeCertificate",
    "ExplanationGraph",
    "FlowAssignment",
    "FlowReport",
    "IslandCertificate",
    "OppositeEdgeSet",
    "Tolerance",
    "ToomPotential",
    "ToomReport",
    "Trajectory",
    "build_potential",
    "check_graph",
    "classify",
    "count_bound",
    "count_bound_sum",
    "error_bound",
    "error_bound_exact",
    "extract_explanation_graph",
    "format_table",
    "make_bridge",
    "make_flow",
    "make_island",
    "opposite_edge_set",
    "record_trajectory",
    "table",
    "verify_bridge",
    "verify_flows",
    "verify_island",
    "verify_toom",
]
