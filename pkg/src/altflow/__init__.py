"""Electrical flows with alternative neighbourhoods, and quantum walks built on them."""

from .alt import (AltNeighbourhoods, Infeasible, alt_edge_potential, alt_effective_resistance,
                  alt_electrical_flow, alt_incidence_matrix, check_alt_kirchhoff)
from .network import EdgePotential, Flow, Network, VertexPotential, flow_state, star_state
from .solver import (effective_resistance, electrical_flow, incidence_matrix, pseudoinverse,
                     vertex_potential)
from .walk import WalkOperator, alt_walk, pe_zero, source_state, walk_unitary

__version__ = "0.1.0"

__all__ = [
    "AltNeighbourhoods", "EdgePotential", "Flow", "Infeasible", "Network", "VertexPotential",
    "WalkOperator", "alt_edge_potential", "alt_effective_resistance", "alt_electrical_flow",
    "alt_incidence_matrix", "alt_walk", "check_alt_kirchhoff", "effective_resistance",
    "electrical_flow", "flow_state", "incidence_matrix", "pe_zero", "pseudoinverse",
    "source_state", "star_state", "vertex_potential", "walk_unitary",
]
