"""Classical electrical-network linear algebra.

Columns of every incidence matrix here are ordered source first, then the
interior vertices in network order, then the sink.  Dropping the last
column therefore pins the sink potential to zero.
"""

from __future__ import annotations

import numpy as np

from . import tolerances
from .network import Flow, Network, Vertex, VertexPotential


def vertex_order(net: Network, s: Vertex, t: Vertex) -> list:
    if s == t:
        raise ValueError("source and sink must differ")
    net.index(s)
    net.index(t)
    return [s] + [v for v in net.vertices if v not in (s, t)] + [t]


def incidence_matrix(net: Network, s: Vertex | None = None, t: Vertex | None = None) -> np.ndarray:
    """|E| x |V| matrix with +sqrt(w) at the tail and -sqrt(w) at the head."""
    s = net.vertices[0] if s is None else s
    t = net.vertices[-1] if t is None else t
    col = {v: j for j, v in enumerate(vertex_order(net, s, t))}
    B = np.zeros((net.n_edges, len(net.vertices)))
    for i, ((u, v), w) in enumerate(zip(net.arcs, net.weights)):
        B[i, col[u]] = np.sqrt(w)
        B[i, col[v]] = -np.sqrt(w)
    return B


def pseudoinverse(M: np.ndarray, rel_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse via SVD, dropping singular values below rel_tol * max."""
    rel_tol = tolerances.get("svd_rel_tol") if rel_tol is None else rel_tol
    M = np.asarray(M)
    if M.size == 0:
        return np.zeros(M.shape[::-1], dtype=M.dtype)
    U, sv, Vh = np.linalg.svd(M, full_matrices=False)
    keep = sv > rel_tol * sv[0] if sv.size and sv[0] > 0 else np.zeros_like(sv, dtype=bool)
    inv = np.zeros_like(sv)
    inv[keep] = 1.0 / sv[keep]
    return (Vh.conj().T * inv) @ U.conj().T


def _unit_rhs(n: int) -> np.ndarray:
    b = np.zeros(n)
    b[0], b[-1] = 1.0, -1.0
    return b


def scaled_electrical_flow(net: Network, s: Vertex, t: Vertex) -> np.ndarray:
    """W theta, the flow divided entrywise by sqrt(w)."""
    B = incidence_matrix(net, s, t)
    return pseudoinverse(B.T) @ _unit_rhs(B.shape[1])


def electrical_flow(net: Network, s: Vertex, t: Vertex) -> Flow:
    """Minimum-energy unit s-t flow."""
    wtheta = scaled_electrical_flow(net, s, t)
    return Flow(net, wtheta * np.sqrt(net.weights), source=s, sink=t)


def effective_resistance(net: Network, s: Vertex, t: Vertex) -> float:
    return float(np.sum(scaled_electrical_flow(net, s, t) ** 2))


def vertex_potential(net: Network, s: Vertex, t: Vertex) -> VertexPotential:
    """Potential with p_t = 0 obeying Ohm's law for the electrical flow."""
    order = vertex_order(net, s, t)
    B = incidence_matrix(net, s, t)
    wtheta = pseudoinverse(B.T) @ _unit_rhs(B.shape[1])
    reduced = pseudoinverse(B[:, :-1]) @ wtheta
    values = np.zeros(len(order))
    pos = {v: j for j, v in enumerate(order)}
    for v in net.vertices:
        j = pos[v]
        values[net.index(v)] = reduced[j] if j < len(reduced) else 0.0
    return VertexPotential(net, values)


def weighted_laplacian(net: Network) -> np.ndarray:
    """B^T B in network vertex order."""
    B = incidence_matrix(net, net.vertices[0], net.vertices[-1])
    order = vertex_order(net, net.vertices[0], net.vertices[-1])
    perm = [order.index(v) for v in net.vertices]
    L = B.T @ B
    return L[np.ix_(perm, perm)]
