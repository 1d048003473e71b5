"""Alternative neighbourhoods and the flows and potentials they induce.

Every vertex u carries an orthonormal list of arc states supported on the
arcs leaving u, the first of which is the star state.  A flow obeys the
alternative Kirchhoff law when its flow state is orthogonal to all of them
at every interior vertex.  Such a flow may fail to exist; the solver then
returns an `Infeasible` value carrying the least-squares residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import tolerances
from .network import EdgePotential, Flow, Network, Vertex, flow_state, star_state
from .solver import pseudoinverse


def orthonormalize(psis: list, tol: float | None = None) -> list:
    """Gram-Schmidt keeping the first state verbatim and dropping dependent ones."""
    tol = tolerances.get("dependence_tol") if tol is None else tol
    if not psis:
        raise ValueError("need at least one state")
    first = np.asarray(psis[0])
    norm = np.linalg.norm(first)
    if norm < tol:
        raise ValueError("first state is zero")
    if abs(norm - 1) > 1e-9:
        raise ValueError("first state must be unit norm")
    basis = [first]
    for psi in psis[1:]:
        r = np.asarray(psi, dtype=complex)
        for _ in range(2):  # second pass cleans up round-off
            for b in basis:
                r = r - np.vdot(b, r) * b
        n = np.linalg.norm(r)
        if n >= tol:
            r = r / n
            if np.allclose(r.imag, 0, atol=1e-15):
                r = r.real
            basis.append(r)
    return basis


def fourier_neighbourhood(net: Network, u: Vertex, which: Iterable[int]) -> list:
    """Fourier states (1/sqrt D) sum_i w^{ij} |u,v_i> over ascending neighbours."""
    nbrs = net.neighbours(u)
    D = len(nbrs)
    if D == 0:
        raise ValueError(f"vertex {u!r} has no neighbours")
    slots = [net.slot(u, v) for v in nbrs]
    out = []
    for j in which:
        psi = np.zeros(net.dim, dtype=complex)
        psi[slots] = np.exp(2j * np.pi * j * np.arange(D) / D) / np.sqrt(D)
        out.append(psi)
    return out


def realify(states: list) -> list:
    """Real orthonormal basis of the real span of Re and Im parts."""
    parts = []
    for psi in states:
        psi = np.asarray(psi)
        parts.append(np.real(psi).astype(float))
        if np.iscomplexobj(psi):
            parts.append(np.imag(psi).astype(float))
    first = parts[0] / np.linalg.norm(parts[0])
    return [np.real(b) for b in orthonormalize([first] + parts[1:])]


class AltNeighbourhoods:
    """Per-vertex orthonormal bases whose first element is the star state."""

    def __init__(self, net: Network, extra: Mapping | None = None):
        extra = dict(extra or {})
        for u in extra:
            net.index(u)
        bases = {}
        for u in net.vertices:
            states = [star_state(net, u)] + [np.asarray(p) for p in extra.get(u, [])]
            bases[u] = orthonormalize(states)
        self._init(net, bases)

    @classmethod
    def from_bases(cls, net: Network, bases: Mapping) -> "AltNeighbourhoods":
        obj = cls.__new__(cls)
        obj._init(net, {u: [np.asarray(b) for b in bases[u]] for u in net.vertices})
        return obj

    def _init(self, net: Network, bases: dict):
        self.net = net
        self._bases = bases
        self._validate()

    def _validate(self):
        net = self.net
        for u, basis in self._bases.items():
            allowed = np.zeros(net.dim, dtype=bool)
            allowed[[net.slot(u, v) for v in net.neighbours(u)]] = True
            if not np.allclose(basis[0], star_state(net, u), atol=1e-9):
                raise ValueError(f"first state at {u!r} is not the star state")
            if len(basis) > 1 and len(basis) >= net.degree(u):
                raise ValueError(f"too many alternative states at {u!r}")
            G = np.array([[np.vdot(a, b) for b in basis] for a in basis])
            if not np.allclose(G, np.eye(len(basis)), atol=1e-9):
                raise ValueError(f"states at {u!r} are not orthonormal")
            for b in basis:
                if np.any(np.abs(b[~allowed]) > 1e-12):
                    raise ValueError(f"state at {u!r} leaks outside its arcs")

    def basis(self, u: Vertex) -> list:
        return list(self._bases[u])

    def size(self, u: Vertex) -> int:
        return len(self._bases[u])

    def columns(self, s: Vertex, t: Vertex) -> list:
        """Column labels (u, i): source first, interior pairs, sink last."""
        cols = [(s, 0)]
        for u in self.net.vertices:
            if u not in (s, t):
                cols.extend((u, i) for i in range(self.size(u)))
        cols.append((t, 0))
        return cols

    def is_real(self) -> bool:
        return all(not np.iscomplexobj(b) or np.allclose(b.imag, 0)
                   for basis in self._bases.values() for b in basis)

    def realified(self) -> "AltNeighbourhoods":
        """Same real span, real basis; exact for conjugation-closed spans."""
        return AltNeighbourhoods.from_bases(
            self.net, {u: realify(b) for u, b in self._bases.items()})

    def extras(self) -> dict:
        return {u: b[1:] for u, b in self._bases.items() if len(b) > 1}

    def to_dict(self) -> dict:
        out = {}
        for u, basis in self._bases.items():
            states = []
            for b in basis:
                b = np.asarray(b, dtype=complex)
                states.append([{"arc": list(self.net.slot_pair(k)),
                                "re": float(b[k].real), "im": float(b[k].imag)}
                               for k in np.flatnonzero(np.abs(b) > 0)])
            out[str(u)] = states
        return out

    @classmethod
    def from_dict(cls, net: Network, d: dict) -> "AltNeighbourhoods":
        lookup = {str(u): u for u in net.vertices}
        bases = {}
        for key, states in d.items():
            vecs = []
            for entries in states:
                psi = np.zeros(net.dim, dtype=complex)
                for e in entries:
                    psi[net.slot(*e["arc"])] = e["re"] + 1j * e["im"]
                vecs.append(psi.real if np.allclose(psi.imag, 0) else psi)
            bases[lookup[key]] = vecs
        return cls.from_bases(net, bases)


def alt_incidence_matrix(net: Network, psi: AltNeighbourhoods, s: Vertex, t: Vertex) -> np.ndarray:
    """|E| x |V_alt| matrix with sqrt(w_u) <u,v|psi_(u,i)> entries."""
    cols = psi.columns(s, t)
    dtype = float if psi.is_real() else complex
    M = np.zeros((net.n_edges, len(cols)), dtype=dtype)
    for j, (u, i) in enumerate(cols):
        b = psi.basis(u)[i]
        scale = np.sqrt(net.weighted_degree(u))
        for v in net.neighbours(u):
            val = b[net.slot(u, v)]
            M[net.arc_id(u, v), j] = scale * (val.real if dtype is float else val)
    return M


@dataclass(frozen=True)
class Infeasible:
    """No unit s-t flow satisfies the alternative Kirchhoff law."""

    residual: float


def _check_terminals(psi: AltNeighbourhoods, s: Vertex, t: Vertex):
    if s == t:
        raise ValueError("source and sink must differ")
    for v in (s, t):
        if psi.size(v) != 1:
            raise ValueError(f"terminal {v!r} must not carry alternative states")


def _solve(net: Network, psi: AltNeighbourhoods, s, t, tol):
    if psi.net is not net and psi.net.dim != net.dim:
        raise ValueError("alternative neighbourhoods belong to another network")
    _check_terminals(psi, s, t)
    real = psi.realified()
    M = alt_incidence_matrix(net, real, s, t)
    b = np.zeros(M.shape[1])
    b[0], b[-1] = 1.0, -1.0
    wtheta = pseudoinverse(M.T) @ b
    residual = float(np.linalg.norm(M.T @ wtheta - b))
    return real, M, wtheta, residual


def alt_electrical_flow(net: Network, psi: AltNeighbourhoods, s: Vertex, t: Vertex,
                        feasibility_tol: float | None = None) -> Flow | Infeasible:
    """Minimum-energy unit s-t flow obeying the alternative Kirchhoff law.

    The solve runs on a real basis of each neighbourhood's span.  Flows are
    real, so orthogonality to a conjugation-closed complex span is the same
    as orthogonality to its real and imaginary parts.
    """
    tol = tolerances.get("feasibility_tol") if feasibility_tol is None else feasibility_tol
    _, _, wtheta, residual = _solve(net, psi, s, t, tol)
    if residual > tol:
        return Infeasible(residual)
    return Flow(net, wtheta * np.sqrt(net.weights), source=s, sink=t)


def alt_effective_resistance(net: Network, psi: AltNeighbourhoods, s: Vertex, t: Vertex) -> float:
    f = alt_electrical_flow(net, psi, s, t)
    if isinstance(f, Infeasible):
        raise ValueError(f"no alternative flow (residual {f.residual:.3g})")
    return f.energy()


def alt_edge_potential(net: Network, psi: AltNeighbourhoods, s: Vertex, t: Vertex,
                       feasibility_tol: float | None = None) -> tuple[EdgePotential, dict]:
    """Edge potential satisfying the alternative Ohm law, plus its coefficients."""
    tol = tolerances.get("feasibility_tol") if feasibility_tol is None else feasibility_tol
    real, M, wtheta, residual = _solve(net, psi, s, t, tol)
    if residual > tol:
        raise ValueError(f"no alternative flow (residual {residual:.3g})")
    cols = real.columns(s, t)
    coef = np.append(pseudoinverse(M[:, :-1]) @ wtheta, 0.0)
    coeffs = {c: float(x) for c, x in zip(cols, coef)}
    values = np.zeros(net.dim)
    for u in net.vertices:
        basis = real.basis(u)
        acc = sum(coeffs.get((u, i), 0.0) * basis[i] for i in range(len(basis)))
        scale = np.sqrt(net.weighted_degree(u))
        for v in net.neighbours(u):
            k = net.slot(u, v)
            values[k] = net.sign(u, v) * scale * acc[k] / np.sqrt(net.weight(u, v))
    return EdgePotential(net, values), coeffs


def check_alt_kirchhoff(net: Network, psi: AltNeighbourhoods, f: Flow,
                        s: Vertex | None = None, t: Vertex | None = None) -> float:
    """Largest |<psi_(u,i)|theta>| over interior vertices."""
    s = f.source if s is None else s
    t = f.sink if t is None else t
    if s is None or t is None:
        ends = [u for u in net.vertices if abs(f.divergence(u)) > 1e-9]
        s = next(u for u in ends if f.divergence(u) > 0)
        t = next(u for u in ends if f.divergence(u) < 0)
    theta = flow_state(f)
    worst = 0.0
    for u in net.vertices:
        if u in (s, t):
            continue
        for b in psi.basis(u):
            worst = max(worst, abs(np.vdot(b, theta)))
    return float(worst)
