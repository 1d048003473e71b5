"""Walk operators on the doubled arc space and an exact phase-estimation model.

The walk is the product of two reflections, (2 P_A - I)(2 P_B - I), where
P_A projects onto antisymmetric arc states and P_B onto the span of the
interior star (or alternative) states.  Phase estimation with T steps is
evaluated in closed form from the eigendecomposition of the walk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from . import tolerances
from .alt import AltNeighbourhoods, EdgePotential
from .network import Network, Vertex, VertexPotential, star_state, swap


def _is_projector(P: np.ndarray, tol: float = 1e-9) -> bool:
    return (np.allclose(P, P.conj().T, atol=tol)
            and np.allclose(P @ P, P, atol=tol))


def projector_antisymmetric(net: Network) -> np.ndarray:
    """(I - SWAP) / 2."""
    m = net.n_edges
    S = np.zeros((net.dim, net.dim))
    S[np.arange(m), np.arange(m) + m] = 1
    S[np.arange(m) + m, np.arange(m)] = 1
    return (np.eye(net.dim) - S) / 2


def _projector(states: list, dim: int) -> np.ndarray:
    if not states:
        return np.zeros((dim, dim))
    V = np.array(states).T
    P = V @ V.conj().T
    return P.real if np.allclose(P.imag, 0) else P


def projector_star_space(net: Network, s: Vertex, t: Vertex) -> np.ndarray:
    """Projector onto span of the interior star states."""
    return _projector([star_state(net, u) for u in net.vertices if u not in (s, t)], net.dim)


def projector_alt_star_space(net: Network, psi: AltNeighbourhoods, s: Vertex, t: Vertex) -> np.ndarray:
    """Projector onto span of every interior alternative state."""
    states = [b for u in net.vertices if u not in (s, t) for b in psi.basis(u)]
    return _projector(states, net.dim)


@dataclass(frozen=True, eq=False)
class WalkOperator:
    """Unitary with an eagerly computed orthonormal eigenbasis."""

    matrix: np.ndarray
    phases: np.ndarray = field(init=False)
    vectors: np.ndarray = field(init=False)

    def __post_init__(self):
        U = np.asarray(self.matrix, dtype=complex)
        if not np.allclose(U.conj().T @ U, np.eye(len(U)), atol=1e-9):
            raise ValueError("walk operator is not unitary")
        # complex Schur form of a normal matrix is diagonal, with unitary Z
        T, Z = schur(U, output="complex")
        phases = np.angle(np.diag(T))
        phases[phases <= -np.pi + 1e-12] = np.pi
        order = np.argsort(phases, kind="stable")
        object.__setattr__(self, "matrix", U)
        object.__setattr__(self, "phases", phases[order])
        object.__setattr__(self, "vectors", Z[:, order])

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def zero_mask(self, tol: float | None = None) -> np.ndarray:
        tol = tolerances.get("eig_phase_tol") if tol is None else tol
        return np.abs(self.phases) < tol

    def eigenspaces(self, tol: float | None = None) -> list:
        """(phase, orthonormal columns) per distinct phase, grouped within tol."""
        tol = tolerances.get("eig_phase_tol") if tol is None else tol
        groups = []
        start = 0
        for k in range(1, self.dim + 1):
            if k == self.dim or self.phases[k] - self.phases[k - 1] > tol:
                block = self.vectors[:, start:k]
                groups.append((float(np.mean(self.phases[start:k])), block))
                start = k
        return groups

    def band_projector(self, eps: float) -> np.ndarray:
        """Projector onto eigenvectors with |phase| <= eps."""
        tol = tolerances.get("eig_phase_tol")
        cols = self.vectors[:, np.abs(self.phases) <= eps + tol]
        return cols @ cols.conj().T

    def spectrum(self, psi: np.ndarray | None = None) -> list:
        """Rows (phase, multiplicity, squared overlap with psi)."""
        rows = []
        for phase, block in self.eigenspaces():
            ov = float(np.sum(np.abs(block.conj().T @ psi) ** 2)) if psi is not None else float("nan")
            rows.append((phase, block.shape[1], ov))
        return rows


def walk_unitary(PA: np.ndarray, PB: np.ndarray) -> WalkOperator:
    """(2 PA - I)(2 PB - I) after checking both are projectors."""
    if not _is_projector(PA) or not _is_projector(PB):
        raise ValueError("walk operands must be orthogonal projectors")
    I = np.eye(len(PA))
    return WalkOperator((2 * PA - I) @ (2 * PB - I))


def alt_walk(net: Network, psi: AltNeighbourhoods, s: Vertex, t: Vertex) -> WalkOperator:
    return walk_unitary(projector_antisymmetric(net), projector_alt_star_space(net, psi, s, t))


def source_state(net: Network, s: Vertex) -> np.ndarray:
    """sqrt(2) (I - P_A) psi_s, the symmetrised star state of the source."""
    psi = star_state(net, s)
    return (psi + swap(net, psi)) / np.sqrt(2)


def potential_state(net: Network, p: VertexPotential, s: Vertex, R: float) -> np.ndarray:
    """sqrt(2/R) sum over u != s of p_u sqrt(w_u) psi_u."""
    out = np.zeros(net.dim)
    for u in net.vertices:
        if u != s:
            out += p[u] * np.sqrt(net.weighted_degree(u)) * star_state(net, u)
    return np.sqrt(2 / R) * out


def alt_potential_state(net: Network, pe: EdgePotential, s: Vertex, R: float) -> np.ndarray:
    """sqrt(2/R) sum over u != s, v of (-1)^Delta p_(u,v) sqrt(w_uv) |u,v>."""
    out = np.zeros(net.dim)
    for u in net.vertices:
        if u == s:
            continue
        for v in net.neighbours(u):
            out[net.slot(u, v)] = net.sign(u, v) * pe[u, v] * np.sqrt(net.weight(u, v))
    return np.sqrt(2 / R) * out


def _fejer_amplitude(phases: np.ndarray, T: int) -> np.ndarray:
    """(1/T) sum_{t<T} e^{i t phase}, equal to 1 at phase 0."""
    z = np.exp(1j * phases)
    small = np.abs(1 - z) < 1e-12
    safe = np.where(small, 0.5, z)  # avoid 0/0; overwritten below
    amp = (1 - safe ** T) / (T * (1 - safe))
    return np.where(small, 1.0 + 0j, amp)


def pe_zero(U: WalkOperator, psi: np.ndarray, T: int) -> tuple[float, np.ndarray]:
    """Probability that T-step phase estimation reports 0, and the state left behind."""
    if int(T) != T or T < 1:
        raise ValueError("T must be a positive integer")
    coeffs = U.vectors.conj().T @ psi
    phases = np.where(U.zero_mask(), 0.0, U.phases)
    amps = _fejer_amplitude(phases, int(T)) * coeffs
    p = float(np.sum(np.abs(amps) ** 2))
    post = U.vectors @ amps
    return p, post / np.sqrt(p) if p > 0 else post


def pe_distribution(U: WalkOperator, psi: np.ndarray, T: int) -> np.ndarray:
    """Probabilities of all T phase-register outcomes."""
    coeffs = np.abs(U.vectors.conj().T @ psi) ** 2
    phases = np.where(U.zero_mask(), 0.0, U.phases)
    grid = 2 * np.pi * np.arange(T) / T
    probs = np.array([np.sum(np.abs(_fejer_amplitude(phases - g, T)) ** 2 * coeffs) for g in grid])
    return probs / probs.sum()


def lemma_band(p: float, phi_norm: float, T: int) -> tuple[float, float]:
    """Interval [p, p + 17 pi^2 delta |phi| / 16] for the zero outcome, delta = 1/T."""
    return p, p + 17 * np.pi ** 2 * phi_norm / (16 * T)


def precision_for(p: float, phi_norm: float, eps: float) -> int:
    """Smallest T whose trace-distance bound sqrt(17 pi^2 |phi| / (16 p T)) is <= eps."""
    return int(np.ceil(17 * np.pi ** 2 * phi_norm / (16 * p * eps ** 2)))


def effective_spectral_gap_check(U: WalkOperator, PA: np.ndarray, phi: np.ndarray, eps: float,
                                 PB: np.ndarray | None = None, tol: float = 1e-9) -> bool:
    """Check |Lambda_eps (I - PA) phi| <= (eps / 2) |phi| for phi in the star space."""
    if PB is not None and np.linalg.norm(PB @ phi - phi) > 1e-8 * max(1.0, np.linalg.norm(phi)):
        raise ValueError("phi must lie in the star space")
    lhs = np.linalg.norm(U.band_projector(eps) @ ((np.eye(len(PA)) - PA) @ phi))
    return bool(lhs <= eps / 2 * np.linalg.norm(phi) + tol)


def trace_distance_pure(a: np.ndarray, b: np.ndarray) -> float:
    ov = abs(np.vdot(a, b)) ** 2
    return float(np.sqrt(max(0.0, 1 - ov)))


def simulate_pe_circuit(U: np.ndarray, psi: np.ndarray, T: int, shots: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Statevector run of T-outcome phase estimation; returns outcome counts.

    Register starts in the uniform superposition, applies controlled U^t and
    an inverse Fourier transform.  Uses matrix powers only, no eigenbasis.
    """
    d = len(psi)
    state = np.zeros((T, d), dtype=complex)
    power = np.eye(d, dtype=complex)
    for t in range(T):
        state[t] = power @ psi / np.sqrt(T)
        power = U @ power
    F = np.exp(-2j * np.pi * np.outer(np.arange(T), np.arange(T)) / T) / np.sqrt(T)
    state = F @ state
    probs = np.sum(np.abs(state) ** 2, axis=1)
    return rng.multinomial(shots, probs / probs.sum())
