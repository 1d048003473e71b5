"""Independent reference computations used by the tests.

Nothing here calls the solvers under test; flows are found by solving the
KKT system of the constrained energy minimisation directly.
"""

import math

import numpy as np

from altflow.network import Network


def random_network(rng, max_edges=8, min_vertices=3):
    """Connected network with random weights and orientations, labelled 0..k-1."""
    while True:
        k = int(rng.integers(min_vertices, max_edges + 2))
        if k - 1 <= max_edges:
            break
    pairs = set()
    for v in range(1, k):
        pairs.add((int(rng.integers(v)), v))
    extra = int(rng.integers(0, max_edges - (k - 1) + 1))
    candidates = [(a, b) for a in range(k) for b in range(a + 1, k) if (a, b) not in pairs]
    rng.shuffle(candidates)
    pairs.update(candidates[:extra])
    arcs = []
    for a, b in sorted(pairs):
        w = float(rng.choice([0.25, 0.5, 1.0, 2.0, 3.0]))
        arcs.append((a, b, w) if rng.random() < 0.5 else (b, a, w))
    return Network.from_arcs(arcs, vertices=list(range(k)))


def random_extra_states(net, rng, s, t, complex_states=False):
    """At most one extra state per interior vertex of degree >= 3 (>= 4 if complex)."""
    extra = {}
    for u in net.vertices:
        if u in (s, t):
            continue
        need = 4 if complex_states else 3
        if net.degree(u) < need or rng.random() < 0.4:
            continue
        psi = np.zeros(net.dim, dtype=complex if complex_states else float)
        for v in net.neighbours(u):
            amp = rng.normal()
            if complex_states:
                amp = amp + 1j * rng.normal()
            psi[net.slot(u, v)] = amp
        extra[u] = [psi / np.linalg.norm(psi)]
    return extra


def kkt_flow(net, s, t, extra=None, tol=1e-8):
    """Minimise sum theta^2 / w over unit s-t flows orthogonal to the extra states.

    Returns theta in stored arc orientation, or None when no such flow exists.
    """
    m = net.n_edges
    rows, rhs = [], []
    for u in net.vertices:
        row = np.zeros(m)
        for i, (a, b) in enumerate(net.arcs):
            if a == u:
                row[i] += 1
            elif b == u:
                row[i] -= 1
        rows.append(row)
        rhs.append(1.0 if u == s else -1.0 if u == t else 0.0)
    for u, states in (extra or {}).items():
        for psi in states:
            row = np.zeros(m, dtype=complex)
            for v in net.neighbours(u):
                i = net.arc_id(u, v)
                # the flow state carries theta / sqrt(w) on both directions of an arc
                row[i] += np.conj(psi[net.slot(u, v)]) / np.sqrt(net.weights[i])
            rows.append(row.real)
            rhs.append(0.0)
            if np.any(np.abs(row.imag) > 0):
                rows.append(row.imag)
                rhs.append(0.0)
    C = np.array(rows)
    d = np.array(rhs)
    K = np.block([[2 * np.diag(1 / np.asarray(net.weights)), C.T],
                  [C, np.zeros((len(C), len(C)))]])
    sol = np.linalg.lstsq(K, np.concatenate([np.zeros(m), d]), rcond=None)[0]
    theta = sol[:m]
    if np.linalg.norm(C @ theta - d) > tol:
        return None
    return theta


def random_hierarchical_spec(rng, min_length=2, max_length=5, max_size=4):
    """Rejection-sample a valid balanced layered spec."""
    from altflow.generators import HierarchicalSpec

    while True:
        n = int(rng.integers(min_length, max_length + 1))
        sizes = [1] + [int(x) for x in rng.integers(1, max_size + 1, size=n - 1)] + [1]
        edges = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            lcm = a * b // math.gcd(a, b)
            edges.append(lcm * int(rng.integers(1, 3)))
        try:
            return HierarchicalSpec(tuple(sizes), tuple(edges))
        except ValueError:
            continue
