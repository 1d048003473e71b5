"""The eleven acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
terminal summary.  Two criteria cannot hold as stated and are marked as
strict expected failures (see the notes on each test).
"""

import math
import time

import numpy as np
import pytest

from altflow import generators as gen
from altflow.alt import Infeasible, alt_edge_potential, alt_electrical_flow, alt_incidence_matrix, \
    check_alt_kirchhoff, AltNeighbourhoods
from altflow.network import flow_state
from altflow.oracle import (OracleGraph, alg1_find_target, alg2_find_path,
                            classical_embedding_baseline)
from altflow.solver import effective_resistance, electrical_flow, scaled_electrical_flow, \
    vertex_potential
from altflow.walk import (WalkOperator, alt_potential_state, alt_walk, effective_spectral_gap_check,
                          lemma_band, pe_zero, projector_alt_star_space, projector_antisymmetric,
                          simulate_pe_circuit, source_state, trace_distance_pure)
from oracles import kkt_flow, random_extra_states, random_hierarchical_spec, random_network

SQ3 = math.sqrt(3)


def test_criterion_01_worked_example(acceptance):
    start = time.perf_counter()
    d = gen.diamond()
    net = d.net
    checks = []
    wtheta = scaled_electrical_flow(net, "s", "t")
    checks.append(np.allclose(wtheta, [1, 2 / 3, 4 / 3, 2 / 3], atol=1e-9, rtol=0))
    checks.append(abs(effective_resistance(net, "s", "t") - 11 / 3) <= 1e-9)
    p = vertex_potential(net, "s", "t")
    checks.append(np.allclose([p[v] for v in "sxyt"], [11 / 3, 8 / 3, 4 / 3, 0], atol=1e-9, rtol=0))
    f = alt_electrical_flow(net, d.psi, "s", "t")
    checks.append(np.allclose(f.values / np.sqrt(net.weights), 1, atol=1e-9, rtol=0))
    checks.append(abs(f.energy() - 4) <= 1e-9)
    pe, coeffs = alt_edge_potential(net, d.psi, "s", "t")
    checks.append(np.allclose([coeffs[c] for c in [("s", 0), ("x", 0), ("x", 1), ("y", 0), ("t", 0)]],
                              [4, 3, -SQ3 / 3, 2, 0], atol=1e-9, rtol=0))
    want = {("s", "x"): 4, ("x", "s"): 3, ("x", "y"): 4, ("y", "x"): 2,
            ("x", "t"): 2, ("t", "x"): 0, ("y", "t"): 2, ("t", "y"): 0}
    checks.append(all(abs(pe[k] - v) <= 1e-9 for k, v in want.items()))
    elapsed = time.perf_counter() - start
    ok = all(checks) and elapsed < 1.0
    acceptance(1, "worked example", ok, f"{sum(checks)}/{len(checks)} checks, {elapsed:.3f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="stated violation sqrt(1/6) disagrees with the "
                   "weighted network; the computed value is sqrt(1/5) (see decisions ledger)")
def test_criterion_02_counterexample(acceptance):
    c = gen.diamond(drop_yt=True)
    res = alt_electrical_flow(c.net, c.psi, "s", "t")
    # the unique unit s-t flow: one unit through x straight to t
    only = kkt_flow(c.net, "s", "t")
    from altflow.network import Flow
    f = Flow(c.net, only, source="s", sink="t")
    violation = check_alt_kirchhoff(c.net, c.psi, f)
    ok = isinstance(res, Infeasible) and abs(violation - math.sqrt(1 / 6)) <= 1e-9
    acceptance(2, "counterexample infeasible with violation sqrt(1/6)", ok,
               f"infeasible={isinstance(res, Infeasible)}, violation={violation:.12f}, "
               f"expected {math.sqrt(1 / 6):.12f}")
    assert isinstance(res, Infeasible)
    assert abs(violation - math.sqrt(1 / 6)) <= 1e-9


def _g1_energy_at(inst, x):
    """Energy of the unique alternative unit flow sending x through s -> v2."""
    net = inst.net
    M = alt_incidence_matrix(net, inst.psi.realified(), "s", "t")
    b = np.zeros(M.shape[1])
    b[0], b[-1] = 1.0, -1.0
    pin = np.zeros(net.n_edges)
    pin[net.arc_id("s", "v2")] = 1 / math.sqrt(net.weight("s", "v2"))
    A = np.vstack([M.T, pin])
    rhs = np.append(b, x)
    wtheta = np.linalg.lstsq(A, rhs, rcond=None)[0]
    assert np.linalg.norm(A @ wtheta - rhs) < 1e-9
    assert np.linalg.matrix_rank(A) == net.n_edges  # the split fixes the flow
    return float(wtheta @ wtheta)


def test_criterion_03_g1(acceptance):
    g1 = gen.graph_G1()
    f = alt_electrical_flow(g1.net, g1.psi, "s", "t")
    x = f["s", "v2"]
    grid = np.linspace(0, 1, 20)
    worst = max(abs(_g1_energy_at(g1, xx) - (5 * (1 - xx) ** 2 + 4 * xx ** 2 + 3)) for xx in grid)
    ok = abs(x - 5 / 9) <= 1e-9 and abs(f.energy() - 47 / 9) <= 1e-9 and worst <= 1e-9
    acceptance(3, "G1 split and energy functional", ok,
               f"x={x:.12f}, R_alt={f.energy():.12f}, grid error {worst:.1e}")
    assert ok


def test_criterion_04_g2(acceptance):
    rows = []
    ok = True
    for h in (1, 3):
        g2 = gen.graph_G2(h, seed=h)
        R = gen.gadget_resistance(h)
        x_want = (5 + 2 * R) / (9 + 3 * R)
        f = alt_electrical_flow(g2.net, g2.psi, g2.s, g2.t)
        x = f[g2.path[0], g2.path[1]]
        good = abs(x - x_want) <= 1e-8 and abs(f.energy() - ((4 + R) * x_want + 3)) <= 1e-8
        ok &= good
        rows.append(f"h={h}: R={R:g} x={x:.10f} R_alt={f.energy():.10f}")
    acceptance(4, "G2 split and alternative resistance", ok, "; ".join(rows))
    assert ok


def test_criterion_05_hierarchical_coincidence(acceptance):
    start = time.perf_counter()
    cases = [(f"welded h={h}", gen.welded_tree(h, seed=h), gen.welded_resistance(h)) for h in (2, 3, 4)]
    spec = random_hierarchical_spec(np.random.default_rng(2024), min_length=4)
    cases.append((f"random spec {spec.sizes}/{spec.edges}", gen.hierarchical_1d(spec, 5),
                  spec.resistance()))
    ok = True
    details = []
    for name, inst, R_closed in cases:
        f = electrical_flow(inst.net, inst.s, inst.t)
        g = alt_electrical_flow(inst.net, inst.psi, inst.s, inst.t)
        viol = check_alt_kirchhoff(inst.net, inst.psi, f)
        good = (not isinstance(g, Infeasible) and viol <= 1e-9
                and np.allclose(f.values, g.values, atol=1e-9, rtol=0)
                and abs(f.energy() - R_closed) <= 1e-9)
        ok &= good
        details.append(f"{name}: viol {viol:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    acceptance(5, "hierarchical flow equals alternative flow", ok,
               "; ".join(details) + f"; {elapsed:.2f} s")
    assert ok


def _walk_pieces(inst):
    net, s, t = inst.net, inst.s, inst.t
    f = alt_electrical_flow(net, inst.psi, s, t)
    R = f.energy()
    ws = net.weighted_degree(s)
    pe, _ = alt_edge_potential(net, inst.psi, s, t)
    pstate = alt_potential_state(net, pe, s, R)
    PA = projector_antisymmetric(net)
    PB = projector_alt_star_space(net, inst.psi, s, t)
    U = alt_walk(net, inst.psi, s, t)
    return f, R, ws, pstate, PA, PB, U


def test_criterion_06_spectral_properties(acceptance):
    ok = True
    details = []
    for name, inst in (("worked example", gen.diamond()), ("welded h=2", gen.welded_tree(2, 0))):
        f, R, ws, pstate, PA, PB, U = _walk_pieces(inst)
        theta = flow_state(f)
        eig = np.linalg.norm(U.matrix @ theta - theta)
        decomp = np.linalg.norm(source_state(inst.net, inst.s)
                                - (theta - (np.eye(len(PA)) - PA) @ pstate) / math.sqrt(R * ws))
        phi = -pstate / math.sqrt(R * ws)
        gap = all(effective_spectral_gap_check(U, PA, phi, eps, PB=PB) for eps in (0.01, 0.1, 0.5))
        good = eig <= 1e-9 and decomp <= 1e-9 and gap
        ok &= good
        details.append(f"{name}: eig {eig:.1e}, decomposition {decomp:.1e}, gap {gap}")
    acceptance(6, "eigenvector, decomposition and spectral gap", ok, "; ".join(details))
    assert ok


def test_criterion_07_phase_estimation(acceptance):
    d = gen.diamond()
    f, R, ws, pstate, PA, PB, U = _walk_pieces(d)
    p = 1 / (R * ws)
    phi_norm = np.linalg.norm(pstate) / math.sqrt(R * ws)
    start = source_state(d.net, "s")
    theta = flow_state(f)
    ok = True
    details = []
    for T in (10, 100, 1000, 10000):
        p0, post = pe_zero(U, start, T)
        lo, hi = lemma_band(p, phi_norm, T)
        dist = trace_distance_pure(post, theta)
        bound = math.sqrt(17 * math.pi ** 2 * (1 / T) * phi_norm / (16 * p))
        good = lo - 1e-12 <= p0 <= hi + 1e-12 and dist <= bound
        ok &= good
        details.append(f"T={T}: p'={p0:.6f}")

    # two-dimensional toy against a statevector circuit
    rng = np.random.default_rng(7)
    toy = np.diag(np.exp(1j * np.array([0.0, 0.9])))
    basis = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    toy = basis @ toy @ basis.conj().T
    psi = np.array([0.6, 0.8j])
    T, shots = 8, 100_000
    p_model, _ = pe_zero(WalkOperator(toy), psi, T)
    counts = simulate_pe_circuit(toy, psi, T, shots, rng)
    sigma = math.sqrt(p_model * (1 - p_model) / shots)
    mc = counts[0] / shots
    good = abs(mc - p_model) <= 3 * sigma
    ok &= good
    details.append(f"toy model {p_model:.5f} vs circuit {mc:.5f} (3 sigma {3 * sigma:.5f})")
    acceptance(7, "phase estimation band, trace distance and circuit check", ok, "; ".join(details))
    assert ok


def _alg1_rate(h, seeds):
    wins = 0
    for seed in range(seeds):
        inst = gen.welded_tree(h, seed)
        o = OracleGraph.from_instance(inst, seed=seed)
        wins += alg1_find_target(o, inst.psi, 0.1, mode="analytic", seed=seed).success
    return wins / seeds


def test_criterion_08_algorithm1(acceptance):
    start = time.perf_counter()
    rates = {h: _alg1_rate(h, 100) for h in (2, 3)}
    elapsed = time.perf_counter() - start
    ok = all(r >= 0.85 for r in rates.values()) and elapsed < 120
    acceptance(8, "algorithm 1 on welded trees", ok,
               ", ".join(f"h={h}: {r:.2f}" for h, r in rates.items()) + f", {elapsed:.1f} s")
    assert ok


def _valid_path(o, path, samples):
    net, _, vertex = o._simulator_view()
    if not path or path[0] != o.source or not o.is_target(path[-1]):
        return False
    sampled = {frozenset(e) for e in samples}
    for a, b in zip(path, path[1:]):
        if vertex[b] not in net.neighbours(vertex[a]) or frozenset((a, b)) not in sampled:
            return False
    return True


def test_criterion_09_algorithm2(acceptance):
    start = time.perf_counter()
    rates = {}
    for n in (1, 2):
        good = 0
        for seed in range(50):
            inst = gen.welded_circuit(n, seed)
            o = OracleGraph.from_instance(inst, seed=seed)
            r = alg2_find_path(o, inst.psi, 0.1, n, mode="analytic", seed=seed)
            good += r.success and _valid_path(o, r.path, r.samples)
        rates[n] = good / 50
    elapsed = time.perf_counter() - start
    ok = all(r >= 0.85 for r in rates.values()) and elapsed < 300
    acceptance(9, "algorithm 2 on welded tree circuits", ok,
               ", ".join(f"n={n}: {r:.2f}" for n, r in rates.items()) + f", {elapsed:.1f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="at desk scale the quantum run spends about 1e12 coherent "
                   "queries, far more than the classical embedding needs (see decisions ledger)")
def test_criterion_10_separation(acceptance):
    n = 3
    quantum = []
    for seed in range(10):
        inst = gen.welded_circuit(n, seed)
        o = OracleGraph.from_instance(inst, seed=seed)
        r = alg2_find_path(o, inst.psi, 0.1, n, mode="analytic", seed=seed)
        quantum.append((r.success and _valid_path(o, r.path, r.samples), r.queries))
    q_rate = np.mean([w for w, _ in quantum])
    budget = int(np.median([q for _, q in quantum]))
    wins = 0
    for seed in range(200):
        inst = gen.welded_circuit(n, seed)
        o = OracleGraph.from_instance(inst, seed=seed)
        wins += classical_embedding_baseline(o, budget, seed, inst.middle, inst.trees).win
    c_rate = wins / 200
    ok = c_rate < 0.05 and q_rate > 0.80
    acceptance(10, "separation at matched query budget", ok,
               f"budget {budget:.3g} queries: quantum {q_rate:.2f}, classical {c_rate:.2f}")
    assert c_rate < 0.05
    assert q_rate > 0.80


def test_criterion_11_kkt_equivalence(acceptance):
    rng = np.random.default_rng(11)
    worst_alt = worst_cl = 0.0
    agree = True
    done = 0
    while done < 20:
        net = random_network(rng, max_edges=8)
        s, t = 0, len(net.vertices) - 1
        extra = random_extra_states(net, rng, s, t, complex_states=bool(done % 2))
        psi = AltNeighbourhoods(net, extra)
        f = alt_electrical_flow(net, psi, s, t)
        ref = kkt_flow(net, s, t, extra)
        if ref is None or isinstance(f, Infeasible):
            agree &= ref is None and isinstance(f, Infeasible)
        else:
            worst_alt = max(worst_alt, float(np.max(np.abs(f.values - ref))))
        worst_cl = max(worst_cl, float(np.max(np.abs(electrical_flow(net, s, t).values
                                                     - kkt_flow(net, s, t)))))
        done += 1
    ok = agree and worst_alt <= 1e-8 and worst_cl <= 1e-8
    acceptance(11, "KKT brute force agrees on 20 random networks", ok,
               f"alternative {worst_alt:.1e}, classical {worst_cl:.1e}")
    assert ok
