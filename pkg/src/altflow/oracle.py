"""Adjacency-list oracle with random names, and the algorithms that use it.

Vertices are only ever exposed through random bit-string names.  Classical
queries (one call of `query`) are counted one by one.  The coherent queries
made inside the simulated quantum walk are charged in bulk: every walk step
costs QUERIES_PER_STEP queries and preparing the source state costs
QUERIES_PER_PREP.

Phase estimation runs in one of two modes.  In "analytic" mode each attempt
succeeds with the exact zero-outcome probability.  In "faithful" mode the
whole phase-register distribution is computed and an outcome is drawn from
it.  Both use the same post-measurement state.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .alt import AltNeighbourhoods, alt_edge_potential, alt_electrical_flow, Infeasible
from .generators import Instance, distance_parity, fourier_states
from .network import Network
from .walk import (alt_potential_state, alt_walk, pe_distribution, pe_zero, precision_for,
                   source_state)

QUERIES_PER_STEP = 2
QUERIES_PER_PREP = 2


class OracleGraph:
    """Names each vertex with a distinct random ell-bit string."""

    def __init__(self, net: Network, s, ell: int | None = None, seed: int = 0,
                 default_ell: int = 0, target=None):
        n_v = len(net.vertices)
        if ell is None:
            ell = max(default_ell, n_v.bit_length() + 1)
        if 2 ** ell <= n_v:
            raise ValueError(f"{ell}-bit names cannot label {n_v} vertices")
        rng = np.random.default_rng(seed)
        codes: set = set()
        while len(codes) < n_v:
            codes.add(int(rng.integers(0, 2 ** ell)))
        codes_list = sorted(codes)
        rng.shuffle(codes_list)
        self._net = net
        self.ell = ell
        self._name = {v: format(c, f"0{ell}b") for v, c in zip(net.vertices, codes_list)}
        self._vertex = {nm: v for v, nm in self._name.items()}
        self._adj = {}
        for v in net.vertices:
            nb = [self._name[u] for u in net.neighbours(v)]
            rng.shuffle(nb)
            self._adj[v] = nb
        self.source = self._name[s]
        self._target = None if target is None else self._name[target]
        self.query_count = 0
        self.coherent_queries = 0

    @classmethod
    def from_instance(cls, inst: Instance, ell: int | None = None, seed: int = 0) -> "OracleGraph":
        fam = inst.meta.get("family")
        params = inst.meta.get("params", {})
        if fam in ("circuit", "g2"):
            default = 3 * params.get("n", 1)
        elif fam == "welded-tree":
            default = 2 * params["h"]
        else:
            default = 0
        return cls(inst.net, inst.s, ell=ell, seed=seed, default_ell=default, target=inst.t)

    def query(self, name: str) -> list | None:
        """Neighbour names of `name`, or None (the bottom symbol) if unused."""
        if len(name) != self.ell or set(name) - {"0", "1"}:
            raise ValueError(f"names are {self.ell}-bit strings")
        self.query_count += 1
        v = self._vertex.get(name)
        return None if v is None else list(self._adj[v])

    def is_target(self, name: str) -> bool:
        return name == self._target

    def charge(self, k: int):
        """Record k coherent queries spent inside the walk."""
        self.coherent_queries += int(k)

    @property
    def queries(self) -> int:
        return self.query_count + self.coherent_queries

    # simulator-side access; algorithms use it only to build the coherent walk
    def _simulator_view(self) -> tuple:
        return self._net, self._name, self._vertex


def query(o: OracleGraph, name: str) -> list | None:
    return o.query(name)


def walker_states(o: OracleGraph) -> AltNeighbourhoods:
    """Fourier states chosen by the walker's distance parity from the source."""
    net, _, vertex = o._simulator_view()
    s = vertex[o.source]
    par = distance_parity(net, s)
    t = vertex[o._target] if o._target is not None else None
    return fourier_states(net, [v for v in net.vertices if par[v] and v not in (s, t)])


@dataclass
class SamplerSetup:
    """Everything a run needs about the walk: success chance and arc law."""

    p_zero: float
    arc_probs: np.ndarray
    steps: int
    register: np.ndarray | None = None
    resistance: float = 0.0
    extras: dict = field(default_factory=dict)


def _prepare(o: OracleGraph, psi: AltNeighbourhoods, eps: float, faithful: bool,
             steps: int | None = None) -> SamplerSetup:
    net, _, vertex = o._simulator_view()
    s, t = vertex[o.source], vertex[o._target]
    flow = alt_electrical_flow(net, psi, s, t)
    if isinstance(flow, Infeasible):
        raise ValueError("instance has no alternative flow")
    R = flow.energy()
    ws = net.weighted_degree(s)
    pe_edge, _ = alt_edge_potential(net, psi, s, t)
    phi_norm = np.linalg.norm(alt_potential_state(net, pe_edge, s, R)) / math.sqrt(R * ws)
    p = 1.0 / (R * ws)
    T = precision_for(p, phi_norm, eps) if steps is None else int(steps)
    U = alt_walk(net, psi, s, t)
    start = source_state(net, s)
    p0, post = pe_zero(U, start, T)
    reg = pe_distribution(U, start, T) if faithful else None
    return SamplerSetup(p0, np.abs(post) ** 2, T, reg, R,
                        {"p": p, "phi_norm": phi_norm, "weighted_degree_s": ws})


def _attempt(o: OracleGraph, setup: SamplerSetup, rng: np.random.Generator) -> bool:
    o.charge(setup.steps * QUERIES_PER_STEP + QUERIES_PER_PREP)
    if setup.register is not None:
        return int(rng.choice(len(setup.register), p=setup.register)) == 0
    return bool(rng.random() < setup.p_zero)


def _measure(o: OracleGraph, setup: SamplerSetup, rng: np.random.Generator) -> tuple:
    net, name, _ = o._simulator_view()
    k = int(rng.choice(len(setup.arc_probs), p=setup.arc_probs / setup.arc_probs.sum()))
    u, v = net.slot_pair(k)
    return name[u], name[v]


@dataclass
class RunResult:
    algorithm: str
    success: bool
    queries: int
    trials: int
    pe_calls: int
    budget_queries: int
    params: dict
    seed: int
    target: str | None = None
    path: list | None = None
    samples: list = field(default_factory=list)
    failure: str | None = None

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("algorithm", "params", "seed", "success", "queries",
                                           "trials", "pe_calls", "budget_queries")}
        if self.target is not None:
            d["target"] = self.target
        if self.path is not None:
            d["path"] = self.path
        if self.failure:
            d["failure"] = self.failure
        return d


def alg1_parameters(R: float, D: int, w_end: float, delta: float, c1: float = 4.0,
                    c2: float = 4.0) -> dict:
    return {"T1": math.ceil(c1 * R * D),
            "T2": math.ceil(c2 * R * D * w_end * math.log(1 / delta)),
            "eps": 1.0 / (2 * R * D * w_end)}


def _line_constants(o: OracleGraph) -> tuple:
    net, _, vertex = o._simulator_view()
    t = vertex[o._target]
    D = max(net.degree(v) for v in net.vertices)
    w_end = max(net.weight(t, v) for v in net.neighbours(t))
    return D, w_end


def alg1_find_target(o: OracleGraph, psi: AltNeighbourhoods | None, delta: float,
                     mode: str = "analytic", seed: int = 0, c1: float = 4.0, c2: float = 4.0,
                     steps: int | None = None) -> RunResult:
    """Find the sink of a layered graph by sampling arcs of the flow state."""
    if mode not in ("analytic", "faithful"):
        raise ValueError("mode is 'analytic' or 'faithful'")
    rng = np.random.default_rng(seed)
    psi = walker_states(o) if psi is None else psi
    D, w_end = _line_constants(o)
    net, _, vertex = o._simulator_view()
    R = alt_electrical_flow(net, psi, vertex[o.source], vertex[o._target]).energy()
    par = alg1_parameters(R, D, w_end, delta, c1, c2)
    setup = _prepare(o, psi, par["eps"], mode == "faithful", steps)
    per_call = setup.steps * QUERIES_PER_STEP + QUERIES_PER_PREP
    budget = par["T1"] * par["T2"] * per_call
    params = dict(par, delta=delta, mode=mode, pe_steps=setup.steps, R=R, D=D, w_end=w_end)
    calls = 0
    for i in range(1, par["T2"] + 1):
        for _ in range(par["T1"]):
            calls += 1
            if _attempt(o, setup, rng):
                a, b = _measure(o, setup, rng)
                for nm in (a, b):
                    if o.is_target(nm):
                        return RunResult("alg1", True, o.queries, i, calls, budget, params,
                                         seed, target=nm)
                break
    return RunResult("alg1", False, o.queries, par["T2"], calls, budget, params, seed,
                     failure="budget exhausted")


def alg1_success_probability(setup: SamplerSetup, hit: float, T1: int, T2: int) -> float:
    """Exact chance that Algorithm 1 succeeds, given the per-sample hit chance."""
    per_trial = (1 - (1 - setup.p_zero) ** T1) * hit
    return 1 - (1 - per_trial) ** T2


def target_hit_probability(o: OracleGraph, setup: SamplerSetup) -> float:
    """Chance a post-measurement arc sample touches the sink."""
    net, _, vertex = o._simulator_view()
    t = vertex[o._target]
    mass = sum(setup.arc_probs[net.slot(t, v)] + setup.arc_probs[net.slot(v, t)]
               for v in net.neighbours(t))
    return float(mass / setup.arc_probs.sum())


def alg2_parameters(n: int, delta: float, c1: float = 40.0, c2: float = 40.0,
                    c_eps: float = 0.25) -> dict:
    return {"T1": math.ceil(c1 * n * n),
            "T2": math.ceil(c2 * n * n * math.log(n / delta)),
            "eps": c_eps / (n * n)}


def bfs_path(edges, s_name: str, t_name: str) -> list | None:
    """Shortest path in the sampled subgraph, breaking ties by smallest name."""
    adj: dict = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    if s_name == t_name:
        return [s_name]
    if s_name not in adj:
        return None
    prev = {s_name: None}
    queue = deque([s_name])
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if v in prev:
                continue
            prev[v] = u
            if v == t_name:
                path = [v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(v)
    return None


def alg2_find_path(o: OracleGraph, psi: AltNeighbourhoods | None, delta: float, layers: int,
                   mode: str = "analytic", seed: int = 0, c1: float = 40.0, c2: float = 40.0,
                   c_eps: float = 0.25, steps: int | None = None) -> RunResult:
    """Sample flow-state arcs, then join source and sink through the samples."""
    if mode not in ("analytic", "faithful"):
        raise ValueError("mode is 'analytic' or 'faithful'")
    rng = np.random.default_rng(seed)
    psi = walker_states(o) if psi is None else psi
    par = alg2_parameters(layers, delta, c1, c2, c_eps)
    setup = _prepare(o, psi, par["eps"], mode == "faithful", steps)
    per_call = setup.steps * QUERIES_PER_STEP + QUERIES_PER_PREP
    budget = par["T1"] * par["T2"] * per_call
    params = dict(par, delta=delta, mode=mode, pe_steps=setup.steps, layers=layers)
    samples: list = []
    calls = 0
    for _ in range(par["T2"]):
        for _ in range(par["T1"]):
            calls += 1
            if _attempt(o, setup, rng):
                samples.append(_measure(o, setup, rng))
                break
    # the sink is the only degree-1 vertex; one classical query per candidate
    seen = sorted({nm for pair in samples for nm in pair})
    sink = None
    for nm in seen:
        nb = o.query(nm)
        if nb is not None and len(nb) == 1:
            sink = nm
            break
    path = bfs_path(samples, o.source, sink) if sink is not None else None
    ok = path is not None
    return RunResult("alg2", ok, o.queries, par["T2"], calls, budget, params, seed,
                     target=sink, path=path, samples=samples,
                     failure=None if ok else "no path in samples")


@dataclass
class BaselineOutcome:
    found_middle: bool
    found_cycle: bool
    cycle_kind: str | None
    exhausted: bool
    queries: int

    @property
    def win(self) -> bool:
        return self.found_middle or self.found_cycle


def classical_embedding_baseline(o: OracleGraph, budget: int, seed: int,
                                 middle: Any = None, trees: list | None = None) -> BaselineOutcome:
    """Random embedding of a growing binary tree, rooted at the source.

    Each expansion queries the image of a frontier node; its children are
    mapped to the image's neighbours other than the parent's image, in
    random order.  The game is won when the middle vertex shows up or two
    tree nodes land on the same vertex (a cycle).
    """
    rng = np.random.default_rng(seed)
    net, name, vertex = o._simulator_view()
    mid_name = name[middle] if middle is not None else None
    start = o.query_count
    image = [o.source]
    parent = [-1]
    where = {o.source: 0}
    frontier = [0]
    while frontier and o.query_count - start < budget:
        i = frontier.pop(int(rng.integers(len(frontier))))
        nbrs = o.query(image[i])
        back = image[parent[i]] if parent[i] >= 0 else None
        kids = [nm for nm in nbrs if nm != back]
        rng.shuffle(kids)
        for nm in kids[:2]:
            node = len(image)
            image.append(nm)
            parent.append(i)
            if nm == mid_name:
                return BaselineOutcome(True, False, None, False, o.query_count - start)
            if nm in where:
                kind = _cycle_kind(node, where[nm], image, parent, vertex, trees or [])
                return BaselineOutcome(False, True, kind, False, o.query_count - start)
            where[nm] = node
            if nm != o.source:
                frontier.append(node)
    return BaselineOutcome(False, False, None, True, o.query_count - start)


def _cycle_kind(a: int, b: int, image: list, parent: list, vertex: dict, trees: list) -> str:
    def chain(i):
        out = []
        while i >= 0:
            out.append(i)
            i = parent[i]
        return out

    ca, cb = chain(a), chain(b)
    common = set(ca) & set(cb)
    nodes = [i for i in ca if i not in common] + [i for i in cb if i not in common]
    nodes.append(next(i for i in ca if i in common))
    verts = {vertex[image[i]] for i in nodes}
    if any(r1 in verts and r2 in verts for r1, r2 in trees):
        return "two_roots"
    return "other"
