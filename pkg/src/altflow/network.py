"""Electrical networks, flows, potentials and star states.

A network is a connected graph with one chosen orientation per edge and a
positive conductance on every edge.  The doubled arc space has one basis
vector per ordered pair: arc i of the oriented edge list sits at slot i and
its reversal at slot |E| + i.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Iterable

import numpy as np

Vertex = Hashable

MIN_WEIGHT = 1e-300


@dataclass(frozen=True, eq=False)
class Network:
    """Connected weighted graph with a fixed orientation per edge."""

    vertices: tuple
    arcs: tuple
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arcs", tuple((u, v) for u, v in self.arcs))
        w = np.array(self.weights, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        self._validate()

    @classmethod
    def from_arcs(cls, arcs: Iterable, vertices: Iterable | None = None) -> "Network":
        """Build from (u, v, w) triples; vertex order follows first appearance."""
        arcs = [tuple(a) for a in arcs]
        if vertices is None:
            seen: dict = {}
            for u, v, _ in arcs:
                seen.setdefault(u, None)
                seen.setdefault(v, None)
            vertices = list(seen)
        return cls(tuple(vertices), tuple((u, v) for u, v, _ in arcs),
                   np.array([w for _, _, w in arcs], dtype=float))

    def _validate(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        if len(self.weights) != len(self.arcs):
            raise ValueError("one weight per arc required")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= MIN_WEIGHT):
            raise ValueError("weights must be finite and strictly positive")
        vset = set(self.vertices)
        edges = set()
        for u, v in self.arcs:
            if u not in vset or v not in vset:
                raise ValueError(f"arc ({u!r}, {v!r}) uses an unknown vertex")
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            key = frozenset((u, v))
            if key in edges:
                raise ValueError(f"parallel edge between {u!r} and {v!r}")
            edges.add(key)
        if len(self.vertices) > 1 and not self._connected():
            raise ValueError("network must be connected")

    def _connected(self) -> bool:
        adj = self._adjacency
        start = self.vertices[0]
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self.vertices)

    # -- indexing ---------------------------------------------------------

    @cached_property
    def _vindex(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def _arc_index(self) -> dict:
        return {a: i for i, a in enumerate(self.arcs)}

    @cached_property
    def _adjacency(self) -> dict:
        adj: dict = {v: [] for v in self.vertices}
        for u, v in self.arcs:
            adj[u].append(v)
            adj[v].append(u)
        vi = {v: i for i, v in enumerate(self.vertices)}
        return {u: sorted(nb, key=vi.__getitem__) for u, nb in adj.items()}

    @property
    def n_edges(self) -> int:
        return len(self.arcs)

    @property
    def dim(self) -> int:
        """Dimension of the doubled arc space."""
        return 2 * len(self.arcs)

    def index(self, u: Vertex) -> int:
        try:
            return self._vindex[u]
        except KeyError:
            raise KeyError(f"unknown vertex {u!r}") from None

    def arc_id(self, u: Vertex, v: Vertex) -> int:
        """Index in the oriented edge list of the edge joining u and v."""
        i = self._arc_index.get((u, v))
        if i is None:
            i = self._arc_index.get((v, u))
        if i is None:
            raise KeyError(f"no edge between {u!r} and {v!r}")
        return i

    def slot(self, u: Vertex, v: Vertex) -> int:
        """Position of |u,v> in the doubled arc space."""
        i = self._arc_index.get((u, v))
        if i is not None:
            return i
        return self.n_edges + self.arc_id(u, v)

    def slot_pair(self, k: int) -> tuple:
        """Inverse of `slot`."""
        m = self.n_edges
        u, v = self.arcs[k % m]
        return (u, v) if k < m else (v, u)

    def weight(self, u: Vertex, v: Vertex) -> float:
        return float(self.weights[self.arc_id(u, v)])

    def delta(self, u: Vertex, v: Vertex) -> int:
        """0 when (u, v) is the stored orientation, 1 when it is reversed."""
        if (u, v) in self._arc_index:
            return 0
        self.arc_id(u, v)  # raises for non-edges
        return 1

    def sign(self, u: Vertex, v: Vertex) -> float:
        return -1.0 if self.delta(u, v) else 1.0

    def neighbours(self, u: Vertex) -> list:
        """Neighbours of u in ascending vertex order."""
        self.index(u)
        return list(self._adjacency[u])

    def out_neighbours(self, u: Vertex) -> list:
        return [v for v in self.neighbours(u) if (u, v) in self._arc_index]

    def in_neighbours(self, u: Vertex) -> list:
        return [v for v in self.neighbours(u) if (v, u) in self._arc_index]

    def degree(self, u: Vertex) -> int:
        return len(self.neighbours(u))

    def weighted_degree(self, u: Vertex) -> float:
        return float(sum(self.weight(u, v) for v in self.neighbours(u)))

    def reoriented(self, flips: Iterable[int]) -> "Network":
        """Copy with the listed arcs reversed (weights unchanged)."""
        flips = set(flips)
        arcs = [(v, u) if i in flips else (u, v) for i, (u, v) in enumerate(self.arcs)]
        return Network(self.vertices, tuple(arcs), self.weights)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "arcs": [[u, v, float(w)] for (u, v), w in zip(self.arcs, self.weights)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        return cls.from_arcs([tuple(a) for a in d["arcs"]], vertices=d["vertices"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


def neighbourhood(net: Network, u: Vertex) -> set:
    return set(net.neighbours(u))


@dataclass(frozen=True, eq=False)
class Flow:
    """Real flow on the oriented arcs; reverse reads are negated."""

    net: Network
    values: np.ndarray
    source: Any = None
    sink: Any = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if len(vals) != self.net.n_edges:
            raise ValueError("flow needs one value per arc")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, arc: tuple) -> float:
        u, v = arc
        i = self.net.arc_id(u, v)
        return float(self.values[i]) if self.net.arcs[i] == (u, v) else -float(self.values[i])

    def divergence(self, u: Vertex) -> float:
        return float(sum(self[u, v] for v in self.net.neighbours(u)))

    def energy(self) -> float:
        return float(np.sum(self.values ** 2 / self.net.weights))

    def to_dict(self) -> dict:
        return {"flow": [{"arc": [u, v], "theta": float(x)}
                         for (u, v), x in zip(self.net.arcs, self.values)]}


def energy(f: Flow) -> float:
    """Sum over arcs of theta^2 / w."""
    return f.energy()


def divergence(f: Flow, u: Vertex) -> float:
    """Net flow leaving u."""
    return f.divergence(u)


def validate_unit_st_flow(f: Flow, s: Vertex, t: Vertex, tol: float = 1e-9) -> float:
    """Largest deviation from a unit s-t flow's divergence pattern."""
    worst = 0.0
    for u in f.net.vertices:
        target = 1.0 if u == s else -1.0 if u == t else 0.0
        worst = max(worst, abs(f.divergence(u) - target))
    return worst


@dataclass(frozen=True, eq=False)
class VertexPotential:
    net: Network
    values: np.ndarray

    def __getitem__(self, u: Vertex) -> float:
        return float(self.values[self.net.index(u)])

    def as_dict(self) -> dict:
        return {v: float(x) for v, x in zip(self.net.vertices, self.values)}


@dataclass(frozen=True, eq=False)
class EdgePotential:
    """Potential on ordered pairs, stored by doubled-arc slot."""

    net: Network
    values: np.ndarray

    def __getitem__(self, pair: tuple) -> float:
        return float(self.values[self.net.slot(*pair)])

    def as_dict(self) -> dict:
        return {self.net.slot_pair(k): float(x) for k, x in enumerate(self.values)}


def star_state(net: Network, u: Vertex) -> np.ndarray:
    """Normalised star state of u: signed sqrt-conductance amplitudes on |u,v>."""
    psi = np.zeros(net.dim)
    for v in net.neighbours(u):
        psi[net.slot(u, v)] = net.sign(u, v) * np.sqrt(net.weight(u, v))
    return psi / np.sqrt(net.weighted_degree(u))


def flow_state(f: Flow) -> np.ndarray:
    """Normalised symmetric arc state of a flow."""
    e = f.energy()
    if e <= 0:
        raise ValueError("flow state of a zero flow is undefined")
    amp = f.values / np.sqrt(f.net.weights)
    return np.concatenate([amp, amp]) / np.sqrt(2 * e)


def swap(net: Network, state: np.ndarray) -> np.ndarray:
    """Exchange the amplitudes of |u,v> and |v,u>."""
    m = net.n_edges
    return np.concatenate([state[m:], state[:m]])
