"""Graph families with their weights, orientations and alternative states.

Layered families follow one rule.  Layer k holds the edges between vertex
layers k-1 and k.  The weight changes every two layers,
w_k = prod_{i <= floor(k/2)} (e_{2i-1} / e_{2i})^2, and orientations come in
blocks of two: forward when k mod 4 is 1 or 2, backward otherwise.  With
this choice every vertex in an odd layer sees opposite signs and a
balanced split of sqrt-weights, and gets the Fourier states j >= 1 as
extra alternative states.  Every vertex in an even layer sees one weight
and one sign, and keeps only its star state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .alt import AltNeighbourhoods, fourier_neighbourhood
from .network import Network


@dataclass(frozen=True, eq=False)
class Instance:
    """A generated network with its alternative states and bookkeeping."""

    net: Network
    psi: AltNeighbourhoods
    s: Any
    t: Any
    parity: dict
    meta: dict
    path: list | None = None
    trees: list = field(default_factory=list)
    middle: Any = None
    labels: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.net.to_dict()
        d["alt"] = self.psi.to_dict()
        d["parity"] = {str(v): int(b) for v, b in self.parity.items()}
        d["meta"] = dict(self.meta, s=self.s, t=self.t)
        if self.path is not None:
            d["meta"]["path"] = list(self.path)
        if self.trees:
            d["meta"]["trees"] = [list(r) for r in self.trees]
        if self.middle is not None:
            d["meta"]["middle"] = self.middle
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        net = Network.from_dict(d)
        meta = dict(d.get("meta", {}))
        s, t = meta.pop("s"), meta.pop("t")
        lookup = {str(v): v for v in net.vertices}
        psi = AltNeighbourhoods.from_dict(net, d["alt"]) if "alt" in d else AltNeighbourhoods(net)
        parity = {lookup[k]: b for k, b in d.get("parity", {}).items()}
        path = meta.pop("path", None)
        trees = [tuple(r) for r in meta.pop("trees", [])]
        middle = meta.pop("middle", None)
        return cls(net, psi, s, t, parity, meta, path, trees, middle)


def distance_parity(net: Network, s) -> dict:
    """BFS distance from s modulo 2."""
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in net.neighbours(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return {v: d % 2 for v, d in dist.items()}


def fourier_states(net: Network, vertices) -> AltNeighbourhoods:
    """Attach all non-uniform Fourier states to the given vertices."""
    extra = {u: fourier_neighbourhood(net, u, range(1, net.degree(u))) for u in vertices}
    return AltNeighbourhoods(net, extra)


# -- layered graphs -------------------------------------------------------


def layer_weights(edges: list) -> np.ndarray:
    """Weight of layers 1..n from edge counts e_1..e_n."""
    n = len(edges)
    w = np.ones(n)
    for k in range(1, n + 1):
        acc = 1.0
        for i in range(1, k // 2 + 1):
            acc *= (edges[2 * i - 2] / edges[2 * i - 1]) ** 2
        w[k - 1] = acc
    return w


def layer_forward(k: int) -> bool:
    """Layer k points away from the source when k mod 4 is 1 or 2."""
    return k % 4 in (1, 2)


def layered_resistance(edges: list, weights: np.ndarray | None = None) -> float:
    """Series sum of 1 / (e_k w_k) for a layered graph with uniform layer splits."""
    w = layer_weights(edges) if weights is None else weights
    return float(sum(1.0 / (e * x) for e, x in zip(edges, w)))


@dataclass(frozen=True)
class HierarchicalSpec:
    """Layer sizes s_0..s_n and edge counts e_1..e_n of a line supergraph."""

    sizes: tuple
    edges: tuple

    def __post_init__(self):
        sizes, edges = tuple(self.sizes), tuple(self.edges)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "edges", edges)
        if len(sizes) < 2 or len(edges) != len(sizes) - 1:
            raise ValueError("need n + 1 layer sizes and n edge counts")
        if sizes[0] != 1 or sizes[-1] != 1:
            raise ValueError("end layers must hold exactly one vertex")
        if any(int(x) != x or x < 1 for x in sizes + edges):
            raise ValueError("sizes and edge counts must be positive integers")
        sizes, edges = tuple(int(x) for x in sizes), tuple(int(x) for x in edges)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "edges", edges)
        for k, e in enumerate(edges, start=1):
            lo, hi = sizes[k - 1], sizes[k]
            if e % lo or e % hi:
                raise ValueError(f"layer {k} is not balanced")
            if e // lo > hi or e // hi > lo:
                raise ValueError(f"layer {k} would need parallel edges")
        degs = {self.degree(k) for k in range(1, self.length)}
        if len(degs) > 1:
            raise ValueError(f"interior layers are not regular: degrees {sorted(degs)}")

    @property
    def length(self) -> int:
        return len(self.edges)

    def degree(self, k: int) -> int:
        """Degree of a vertex in layer k."""
        up = self.edges[k - 1] // self.sizes[k] if k >= 1 else 0
        down = self.edges[k] // self.sizes[k] if k < self.length else 0
        return up + down

    @property
    def regular_degree(self) -> int:
        return self.degree(1) if self.length > 1 else self.degree(0)

    @property
    def ratios(self) -> list:
        return [self.edges[k + 1] / self.edges[k] for k in range(self.length - 1)]

    def weights(self) -> np.ndarray:
        return layer_weights(list(self.edges))

    def resistance(self) -> float:
        return layered_resistance(list(self.edges))


def welded_spec(h: int) -> HierarchicalSpec:
    """Two depth-h binary trees glued by a 2-regular weld between the leaves."""
    if h < 1:
        raise ValueError("welded tree depth must be at least 1")
    sizes = [2 ** k for k in range(h + 1)] + [2 ** k for k in range(h, -1, -1)]
    edges = [2 ** k for k in range(1, h + 1)] + [2 ** (h + 1)] + [2 ** k for k in range(h, 0, -1)]
    return HierarchicalSpec(tuple(sizes), tuple(edges))


def _random_layer(upper: list, lower: list, e: int, rng: np.random.Generator) -> list:
    """Uniform simple biregular bipartite graph between two layers."""
    du, dl = e // len(upper), e // len(lower)
    stubs_up = np.repeat(np.arange(len(upper)), du)
    stubs_low = np.repeat(np.arange(len(lower)), dl)
    for _ in range(10000):
        perm = rng.permutation(stubs_low)
        pairs = list(zip(stubs_up.tolist(), perm.tolist()))
        if len(set(pairs)) == len(pairs):
            return [(upper[a], lower[b]) for a, b in sorted(pairs)]
    raise RuntimeError("could not sample a simple layer")


def _layered_arcs(layers: list, edges: list, rng, scale: float = 1.0,
                  flip: bool = False, fixed: dict | None = None) -> list:
    """Arcs (tail, head, weight) for consecutive layers; `fixed` overrides layer edges."""
    w = layer_weights(edges)
    arcs = []
    for k in range(1, len(layers)):
        pairs = (fixed or {}).get(k) or _random_layer(layers[k - 1], layers[k], edges[k - 1], rng)
        fwd = layer_forward(k) != flip
        for a, b in pairs:
            arcs.append((a, b, scale * w[k - 1]) if fwd else (b, a, scale * w[k - 1]))
    return arcs


def hierarchical_1d(spec: HierarchicalSpec, seed: int) -> Instance:
    """Random balanced layered graph on a line, with Fourier states on odd layers."""
    rng = np.random.default_rng(seed)
    layers, nxt = [], 0
    for size in spec.sizes:
        layers.append(list(range(nxt, nxt + size)))
        nxt += size
    arcs = _layered_arcs(layers, list(spec.edges), rng)
    vertices = [v for layer in layers for v in layer]
    net = Network.from_arcs(arcs, vertices=vertices)
    s, t = layers[0][0], layers[-1][0]
    parity = {v: k % 2 for k, layer in enumerate(layers) for v in layer}
    psi = fourier_states(net, [v for v in vertices if parity[v] and v not in (s, t)])
    meta = {"family": "hierarchical", "params": {"sizes": list(spec.sizes), "edges": list(spec.edges)},
            "seed": seed}
    return Instance(net, psi, s, t, parity, meta)


def welded_tree(h: int, seed: int) -> Instance:
    """Welded tree of depth h: 2^(h+2) - 2 vertices, roots s and t."""
    inst = hierarchical_1d(welded_spec(h), seed)
    meta = dict(inst.meta, family="welded-tree", params={"h": h})
    return Instance(inst.net, inst.psi, inst.s, inst.t, inst.parity, meta,
                    trees=[(inst.s, inst.t)])


def welded_resistance(h: int) -> float:
    """Closed-form root-to-root effective resistance of the welded tree."""
    return welded_spec(h).resistance()


# -- small worked examples ---------------------------------------------------


def _alt_state(net: Network, u, amps: dict) -> np.ndarray:
    psi = np.zeros(net.dim)
    for v, a in amps.items():
        psi[net.slot(u, v)] = a
    return psi / np.linalg.norm(psi)


def diamond(with_alt: bool = True, drop_yt: bool = False) -> Instance:
    """Four-vertex example s, x, y, t with an optional extra state at x."""
    arcs = [("s", "x", 1.0), ("x", "y", 0.25), ("x", "t", 0.25), ("y", "t", 0.25)]
    if drop_yt:
        arcs = arcs[:3]
    net = Network.from_arcs(arcs, vertices=["s", "x", "y", "t"])
    extra = {"x": [_alt_state(net, "x", {"s": 0.5, "y": -1.0, "t": 0.5})]} if with_alt else {}
    psi = AltNeighbourhoods(net, extra)
    meta = {"family": "diamond", "params": {"alt": with_alt, "drop_yt": drop_yt}, "seed": None}
    return Instance(net, psi, "s", "t", distance_parity(net, "s"), meta)


def graph_G1() -> Instance:
    """Ten-vertex path graph with extra states on v2, v3 and v8."""
    arcs = [("s", "v2", 1.0), ("s", "v1", 1.0), ("v2", "v5", 0.25), ("v2", "v4", 0.25),
            ("v8", "v5", 0.25), ("v1", "v3", 1.0), ("v4", "v6", 0.25), ("v3", "v7", 0.25),
            ("v3", "v6", 0.25), ("v8", "v6", 0.25), ("t", "v8", 1.0), ("v7", "v5", 0.25)]
    order = ["s"] + [f"v{i}" for i in range(1, 9)] + ["t"]
    net = Network.from_arcs(arcs, vertices=order)
    extra = {
        "v2": [_alt_state(net, "v2", {"v4": -1.0, "s": 0.5, "v5": 0.5})],
        "v3": [_alt_state(net, "v3", {"v1": 0.5, "v6": -1.0, "v7": 0.5})],
        "v8": [_alt_state(net, "v8", {"t": 0.5, "v5": -1.0, "v6": 0.5})],
    }
    psi = AltNeighbourhoods(net, extra)
    meta = {"family": "g1", "params": {}, "seed": None}
    return Instance(net, psi, "s", "t", distance_parity(net, "s"), meta)


# -- welded tree circuit ------------------------------------------------------


def gadget_edges(h: int) -> list:
    """Edge counts of a welded tree with one pendant edge on each root."""
    return [1] + list(welded_spec(h).edges) + [1]


def gadget_resistance(h: int, scale: float = 1.0) -> float:
    """Root-to-root resistance of a welded tree weighted as part of the circuit."""
    edges = gadget_edges(h)
    w = layer_weights(edges)
    return float(sum(1.0 / (e * x) for e, x in zip(edges[1:-1], w[1:-1]))) / scale


def circuit_layer_values(h: int) -> dict:
    """Per-layer split x, resistance R and alternative resistance (4 + R) x + 3."""
    R = gadget_resistance(h)
    x = (5 + 2 * R) / (9 + 3 * R)
    return {"R": R, "x": x, "R_alt": (4 + R) * x + 3}


def _check_odd(h: int):
    if h < 1 or h % 2 == 0:
        raise ValueError("welded tree depth inside the circuit must be odd and positive")


def welded_circuit(n: int, seed: int, tree_depth: int | None = None) -> Instance:
    """n chained copies of the three-tree layer; the sink of layer i is the source of i+1.

    Trees have depth n when n is odd and n + 1 when n is even, since the
    weights across an even-depth tree do not return to their entry value.
    """
    if n < 1:
        raise ValueError("need at least one layer")
    h = tree_depth if tree_depth is not None else (n if n % 2 else n + 1)
    _check_odd(h)
    rng = np.random.default_rng(seed)
    spec = welded_spec(h)
    edges = gadget_edges(h)
    labels: dict = {}
    counter = iter(range(10 ** 9))

    def new(label):
        v = next(counter)
        labels[v] = label
        return v

    arcs: list = []
    trees: list = []

    def gadget(ext_a, ext_b, scale, flip, tag):
        # ext_a - A - ... - B - ext_b on the extended line
        layers = [[ext_a]]
        for j, size in enumerate(spec.sizes):
            layers.append([new((tag, j, i)) for i in range(size)])
        layers.append([ext_b])
        arcs.extend(_layered_arcs(layers, edges, rng, scale=scale, flip=flip))
        trees.append((layers[1][0], layers[-2][0]))

    src = new(("p", 1, 1))
    s = src
    path = [s]
    for i in range(1, n + 1):
        v2, v3, v4 = new(("p", i, 2)), new(("p", i, 3)), new(("p", i, 4))
        v5, v6 = new(("p", i, 5)), new(("p", i, 6))
        snk = new(("p", i, 7)) if i == n else new(("p", i + 1, 1))
        # skeleton; names follow the layer labels v_{p,i,1..7}
        arcs.extend([(src, v2, 1.0), (v2, v3, 0.25), (v4, v3, 0.25),
                     (v6, v5, 0.25), (v4, v5, 0.25), (snk, v4, 1.0)])
        gadget(src, v6, 1.0, False, ("w", i, 1))
        gadget(v5, v2, 0.25, True, ("w", i, 2))
        gadget(v3, v6, 0.25, True, ("w", i, 3))
        path += [v2, v3, v4, snk]
        src = snk
    t = src
    vertices = sorted(labels)
    net = Network.from_arcs(arcs, vertices=vertices)
    parity = distance_parity(net, s)
    psi = fourier_states(net, [v for v in vertices if parity[v] and v not in (s, t)])
    middle = next(v for v, lab in labels.items() if lab == ("p", n // 2 + 1, 1))
    meta = {"family": "circuit", "params": {"n": n, "tree_depth": h}, "seed": seed}
    return Instance(net, psi, s, t, parity, meta, path=path, trees=trees,
                    middle=middle, labels=labels)


def graph_G2(tree_depth: int, seed: int) -> Instance:
    """Single circuit layer: the ten-vertex skeleton with three welded trees."""
    _check_odd(tree_depth)
    inst = welded_circuit(1, seed, tree_depth=tree_depth)
    meta = dict(inst.meta, family="g2", params={"tree_depth": tree_depth})
    return Instance(inst.net, inst.psi, inst.s, inst.t, inst.parity, meta, inst.path,
                    inst.trees, inst.middle, inst.labels)
