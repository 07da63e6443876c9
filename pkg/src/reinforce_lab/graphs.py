"""Finite weighted graphs, lattice boxes, spanning trees and electrical networks.

Vertices are dense integer indices 0..N-1.  An edge is the sorted pair (i, j)
with a single positive weight; depending on context the weight plays the role
of an initial reinforcement weight a_e, a jump-rate conductance W_e or a
sigma-model coupling beta_e.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_VERTEX_CAP = 200_000
TREE_ENUM_CAP = 8


class GraphError(ValueError):
    pass


class CapacityError(GraphError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    """Finite connected simple graph with positive edge weights.

    Immutable after construction; safe to share between concurrent replicas.
    """

    n: int
    edges: np.ndarray        # (m, 2) int, each row sorted i < j
    weights: np.ndarray      # (m,) float, > 0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.n < 1:
            raise GraphError("need at least one vertex")
        if edges.shape[0] != weights.shape[0]:
            raise GraphError("edges and weights length mismatch")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise GraphError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise GraphError("self-loops not allowed")
        edges = np.sort(edges, axis=1)
        keys = edges[:, 0] * self.n + edges[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise GraphError("duplicate edges not allowed")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise GraphError("edge weights must be positive and finite")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if not self._connected():
            raise GraphError("graph must be connected")
        self._build_incidence()

    def _connected(self) -> bool:
        if self.n == 1:
            return True
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())

    def _build_incidence(self):
        inc = [[] for _ in range(self.n)]
        for e, (i, j) in enumerate(self.edges):
            inc[i].append((e, j))
            inc[j].append((e, i))
        object.__setattr__(self, "_incident", tuple(tuple(x) for x in inc))
        # padded arrays for vectorised kernels
        maxdeg = max(len(x) for x in inc)
        inc_e = np.full((self.n, maxdeg), -1, dtype=np.int64)
        inc_v = np.full((self.n, maxdeg), -1, dtype=np.int64)
        for i, lst in enumerate(inc):
            for k, (e, j) in enumerate(lst):
                inc_e[i, k] = e
                inc_v[i, k] = j
        object.__setattr__(self, "inc_edges", inc_e)
        object.__setattr__(self, "inc_nbrs", inc_v)
        object.__setattr__(self, "inc_mask", inc_e >= 0)

    @property
    def m(self) -> int:
        return len(self.weights)

    def incident(self, i):
        """(edge index, neighbour) pairs at vertex i."""
        return self._incident[i]

    def neighbors(self, i):
        return [j for _, j in self._incident[i]]

    def degree(self, i) -> int:
        return len(self._incident[i])

    def edge_index(self, i, j) -> int:
        for e, k in self._incident[i]:
            if k == j:
                return e
        raise GraphError(f"no edge {{{i},{j}}}")

    def with_weights(self, weights) -> "WeightedGraph":
        return WeightedGraph(self.n, self.edges.copy(), np.asarray(weights, dtype=float))

    def laplacian(self, weights=None) -> np.ndarray:
        """Weighted graph Laplacian (positive semidefinite convention)."""
        w = self.weights if weights is None else np.asarray(weights, dtype=float)
        L = np.zeros((self.n, self.n))
        i, j = self.edges[:, 0], self.edges[:, 1]
        np.subtract.at(L, (i, j), w)
        np.subtract.at(L, (j, i), w)
        d = -L.sum(axis=1)
        L[np.diag_indices(self.n)] = d
        return L


@dataclass(frozen=True)
class PinnedGraph:
    """A graph with an extra pinning vertex delta wired to every vertex with eps_i > 0."""

    base: WeightedGraph
    eps: np.ndarray          # (n,) >= 0, not all zero

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float).reshape(-1)
        if eps.shape[0] != self.base.n:
            raise GraphError("eps length must match vertex count")
        if np.any(eps < 0) or not np.any(eps > 0):
            raise GraphError("pinning requires eps >= 0 with at least one eps > 0")
        object.__setattr__(self, "eps", eps)

    @property
    def delta(self) -> int:
        """Index of the pinning vertex in the extended graph."""
        return self.base.n

    def extended(self) -> WeightedGraph:
        """The graph on V + {delta}; only eps > 0 edges are materialised."""
        extra = [(i, self.delta) for i in range(self.base.n) if self.eps[i] > 0]
        edges = np.vstack([self.base.edges, np.array(extra, dtype=np.int64)])
        weights = np.concatenate([self.base.weights, self.eps[self.eps > 0]])
        return WeightedGraph(self.base.n + 1, edges, weights)


@dataclass(frozen=True)
class LatticeBox:
    """Box {i in Z^d : |i|_inf <= radius} with unit-weight nearest-neighbour edges."""

    graph: WeightedGraph
    d: int
    radius: int
    coords: np.ndarray       # (N, d) integer coordinates
    boundary: np.ndarray     # vertex indices with |i|_inf == radius
    origin: int
    index_of: dict = field(repr=False)

    def coord_index(self, coord) -> int:
        return self.index_of[tuple(int(c) for c in coord)]


def build_lattice_box(d: int, n: int, weight: float = 1.0,
                      cap: int = DEFAULT_VERTEX_CAP) -> LatticeBox:
    """Lattice box of radius n in Z^d, vertex 0 at the origin."""
    if d < 1 or n < 0:
        raise GraphError("need d >= 1 and n >= 0")
    side = 2 * n + 1
    if side ** d > cap:
        raise CapacityError(f"lattice box would have {side ** d} vertices (cap {cap})")
    coords = np.array(list(itertools.product(range(-n, n + 1), repeat=d)), dtype=np.int64)
    # put the origin first so it has index 0
    order = np.argsort(np.abs(coords).max(axis=1), kind="stable")
    coords = coords[order]
    index_of = {tuple(c): k for k, c in enumerate(coords.tolist())}
    edges = []
    for k, c in enumerate(coords.tolist()):
        for axis in range(d):
            nb = list(c)
            nb[axis] += 1
            j = index_of.get(tuple(nb))
            if j is not None:
                edges.append((k, j))
    if edges:
        edges = np.array(edges, dtype=np.int64)
        weights = np.full(len(edges), float(weight))
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
        weights = np.zeros(0)
    g = WeightedGraph(side ** d, edges, weights)
    boundary = np.flatnonzero(np.abs(coords).max(axis=1) == n) if n > 0 else np.array([], dtype=np.int64)
    return LatticeBox(graph=g, d=d, radius=n, coords=coords,
                      boundary=boundary, origin=index_of[(0,) * d], index_of=index_of)


def spanning_trees(g: WeightedGraph):
    """Exhaustive list of spanning trees as tuples of edge indices.

    Brute-force oracle; refuses graphs above TREE_ENUM_CAP vertices.
    """
    if g.n > TREE_ENUM_CAP:
        raise CapacityError(f"tree enumeration capped at {TREE_ENUM_CAP} vertices")
    trees = []
    for subset in itertools.combinations(range(g.m), g.n - 1):
        parent = list(range(g.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for e in subset:
            a, b = find(g.edges[e, 0]), find(g.edges[e, 1])
            if a == b:
                acyclic = False
                break
            parent[a] = b
        if acyclic:
            trees.append(subset)
    return trees


def tree_weight_sum(g: WeightedGraph, weights=None) -> float:
    """Sum over spanning trees of the product of edge weights (oracle)."""
    w = g.weights if weights is None else np.asarray(weights, dtype=float)
    return float(sum(np.prod(w[list(t)]) for t in spanning_trees(g)))


def effective_resistance(g: WeightedGraph, conductances, source: int, boundary,
                         return_flow: bool = False):
    """Effective resistance between `source` and the vertex set `boundary`.

    Solves the harmonic problem with unit current injected at the source and
    the boundary grounded.  With `return_flow` also returns the unit current
    flow theta(e), oriented from edges[e,0] to edges[e,1].
    """
    boundary = np.asarray(sorted(set(int(b) for b in np.atleast_1d(boundary))), dtype=np.int64)
    if len(boundary) == 0:
        raise GraphError("boundary must be nonempty")
    if source in boundary:
        raise GraphError("source must not lie on the boundary")
    c = np.asarray(conductances, dtype=float)
    if np.any(c <= 0):
        raise GraphError("conductances must be positive")
    L = g.laplacian(c)
    interior = np.setdiff1d(np.arange(g.n), boundary)
    Lred = L[np.ix_(interior, interior)]
    rhs = np.zeros(len(interior))
    rhs[np.searchsorted(interior, source)] = 1.0
    try:
        phi_int = np.linalg.solve(Lred, rhs)
    except np.linalg.LinAlgError as exc:
        raise GraphError("source and boundary are not connected") from exc
    phi = np.zeros(g.n)
    phi[interior] = phi_int
    R = float(phi[source])
    if not return_flow:
        return R
    i, j = g.edges[:, 0], g.edges[:, 1]
    theta = c * (phi[i] - phi[j])
    return R, theta


def escape_probability_resistance(g: WeightedGraph, conductances, source: int, boundary) -> float:
    """Independent route: R = 1 / (c_source * P(hit boundary before returning)).

    The hitting probability is computed from the absorbed-chain linear system,
    a different linear solve from the potential route above.
    """
    boundary = set(int(b) for b in np.atleast_1d(boundary))
    c = np.asarray(conductances, dtype=float)
    # h(v) = P_v(hit boundary before source); h = 1 on boundary, 0 at source
    free = [v for v in range(g.n) if v != source and v not in boundary]
    pos = {v: k for k, v in enumerate(free)}
    A = np.zeros((len(free), len(free)))
    b = np.zeros(len(free))
    for v in free:
        tot = sum(c[e] for e, _ in g.incident(v))
        A[pos[v], pos[v]] = 1.0
        for e, w in g.incident(v):
            p = c[e] / tot
            if w in boundary:
                b[pos[v]] += p
            elif w != source:
                A[pos[v], pos[w]] -= p
    h = np.linalg.solve(A, b) if free else np.zeros(0)
    c0 = sum(c[e] for e, _ in g.incident(source))
    esc = 0.0
    for e, w in g.incident(source):
        p = c[e] / c0
        if w in boundary:
            esc += p
        else:
            esc += p * h[pos[w]]
    return 1.0 / (c0 * esc)


def _validate_keys(obj: dict, allowed, where: str):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise GraphError(f"unknown keys {sorted(unknown)} in {where}")


def graph_from_dict(spec: dict):
    """Parse the graph description format.

    Either {"vertices": N, "edges": [[i, j, w], ...], "pinning": [[i, eps], ...]}
    or the lattice shorthand {"lattice": {"d": d, "n": n, "weight": w}}.
    Returns a WeightedGraph or, when pinning is present, a PinnedGraph.
    """
    if "lattice" in spec:
        _validate_keys(spec, {"lattice"}, "graph spec")
        lat = spec["lattice"]
        _validate_keys(lat, {"d", "n", "weight"}, "lattice spec")
        return build_lattice_box(int(lat["d"]), int(lat["n"]),
                                 float(lat.get("weight", 1.0))).graph
    _validate_keys(spec, {"vertices", "edges", "pinning"}, "graph spec")
    n = int(spec["vertices"])
    edges = np.array([[int(e[0]), int(e[1])] for e in spec["edges"]], dtype=np.int64)
    weights = np.array([float(e[2]) for e in spec["edges"]])
    g = WeightedGraph(n, edges, weights)
    if "pinning" in spec:
        eps = np.zeros(n)
        for i, v in spec["pinning"]:
            eps[int(i)] = float(v)
        return PinnedGraph(g, eps)
    return g


def load_graph_file(path):
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
