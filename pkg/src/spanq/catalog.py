"""Desk-scale span programs with independently computable witness sizes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .linalg import InvalidInputError
from .span_program import SpanProgram, as_input


def _edge_letters(n: int):
    """Letter 1 switches on the single coordinate of H_j, letter 0 gives {0}."""
    return tuple((np.zeros((1, 0)), np.ones((1, 1))) for _ in range(n))


def build_or(n: int) -> SpanProgram:
    """OR on n bits: V = C, tau = 1, A = all-ones row, H_{j,1} = H_j."""
    if n < 1:
        raise InvalidInputError("OR needs at least one input bit")
    return SpanProgram(
        n=n, q=2, part_dims=(1,) * n, true_dim=0, false_dim=0,
        subspaces=_edge_letters(n), A=np.ones((1, n)), tau=np.ones(1),
    )


def build_and(n: int) -> SpanProgram:
    """AND on n bits: V = C^n, tau = all-ones, A = identity."""
    if n < 1:
        raise InvalidInputError("AND needs at least one input bit")
    return SpanProgram(
        n=n, q=2, part_dims=(1,) * n, true_dim=0, false_dim=0,
        subspaces=_edge_letters(n), A=np.eye(n), tau=np.ones(n),
    )


@dataclass(frozen=True)
class GraphSpec:
    """Undirected graph on ``vertices`` vertices whose potential edges are the inputs.

    Edge ``j`` is present iff ``x_j = 1``. Parallel edges are allowed,
    self-loops are not.
    """

    vertices: int
    edges: tuple
    s: int
    t: int

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.s == self.t:
            raise InvalidInputError("terminals s and t must differ")
        for name, v in (("s", self.s), ("t", self.t)):
            if not 0 <= v < self.vertices:
                raise InvalidInputError(f"terminal {name}={v} is not a vertex")
        for j, (u, v) in enumerate(edges):
            if u == v:
                raise InvalidInputError(f"edge {j} is a self-loop at vertex {u}")
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise InvalidInputError(f"edge {j} = ({u}, {v}) has an endpoint outside the graph")

    @property
    def m(self) -> int:
        return len(self.edges)

    @classmethod
    def from_dict(cls, d: dict) -> "GraphSpec":
        return cls(vertices=int(d["vertices"]), edges=tuple(map(tuple, d["edges"])), s=int(d["s"]), t=int(d["t"]))

    def to_dict(self) -> dict:
        return {"vertices": self.vertices, "edges": [list(e) for e in self.edges], "s": self.s, "t": self.t}

    def present(self, x) -> list:
        x = as_input(x, self.m, 2)
        return [e for e, b in zip(self.edges, x) if b]


def build_stconn(g: GraphSpec) -> SpanProgram:
    """st-connectivity: edge (u, v) maps to |u> - |v>, tau = |s> - |t>.

    Stored unscaled: positive witness size is the effective resistance.
    """
    A = np.zeros((g.vertices, g.m))
    for j, (u, v) in enumerate(g.edges):
        A[u, j] = 1.0
        A[v, j] = -1.0
    tau = np.zeros(g.vertices)
    tau[g.s], tau[g.t] = 1.0, -1.0
    return SpanProgram(
        n=g.m, q=2, part_dims=(1,) * g.m, true_dim=0, false_dim=0,
        subspaces=_edge_letters(g.m), A=A, tau=tau,
    )


def laplacian(vertices: int, edges) -> np.ndarray:
    L = np.zeros((vertices, vertices))
    for u, v in edges:
        L[u, u] += 1
        L[v, v] += 1
        L[u, v] -= 1
        L[v, u] -= 1
    return L


def effective_resistance(g: GraphSpec, x) -> float:
    """R_{s,t} of the unit-conductance subgraph selected by ``x``; inf if disconnected."""
    edges = g.present(x)
    adj = np.zeros((g.vertices, g.vertices))
    for u, v in edges:
        adj[u, v] = adj[v, u] = 1
    _, labels = connected_components(adj, directed=False)
    if labels[g.s] != labels[g.t]:
        return float("inf")
    e = np.zeros(g.vertices)
    e[g.s], e[g.t] = 1.0, -1.0
    return float(e @ np.linalg.pinv(laplacian(g.vertices, edges)) @ e)


def shortest_path_length(g: GraphSpec, x) -> float:
    """Hop distance from s to t over present edges (BFS); inf if none."""
    nbrs = {v: [] for v in range(g.vertices)}
    for u, v in g.present(x):
        nbrs[u].append(v)
        nbrs[v].append(u)
    dist = {g.s: 0}
    frontier = [g.s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in nbrs[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return float(dist.get(g.t, float("inf")))


def component_cut_size(g: GraphSpec, x) -> int:
    """Number of potential edges leaving the present-edge component of s."""
    adj = np.zeros((g.vertices, g.vertices))
    for u, v in g.present(x):
        adj[u, v] = adj[v, u] = 1
    _, labels = connected_components(adj, directed=False)
    side = labels == labels[g.s]
    return sum(1 for u, v in g.edges if side[u] != side[v])


GRAPHS = {
    "st2": GraphSpec(2, ((0, 1),), 0, 1),
    "parallel2": GraphSpec(2, ((0, 1), (0, 1)), 0, 1),
    "path4": GraphSpec(4, ((0, 1), (1, 2), (2, 3)), 0, 3),
    "diamond": GraphSpec(4, ((0, 1), (0, 2), (1, 3), (2, 3), (1, 2)), 0, 3),
    "k4": GraphSpec(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)), 0, 3),
    "house5": GraphSpec(5, ((0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 4), (3, 2)), 0, 4),
    "ladder6": GraphSpec(6, ((0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)), 0, 5),
    "prism6": GraphSpec(
        6, ((0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)), 0, 4
    ),
}


def catalog_program(name: str) -> SpanProgram:
    """Catalog lookup: ``or<n>``, ``and<n>`` or ``st:<graph>``."""
    if name.startswith("or"):
        return build_or(int(name[2:]))
    if name.startswith("and"):
        return build_and(int(name[3:]))
    if name.startswith("st:"):
        try:
            return build_stconn(GRAPHS[name[3:]])
        except KeyError:
            raise InvalidInputError(f"unknown catalog graph {name[3:]!r}") from None
    raise InvalidInputError(f"unknown catalog instance {name!r}")
