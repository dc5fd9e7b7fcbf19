"""Immutable undirected simple graphs and the network statistics computed on them.

Graphs use dense 0-based node indices; external labels are mapped at the I/O
boundary. All statistics are pure functions of the graph, so graphs can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Graph",
    "StatKind",
    "EDGE_COUNT",
    "TRIANGLE_COUNT",
    "AVG_LOCAL_CLUSTERING",
    "DEGREE_ASSORTATIVITY",
    "degree_quartile",
    "DEFAULT_GOF_STATS",
    "build_graph",
    "induced_subgraph",
    "largest_connected_component",
    "triangle_count",
    "avg_local_clustering",
    "degree_assortativity",
    "degree_quantiles",
    "compute_stat",
]

# Above this node count, closed-2-path counting switches to sparse matrices.
_DENSE_LIMIT = 512


class Graph:
    """Undirected simple graph backed by a read-only boolean adjacency matrix."""

    __slots__ = ("_adj", "_degrees", "_closed2")

    def __init__(self, adjacency: np.ndarray):
        adj = np.asarray(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if adj.shape[0] > 0:
            if np.any(np.diagonal(adj)):
                raise ValueError("self-loops are not allowed")
            if not np.array_equal(adj, adj.T):
                raise ValueError("adjacency must be symmetric")
        self._adj = adj
        self._adj.setflags(write=False)
        self._degrees = None
        self._closed2 = None

    @classmethod
    def _from_trusted(cls, adj: np.ndarray) -> "Graph":
        """Wrap an adjacency matrix known to be symmetric and loop-free."""
        g = cls.__new__(cls)
        g._adj = adj
        g._adj.setflags(write=False)
        g._degrees = None
        g._closed2 = None
        return g

    @property
    def node_count(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only boolean adjacency matrix."""
        return self._adj

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            d = self._adj.sum(axis=1, dtype=np.int64)
            d.setflags(write=False)
            self._degrees = d
        return self._degrees

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return np.flatnonzero(self._adj[u])

    def edges(self) -> np.ndarray:
        """Edge list as an (E, 2) array with u < v per row."""
        rows, cols = np.nonzero(np.triu(self._adj, 1))
        return np.column_stack([rows, cols])

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and np.array_equal(self._adj, other._adj)

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, edges={self.edge_count})"


def build_graph(node_count: int, edges) -> Graph:
    """Build a graph from an edge list; duplicate pairs collapse to one edge.

    Raises ValueError on self-loops or out-of-range indices.
    """
    if node_count < 0:
        raise ValueError("node_count must be nonnegative")
    adj = np.zeros((node_count, node_count), dtype=bool)
    for u, v in edges:
        u = int(u)
        v = int(v)
        if u == v:
            raise ValueError(f"self-loop ({u},{v}) not allowed")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ValueError(f"edge ({u},{v}) out of range for {node_count} nodes")
        adj[u, v] = True
        adj[v, u] = True
    return Graph._from_trusted(adj)


def induced_subgraph(g: Graph, nodes) -> Graph:
    """Subgraph on `nodes`, relabeled 0..len(nodes)-1 in input order."""
    idx = np.asarray(nodes, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("nodes must be a 1-d sequence")
    if idx.size and (idx.min() < 0 or idx.max() >= g.node_count):
        raise ValueError("node index out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("duplicate node indices")
    sub = g.adjacency[np.ix_(idx, idx)].copy()
    return Graph._from_trusted(sub)


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component.

    Ties are broken in favor of the component containing the smallest
    original node index; nodes keep ascending original-index order.
    """
    if g.node_count == 0:
        raise ValueError("empty graph has no components")
    _, labels = connected_components(sparse.csr_matrix(g.adjacency), directed=False)
    sizes = np.bincount(labels)
    # first occurrence of each label = smallest node index in that component
    _, first_idx = np.unique(labels, return_index=True)
    best = min(range(sizes.size), key=lambda c: (-sizes[c], first_idx[c]))
    return induced_subgraph(g, np.flatnonzero(labels == best))


def _closed_two_paths(g: Graph) -> np.ndarray:
    """Per-node count of closed 2-paths (= 2x triangles through the node).

    Cached on the (immutable) graph since clustering and triangle counting
    share it.
    """
    if g._closed2 is not None:
        return g._closed2
    n = g.node_count
    if n == 0:
        closed = np.zeros(0)
    elif n <= _DENSE_LIMIT:
        a = g.adjacency.astype(np.float64)
        closed = ((a @ a) * a).sum(axis=1)
    else:
        s = sparse.csr_matrix(g.adjacency, dtype=np.float64)
        closed = np.asarray((s @ s).multiply(s).sum(axis=1)).ravel()
    g._closed2 = closed
    return closed


def triangle_count(g: Graph) -> int:
    """Number of unordered node triples forming 3-cycles."""
    return int(round(_closed_two_paths(g).sum() / 6.0))


def avg_local_clustering(g: Graph) -> float:
    """Mean local clustering; nodes with degree < 2 contribute 0."""
    if g.node_count == 0:
        raise ValueError("clustering undefined on an empty graph")
    deg = g.degrees.astype(np.float64)
    closed = _closed_two_paths(g)
    pairs = deg * (deg - 1)
    local = np.divide(closed, pairs, out=np.zeros_like(closed), where=pairs > 0)
    return float(local.mean())


def degree_assortativity(g: Graph) -> float | None:
    """Pearson correlation of endpoint degrees over both edge orientations.

    Returns None (undefined) when the graph has no edges or zero degree
    variance at the endpoints (e.g. regular graphs).
    """
    if g.edge_count == 0:
        return None
    e = g.edges()
    deg = g.degrees.astype(np.float64)
    x = np.concatenate([deg[e[:, 0]], deg[e[:, 1]]])
    y = np.concatenate([deg[e[:, 1]], deg[e[:, 0]]])
    dx = x - x.mean()
    denom = np.dot(dx, dx)
    if denom <= 0:
        return None
    r = float(np.dot(dx, y - y.mean()) / denom)
    return min(1.0, max(-1.0, r))


def degree_quantiles(g: Graph, probs) -> np.ndarray:
    """Empirical degree quantiles, linear interpolation at rank (n-1)*q."""
    if g.node_count == 0:
        raise ValueError("quantiles undefined on an empty graph")
    probs = np.asarray(probs, dtype=float)
    if np.any((probs < 0) | (probs > 1)):
        raise ValueError("quantile probabilities must lie in [0, 1]")
    return np.quantile(g.degrees.astype(np.float64), probs)


@dataclass(frozen=True)
class StatKind:
    """A named network statistic; quartiles carry their probability level."""

    name: str
    quantile: float | None = None

    _SIMPLE = ("edge_count", "triangle_count", "avg_clustering", "assortativity")

    def __post_init__(self):
        if self.name == "degree_quartile":
            if self.quantile not in (0.25, 0.5, 0.75):
                raise ValueError("degree quartile level must be 0.25, 0.5 or 0.75")
        elif self.name in self._SIMPLE:
            if self.quantile is not None:
                raise ValueError(f"{self.name} takes no quantile level")
        else:
            raise ValueError(f"unknown statistic {self.name!r}")

    @property
    def label(self) -> str:
        """Stable identifier used in CSV headers and report JSON."""
        if self.name == "degree_quartile":
            return f"degree_q{int(round(self.quantile * 100))}"
        return self.name

    @classmethod
    def parse(cls, text: str) -> "StatKind":
        if text in cls._SIMPLE:
            return cls(text)
        if text.startswith("degree_q"):
            try:
                q = int(text[len("degree_q"):]) / 100.0
            except ValueError:
                raise ValueError(f"unknown statistic {text!r}") from None
            return cls("degree_quartile", q)
        raise ValueError(f"unknown statistic {text!r}")


EDGE_COUNT = StatKind("edge_count")
TRIANGLE_COUNT = StatKind("triangle_count")
AVG_LOCAL_CLUSTERING = StatKind("avg_clustering")
DEGREE_ASSORTATIVITY = StatKind("assortativity")


def degree_quartile(q: float) -> StatKind:
    return StatKind("degree_quartile", q)


DEFAULT_GOF_STATS = (AVG_LOCAL_CLUSTERING, TRIANGLE_COUNT, DEGREE_ASSORTATIVITY)


def compute_stat(g: Graph, kind: StatKind) -> float | None:
    """Evaluate one statistic; returns None where the statistic is undefined."""
    if kind.name == "edge_count":
        return float(g.edge_count)
    if kind.name == "triangle_count":
        return float(triangle_count(g))
    if kind.name == "avg_clustering":
        return avg_local_clustering(g)
    if kind.name == "assortativity":
        return degree_assortativity(g)
    return float(degree_quantiles(g, [kind.quantile])[0])
