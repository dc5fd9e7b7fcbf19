"""Network model generators and seed-network constructions.

Every generator is a pure function of its parameters and an explicit random
stream, so ensembles of draws parallelize by assigning one stream per
replicate. Streams are Philox counter-based generators keyed through
``numpy.random.SeedSequence``, which makes every draw reproducible across
runs, platforms and worker counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .graph import Graph

__all__ = ["RNG_ALGORITHM", "RngStream", "SeedSpec", "ModelSpec", "make_seed",
           "gen_gnp", "grow_gnp_from_seed", "gen_gnm", "gen_triadic",
           "gen_dmc", "gen_dmr", "draw"]

# Recorded in run manifests so artifacts can be tied to the exact stream scheme.
RNG_ALGORITHM = "philox4x64(SeedSequence spawn_key)/v1"


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream identified by (master seed, stream path).

    The path generalizes a flat stream index to a short tuple so replicate
    streams can be derived per purpose (e.g. model index, then replicate
    index) without coordination. Identical (seed, path) always yields the
    identical draw sequence.
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def child(self, *indices: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream or a ready numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


@dataclass(frozen=True)
class SeedSpec:
    """Seed-network construction for grown models.

    Variants: ``complete`` (K_k), ``hormozdiari`` (two highly connected
    cliques of 7 and 10 nodes plus 33 singly attached nodes, 50 total),
    ``inverse_geometric`` (k standard-normal points in d dimensions, edge
    where pairwise distance exceeds R), and ``explicit`` (a supplied graph,
    loaded from ``path`` at the I/O boundary).
    """

    type: str
    k: int | None = None
    d: int | None = None
    R: float | None = None
    path: str | None = None
    graph: Graph | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.type == "complete":
            if self.k is None or self.k < 1:
                raise ValueError("complete seed needs k >= 1")
        elif self.type == "hormozdiari":
            pass
        elif self.type == "inverse_geometric":
            if self.k is None or self.k < 1:
                raise ValueError("inverse_geometric seed needs node count k >= 1")
            if self.d is None or self.d < 1:
                raise ValueError("inverse_geometric seed needs dimension d >= 1")
            if self.R is None or self.R <= 0:
                raise ValueError("inverse_geometric seed needs threshold R > 0")
        elif self.type == "explicit":
            if self.path is None and self.graph is None:
                raise ValueError("explicit seed needs a path or an in-memory graph")
        else:
            raise ValueError(f"unknown seed type {self.type!r}")

    def node_count(self) -> int | None:
        """Seed size when known without materializing the graph."""
        if self.type == "complete" or self.type == "inverse_geometric":
            return self.k
        if self.type == "hormozdiari":
            return 50
        if self.graph is not None:
            return self.graph.node_count
        return None

    def with_graph(self, graph: Graph) -> "SeedSpec":
        return replace(self, graph=graph)

    def to_json(self) -> dict:
        out = {"type": self.type}
        for name in ("k", "d", "R", "path"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SeedSpec":
        if not isinstance(obj, dict) or "type" not in obj:
            raise ValueError("seed spec must be an object with a 'type' field")
        known = {"type", "k", "d", "R", "path"}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown seed fields: {sorted(extra)}")
        return cls(**obj)


_MODEL_FIELDS = {
    "gnp": ("n", "p"),
    "gnp_grown": ("n", "p", "seed"),
    "gnm": ("n", "m"),
    "triadic": ("n", "m", "p0", "p1", "p2"),
    "dmc": ("n", "q_mod", "q_con", "seed"),
    "dmr": ("n", "q_del", "q_new", "seed", "remove_singletons"),
}


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of one candidate network model."""

    model: str
    n: int
    m: int | None = None
    p: float | None = None
    p0: float | None = None
    p1: float | None = None
    p2: float | None = None
    q_mod: float | None = None
    q_con: float | None = None
    q_del: float | None = None
    q_new: float | None = None
    seed: SeedSpec | None = None
    remove_singletons: bool = False

    def __post_init__(self):
        if self.model not in _MODEL_FIELDS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        required = [f for f in _MODEL_FIELDS[self.model] if f != "remove_singletons"]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"model {self.model!r} requires field {name!r}")
        for name in ("p", "p0", "p1", "p2", "q_mod", "q_con", "q_del"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        # q_new enters as q_new/n(t) (clamped), so values above 1 are legal
        if self.q_new is not None and self.q_new < 0:
            raise ValueError("q_new must be nonnegative")
        if self.m is not None:
            if not 0 <= self.m <= self.n * (self.n - 1) // 2:
                raise ValueError("m must lie in [0, C(n,2)]")
        seed_n = self.seed.node_count() if self.seed is not None else None
        if seed_n is not None and seed_n > self.n:
            raise ValueError("seed network larger than target size n")

    def label(self) -> str:
        return self.model

    def to_json(self) -> dict:
        out = {"model": self.model, "n": self.n}
        for name in ("m", "p", "p0", "p1", "p2", "q_mod", "q_con", "q_del", "q_new"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.seed is not None:
            out["seed"] = self.seed.to_json()
        if self.model == "dmr":
            out["remove_singletons"] = self.remove_singletons
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ModelSpec":
        if not isinstance(obj, dict) or "model" not in obj:
            raise ValueError("model spec must be an object with a 'model' field")
        known = {"model", "n", "m", "p", "p0", "p1", "p2", "q_mod", "q_con",
                 "q_del", "q_new", "seed", "remove_singletons"}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown model fields: {sorted(extra)}")
        obj = dict(obj)
        if "seed" in obj:
            obj["seed"] = SeedSpec.from_json(obj["seed"])
        return cls(**obj)


def _complete(k: int) -> np.ndarray:
    adj = np.ones((k, k), dtype=bool)
    np.fill_diagonal(adj, False)
    return adj


def make_seed(spec: SeedSpec, rng) -> Graph:
    """Materialize a seed network."""
    gen = as_generator(rng)
    if spec.type == "complete":
        return Graph._from_trusted(_complete(spec.k))
    if spec.type == "hormozdiari":
        adj = np.zeros((50, 50), dtype=bool)
        adj[:7, :7] = _complete(7)
        adj[7:17, 7:17] = _complete(10)
        # each of the 70 inter-clique dyads independently with prob 0.67
        cross = gen.random((7, 10)) < 0.67
        adj[:7, 7:17] = cross
        adj[7:17, :7] = cross.T
        # 33 further nodes, one edge each to a uniformly chosen clique node
        targets = gen.integers(0, 17, size=33)
        for i, t in enumerate(targets):
            adj[17 + i, t] = True
            adj[t, 17 + i] = True
        return Graph._from_trusted(adj)
    if spec.type == "inverse_geometric":
        pts = gen.standard_normal((spec.k, spec.d))
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        adj = dist > spec.R
        np.fill_diagonal(adj, False)
        return Graph._from_trusted(adj)
    if spec.graph is None:
        raise ValueError(f"explicit seed {spec.path!r} has not been loaded")
    return spec.graph


def gen_gnp(n: int, p: float, rng) -> Graph:
    """Independent-dyad random graph: each dyad is an edge with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    gen = as_generator(rng)
    a = np.triu(gen.random((n, n)) < p, 1)
    return Graph._from_trusted(a | a.T)


def grow_gnp_from_seed(seed: Graph, n: int, p: float, rng) -> Graph:
    """Grow to n nodes, each new node joining every prior node with prob p.

    Dyads not inside the seed block are independent Bernoulli(p) regardless
    of insertion order, so the growth is sampled in one shot.
    """
    s = seed.node_count
    if s > n:
        raise ValueError("seed network larger than target size n")
    gen = as_generator(rng)
    a = np.triu(gen.random((n, n)) < p, 1)
    a = a | a.T
    a[:s, :s] = seed.adjacency
    return Graph._from_trusted(a)


def gen_gnm(n: int, m: int, rng) -> Graph:
    """Uniform random graph with exactly m edges."""
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ValueError("m must lie in [0, C(n,2)]")
    gen = as_generator(rng)
    rows, cols = np.triu_indices(n, 1)
    sel = gen.choice(total, size=m, replace=False)
    adj = np.zeros((n, n), dtype=bool)
    adj[rows[sel], cols[sel]] = True
    return Graph._from_trusted(adj | adj.T)


def gen_triadic(n: int, m: int, p0: float, p1: float, p2: float, rng) -> Graph:
    """Edge-by-edge uniform-dyad model with triangle-closing bonus.

    Repeats until m edges are present: propose a uniformly random
    unconnected dyad; with t = number of triangles the edge would close,
    accept with probability min(1, p0 + p1*1{t>=1} + p2*max(0, t-1)).
    With p1 = p2 = 0 this reduces to the uniform fixed-edge-count model.
    """
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ValueError("m must lie in [0, C(n,2)]")
    if m > 0 and p0 <= 0.0:
        # first proposals close no triangles, so acceptance would be 0 forever
        raise ValueError("p0 must be positive for a nonempty target edge count")
    gen = as_generator(rng)
    adj = [0] * n
    edges = 0
    pos = bufsize = 0
    buf_u = buf_v = buf_r = None
    while edges < m:
        if pos >= bufsize:
            bufsize = max(4 * (m - edges), 256)
            buf_u = gen.integers(0, n, size=bufsize)
            buf_v = gen.integers(0, n, size=bufsize)
            buf_r = gen.random(bufsize)
            pos = 0
        # plain ints: bitmasks must stay arbitrary-precision Python ints
        u = int(buf_u[pos])
        v = int(buf_v[pos])
        r = buf_r[pos]
        pos += 1
        if u == v or (adj[u] >> v) & 1:
            continue
        t = (adj[u] & adj[v]).bit_count()
        prob = p0 + (p1 + p2 * (t - 1) if t >= 1 else 0.0)
        if r < prob:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            edges += 1
    return Graph._from_trusted(_masks_to_adjacency(adj, n))


def _masks_to_adjacency(masks: list[int], n: int) -> np.ndarray:
    nbytes = (n + 7) // 8 if n else 1
    raw = b"".join(mask.to_bytes(nbytes, "little") for mask in masks)
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(n, nbytes)
    return np.unpackbits(rows, axis=1, bitorder="little")[:, :n].astype(bool)


def gen_dmc(seed: Graph, n: int, q_mod: float, q_con: float, rng) -> Graph:
    """Duplication model: copy a uniform node's edges, then prune and link.

    Per step: connect the new node to every neighbor of a uniformly chosen
    node u; for each such neighbor, with probability q_mod delete exactly one
    of the two parallel attachments (victim chosen uniformly); finally add
    the (u, new) edge with probability q_con.
    """
    s = seed.node_count
    if s > n:
        raise ValueError("seed network larger than target size n")
    gen = as_generator(rng)
    adj = np.zeros((n, n), dtype=bool)
    adj[:s, :s] = seed.adjacency
    for k in range(s, n):
        u = int(gen.integers(0, k))
        nbrs = np.flatnonzero(adj[u, :k])
        adj[k, nbrs] = True
        adj[nbrs, k] = True
        if nbrs.size:
            fires = gen.random(nbrs.size) < q_mod
            keep_new = gen.random(nbrs.size) < 0.5  # victim side when firing
            drop_from_u = nbrs[fires & keep_new]
            drop_from_k = nbrs[fires & ~keep_new]
            adj[u, drop_from_u] = False
            adj[drop_from_u, u] = False
            adj[k, drop_from_k] = False
            adj[drop_from_k, k] = False
        if gen.random() < q_con:
            adj[u, k] = True
            adj[k, u] = True
    return Graph._from_trusted(adj)


def gen_dmr(seed: Graph, n: int, q_del: float, q_new: float,
            remove_singletons: bool, rng) -> Graph:
    """Duplication model with random rewiring.

    Per step: copy a uniformly chosen node's neighborhood onto the new node,
    delete each copied edge independently with probability q_del, then for
    each node existing at the start of the step independently add an edge to
    the new node with probability min(1, q_new / n(t)). With
    remove_singletons, a new node that ends its creation step with degree 0
    is discarded immediately (so the output can have fewer than n nodes).
    """
    s = seed.node_count
    if s > n:
        raise ValueError("seed network larger than target size n")
    gen = as_generator(rng)
    adj = np.zeros((n, n), dtype=bool)
    adj[:s, :s] = seed.adjacency
    active = list(range(s))
    for k in range(s, n):
        nt = len(active)
        u = active[int(gen.integers(0, nt))]
        nbrs = np.flatnonzero(adj[u])
        kept = nbrs[gen.random(nbrs.size) >= q_del] if nbrs.size else nbrs
        adj[k, kept] = True
        adj[kept, k] = True
        prob = min(1.0, q_new / nt)
        extra = np.array(active, dtype=np.int64)[gen.random(nt) < prob]
        adj[k, extra] = True
        adj[extra, k] = True
        if remove_singletons and not adj[k].any():
            continue
        active.append(k)
    if len(active) == n:
        return Graph._from_trusted(adj)
    idx = np.array(active, dtype=np.int64)
    return Graph._from_trusted(adj[np.ix_(idx, idx)].copy())


def draw(spec: ModelSpec, rng) -> Graph:
    """Sample one network from a model spec.

    The output has spec.n nodes except when DMR singleton removal drops
    some; callers that need the exact size should check node_count.
    """
    gen = as_generator(rng)
    if spec.model == "gnp":
        return gen_gnp(spec.n, spec.p, gen)
    if spec.model == "gnp_grown":
        return grow_gnp_from_seed(make_seed(spec.seed, gen), spec.n, spec.p, gen)
    if spec.model == "gnm":
        return gen_gnm(spec.n, spec.m, gen)
    if spec.model == "triadic":
        return gen_triadic(spec.n, spec.m, spec.p0, spec.p1, spec.p2, gen)
    if spec.model == "dmc":
        return gen_dmc(make_seed(spec.seed, gen), spec.n, spec.q_mod, spec.q_con, gen)
    if spec.model == "dmr":
        return gen_dmr(make_seed(spec.seed, gen), spec.n, spec.q_del, spec.q_new,
                       spec.remove_singletons, gen)
    raise ValueError(f"unknown model {spec.model!r}")
