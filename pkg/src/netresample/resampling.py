"""Node-wise bootstrap subsampling and resampling-distribution machinery.

Three constructions are provided: the resampling distribution of the observed
network (repeated subsamples of one graph), the independent-draw distribution
of a candidate model (one fresh draw per subsample), and the single-draw
distribution (many subsamples of one model draw). Replicates are keyed by
per-replicate random streams, so results are identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .generators import ModelSpec, RngStream, draw
from .graph import Graph, StatKind, compute_stat, induced_subgraph

__all__ = ["SubsamplePlan", "Provenance", "ResamplingDistribution",
           "DistributionSummary", "uniform_subsample", "resample_observed",
           "resample_model_independent", "resample_model_single_draw",
           "ks_two_sample", "kl_divergence", "summarize"]


@dataclass(frozen=True)
class SubsamplePlan:
    """How to subsample: size (absolute or fraction of nodes) and replicates.

    A fraction alpha resolves to round(alpha * n). The optional seed is used
    when the resampling call is not handed an explicit stream.
    """

    replicate_count: int
    subsample_size: int | None = None
    subsample_fraction: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.replicate_count < 1:
            raise ValueError("replicate_count must be >= 1")
        if (self.subsample_size is None) == (self.subsample_fraction is None):
            raise ValueError("give exactly one of subsample_size / subsample_fraction")
        if self.subsample_fraction is not None and not 0.0 < self.subsample_fraction <= 1.0:
            raise ValueError("subsample_fraction must lie in (0, 1]")
        if self.subsample_size is not None and self.subsample_size < 1:
            raise ValueError("subsample_size must be >= 1")

    def resolve_size(self, node_count: int) -> int:
        if self.subsample_size is not None:
            m = self.subsample_size
        else:
            m = int(round(self.subsample_fraction * node_count))
        if not 1 <= m <= node_count:
            raise ValueError(f"subsample size {m} invalid for {node_count} nodes")
        return m


@dataclass(frozen=True)
class Provenance:
    """Where a resampling distribution came from."""

    kind: str  # "observed" | "model_independent" | "model_single_draw"
    model: ModelSpec | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.model is not None:
            out["model"] = self.model.to_json()
        return out


class ResamplingDistribution:
    """One statistic's values over replicates, missing entries kept as None."""

    def __init__(self, statistic: StatKind, per_replicate, source: Provenance,
                 subsample_size: int):
        self.statistic = statistic
        self.per_replicate = list(per_replicate)
        self.source = source
        self.subsample_size = subsample_size

    @property
    def replicate_count(self) -> int:
        return len(self.per_replicate)

    @property
    def missing_count(self) -> int:
        return sum(v is None for v in self.per_replicate)

    @property
    def values(self) -> np.ndarray:
        """Non-missing values in replicate order."""
        return np.array([v for v in self.per_replicate if v is not None], dtype=float)


def _base_stream(rng, plan: SubsamplePlan) -> RngStream:
    if rng is not None:
        if isinstance(rng, RngStream):
            return rng
        raise TypeError("rng must be an RngStream")
    if plan.seed is None:
        raise ValueError("no random stream: pass rng or set a seed on the plan")
    return RngStream(plan.seed)


def _run_replicates(count: int, task, threads: int) -> list:
    """results[i] = task(i), in replicate order regardless of worker count."""
    if threads <= 1:
        return [task(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, range(count)))


def _collect(stats, rows, source, subsample_size) -> list[ResamplingDistribution]:
    return [
        ResamplingDistribution(stat, [row[j] for row in rows], source, subsample_size)
        for j, stat in enumerate(stats)
    ]


def uniform_subsample(g: Graph, m: int, rng) -> Graph:
    """Induced subgraph on m nodes drawn uniformly without replacement."""
    if not 1 <= m <= g.node_count:
        raise ValueError(f"subsample size {m} invalid for {g.node_count} nodes")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    nodes = gen.choice(g.node_count, size=m, replace=False)
    return induced_subgraph(g, nodes)


def _stats_row(g: Graph, stats) -> list:
    return [compute_stat(g, stat) for stat in stats]


def resample_observed(g: Graph, plan: SubsamplePlan, stats, rng=None,
                      threads: int = 1) -> list[ResamplingDistribution]:
    """Resampling distributions of the observed network (all stats share
    the same subsample within a replicate)."""
    stats = list(stats)
    m = plan.resolve_size(g.node_count)
    base = _base_stream(rng, plan)

    def one(i: int):
        gen = base.child(i).generator()
        return _stats_row(uniform_subsample(g, m, gen), stats)

    rows = _run_replicates(plan.replicate_count, one, threads)
    return _collect(stats, rows, Provenance("observed"), m)


def resample_model_independent(spec: ModelSpec, target_n: int, plan: SubsamplePlan,
                               stats, rng=None, threads: int = 1,
                               ) -> list[ResamplingDistribution]:
    """One fresh model draw per replicate, one subsample of each draw.

    A draw that comes back smaller than the subsample size (possible under
    singleton removal) yields a missing replicate rather than aborting.
    """
    if spec.n != target_n:
        raise ValueError(f"model size {spec.n} != target size {target_n}")
    stats = list(stats)
    m = plan.resolve_size(target_n)
    base = _base_stream(rng, plan)

    def one(i: int):
        gen = base.child(i).generator()
        g = draw(spec, gen)
        if g.node_count < m:
            return [None] * len(stats)
        return _stats_row(uniform_subsample(g, m, gen), stats)

    rows = _run_replicates(plan.replicate_count, one, threads)
    return _collect(stats, rows, Provenance("model_independent", spec), m)


def resample_model_single_draw(spec: ModelSpec, target_n: int, plan: SubsamplePlan,
                               stats, rng=None, threads: int = 1,
                               ) -> list[ResamplingDistribution]:
    """One model draw, then all subsamples taken from it."""
    if spec.n != target_n:
        raise ValueError(f"model size {spec.n} != target size {target_n}")
    stats = list(stats)
    m = plan.resolve_size(target_n)
    base = _base_stream(rng, plan)
    g = draw(spec, base.child(0).generator())
    if g.node_count < m:
        rows = [[None] * len(stats)] * plan.replicate_count
        return _collect(stats, rows, Provenance("model_single_draw", spec), m)

    def one(i: int):
        gen = base.child(1 + i).generator()
        return _stats_row(uniform_subsample(g, m, gen), stats)

    rows = _run_replicates(plan.replicate_count, one, threads)
    return _collect(stats, rows, Provenance("model_single_draw", spec), m)


def ks_two_sample(a, b) -> float:
    """Exact two-sample Kolmogorov-Smirnov distance between ECDFs."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample needs nonempty samples")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.abs(fa - fb).max())


def kl_divergence(a, b, bin_count: int = 20) -> float:
    """Discrete KL(P_a || P_b) over shared equal-width bins.

    Bins span the pooled min/max; counts get add-one smoothing before
    normalization, so the divergence is finite for any pair of samples.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("kl_divergence needs nonempty samples")
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        hi = lo + 1.0  # all mass in one bin either way
    ca, _ = np.histogram(a, bins=bin_count, range=(lo, hi))
    cb, _ = np.histogram(b, bins=bin_count, range=(lo, hi))
    p = (ca + 1.0) / (ca.sum() + bin_count)
    q = (cb + 1.0) / (cb.sum() + bin_count)
    return float(np.sum(p * np.log(p / q)))


@dataclass(frozen=True)
class DistributionSummary:
    mean: float
    variance: float
    min: float
    max: float
    quartiles: tuple[float, float, float]
    count: int
    missing: int

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "min": self.min,
            "max": self.max,
            "quartiles": list(self.quartiles),
            "count": self.count,
            "missing": self.missing,
        }


def summarize(d: ResamplingDistribution) -> DistributionSummary:
    """Sample moments and quartiles of the non-missing replicate values."""
    values = d.values
    if values.size == 0:
        raise ValueError("cannot summarize an all-missing distribution")
    variance = float(values.var(ddof=1)) if values.size > 1 else 0.0
    q = np.quantile(values, [0.25, 0.5, 0.75])
    return DistributionSummary(
        mean=float(values.mean()),
        variance=variance,
        min=float(values.min()),
        max=float(values.max()),
        quartiles=(float(q[0]), float(q[1]), float(q[2])),
        count=int(values.size),
        missing=d.missing_count,
    )
