"""Closed-form machinery for the expected KS discrepancy between the
single-draw and independent-draw resampling distributions of edge counts
under the independent-dyad model G(n, p).

The chain: the overlap-size distribution of two uniform node subsamples,
the conditional product moment of their edge counts, their covariance, a
covariance-corrected normal approximation of the single-draw distribution,
the KS distance between two normals evaluated at density crossings, and the
expectation of that distance over the edge count of the underlying draw.
A Monte Carlo estimator of the same expectation serves as the empirical
counterpart. Binomial coefficients run through log-gamma so subsample sizes
in the thousands stay finite.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln, ndtr

from .generators import RngStream

__all__ = ["AnalyticScenario", "OverlapDistribution", "NormalApprox",
           "overlap_distribution", "product_moment_a", "cov_edge_counts",
           "f1_normal", "ks_two_normals", "expected_ks",
           "estimate_expected_ks_mc", "weighted_er_moments", "table1_rows",
           "TABLE1_ALPHAS"]

# Subsample fractions of the reference expected-KS table
TABLE1_ALPHAS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.5, 0.6, 0.7, 0.8, 0.9)

_VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class AnalyticScenario:
    """(n, p, alpha) plus the derived subsample quantities."""

    n: int
    p: float
    alpha: float
    m: int = field(init=False)
    m_star: int = field(init=False)
    dyad_count: int = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        m = int(round(self.alpha * self.n))
        if not 2 <= m <= self.n:
            raise ValueError(f"subsample size {m} must lie in [2, n]")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "m_star", m * (m - 1) // 2)
        object.__setattr__(self, "dyad_count", self.n * (self.n - 1) // 2)


@dataclass(frozen=True)
class NormalApprox:
    mean: float
    variance: float


def _lchoose(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


class OverlapDistribution:
    """Distribution of the overlap size of two uniform m-subsets of n nodes."""

    def __init__(self, n: int, m: int, weights: np.ndarray):
        self.n = n
        self.m = m
        self.min_overlap = max(0, 2 * m - n)
        self.weights = weights  # index o - min_overlap

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.min_overlap, self.m + 1)

    def pmf(self, o: int) -> float:
        if self.min_overlap <= o <= self.m:
            return float(self.weights[o - self.min_overlap])
        return 0.0

    def expected_shared_dyads(self) -> float:
        """E[C(O, 2)], the expected number of dyads the subsamples share."""
        o = self.support
        return float(np.dot(o * (o - 1) / 2.0, self.weights))


def overlap_distribution(n: int, m: int) -> OverlapDistribution:
    """Overlap pmf via counting, normalized in log space.

    The unnormalized weight of overlap o is
    C(n, 2m-o) * C(2m-o, o) * C(2m-2o, m-o): choose the union, the shared
    nodes within it, and the split of the rest between the two subsets.
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    o = np.arange(max(0, 2 * m - n), m + 1)
    lw = _lchoose(n, 2 * m - o) + _lchoose(2 * m - o, o) + _lchoose(2 * m - 2 * o, m - o)
    lw -= lw.max()
    w = np.exp(lw)
    w /= w.sum()
    return OverlapDistribution(n, m, w)


def product_moment_a(m: int, o: int, p_l: float) -> float:
    """E[EC1 * EC2] of two m-node subsamples sharing o nodes, dyad prob p_l.

    Shared dyads contribute their first moment once and squared-probability
    cross terms otherwise; all distinct-dyad products factorize.
    """
    if not 0 <= o <= m:
        raise ValueError("need 0 <= o <= m")
    if not 0.0 <= p_l <= 1.0:
        raise ValueError("p_l must lie in [0, 1]")
    m_star = m * (m - 1) / 2.0
    o_star = o * (o - 1) / 2.0
    pairs_shared = o_star * (o_star - 1) / 2.0  # C(o*, 2)
    return (o_star * p_l
            + 2.0 * pairs_shared * p_l ** 2
            + 2.0 * (m_star - o_star) * o_star * p_l ** 2
            + (m_star - o_star) ** 2 * p_l ** 2)


def _cov_coefficients(n: int, m: int) -> tuple[float, float]:
    """(s1, s2) with E[EC1*EC2] = s1*p_l + s2*p_l^2, averaging the
    conditional product moment over the overlap distribution."""
    od = overlap_distribution(n, m)
    o = od.support
    m_star = m * (m - 1) / 2.0
    o_star = o * (o - 1) / 2.0
    s1 = float(np.dot(o_star, od.weights))
    coef2 = (o_star * (o_star - 1)
             + 2.0 * (m_star - o_star) * o_star
             + (m_star - o_star) ** 2)
    s2 = float(np.dot(coef2, od.weights))
    return s1, s2


def cov_edge_counts(n: int, m: int, p_l: float) -> float:
    """Covariance of the edge counts of two independent m-node subsamples."""
    if not 2 <= m <= n:
        raise ValueError("need 2 <= m <= n")
    od = overlap_distribution(n, m)
    moments = np.array([product_moment_a(m, int(o), p_l) for o in od.support])
    m_star = m * (m - 1) / 2.0
    return float(np.dot(moments, od.weights) - (m_star * p_l) ** 2)


def f1_normal(scenario: AnalyticScenario, l: int, mode: str = "improved",
              ) -> NormalApprox:
    """Normal approximation of the single-draw resampling distribution,
    conditional on the drawn graph having l edges.

    naive:    Binomial(m*, p_l) moments, ignoring between-subsample overlap.
    improved: same mean; variance shrunk by the subsample covariance, i.e.
              E[EC^2] - E[EC1]E[EC2] - cov(EC1, EC2). May come out
              nonpositive at extreme p_l; callers floor it.
    """
    if mode not in ("naive", "improved"):
        raise ValueError("mode must be 'naive' or 'improved'")
    if not 0 <= l <= scenario.dyad_count:
        raise ValueError("l out of range")
    p_l = l / scenario.dyad_count
    m_star = float(scenario.m_star)
    mean = m_star * p_l
    if mode == "naive":
        return NormalApprox(mean, m_star * p_l * (1.0 - p_l))
    second = m_star * p_l + m_star * (m_star - 1.0) * p_l ** 2
    cov = cov_edge_counts(scenario.n, scenario.m, p_l)
    return NormalApprox(mean, second - mean ** 2 - cov)


def _ks_normals_arrays(mu1, v1, mu2, v2) -> np.ndarray:
    """sup |Phi1 - Phi2| elementwise; the sup sits at a density crossing."""
    mu1, v1, mu2, v2 = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (mu1, v1, mu2, v2)))
    out = np.zeros(mu1.shape)
    s1 = np.sqrt(v1)
    s2 = np.sqrt(v2)
    scale = np.maximum(v1, v2)
    same_var = np.abs(v1 - v2) <= 1e-12 * scale
    identical = same_var & (np.abs(mu1 - mu2) <= 1e-12 * np.maximum(1.0, np.abs(mu1)))
    eq = same_var & ~identical
    if eq.any():
        # equal spread: densities cross once, midway between the means
        x = 0.5 * (mu1[eq] + mu2[eq])
        out[eq] = np.abs(ndtr((x - mu1[eq]) / s1[eq]) - ndtr((x - mu2[eq]) / s2[eq]))
    gen = ~same_var
    if gen.any():
        # equate log densities: quadratic with two crossings, take the best
        a = 0.5 / v2[gen] - 0.5 / v1[gen]
        b = mu1[gen] / v1[gen] - mu2[gen] / v2[gen]
        c = (mu2[gen] ** 2 / (2.0 * v2[gen]) - mu1[gen] ** 2 / (2.0 * v1[gen])
             + 0.5 * np.log(v2[gen] / v1[gen]))
        root = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
        best = np.zeros(root.shape)
        for x in ((-b + root) / (2.0 * a), (-b - root) / (2.0 * a)):
            d = np.abs(ndtr((x - mu1[gen]) / s1[gen]) - ndtr((x - mu2[gen]) / s2[gen]))
            best = np.maximum(best, d)
        out[gen] = best
    return out


def ks_two_normals(f: NormalApprox, g: NormalApprox) -> float:
    """KS distance between two normal distributions."""
    if f.variance <= 0 or g.variance <= 0:
        raise ValueError("variances must be positive")
    return float(_ks_normals_arrays(f.mean, f.variance, g.mean, g.variance)[()])


def expected_ks(scenario: AnalyticScenario, mode: str = "improved",
                tail_eps: float = 1e-12) -> float:
    """Expected KS between the single-draw and independent-draw distributions.

    Sums the per-edge-count KS weighted by the Binomial(C(n,2), p) pmf over
    the central range whose excluded tail mass is below tail_eps; each
    excluded term is a KS value <= 1, so the truncation error is below
    tail_eps as well.
    """
    if mode not in ("naive", "improved"):
        raise ValueError("mode must be 'naive' or 'improved'")
    n_dyads = scenario.dyad_count
    p = scenario.p
    lo = int(stats.binom.ppf(tail_eps / 2.0, n_dyads, p))
    hi = int(stats.binom.isf(tail_eps / 2.0, n_dyads, p))
    l = np.arange(lo, hi + 1)
    weights = stats.binom.pmf(l, n_dyads, p)
    p_l = l / n_dyads
    m_star = float(scenario.m_star)
    mean1 = m_star * p_l
    var_naive = m_star * p_l * (1.0 - p_l)
    if mode == "naive":
        var1 = var_naive
    else:
        s1, s2 = _cov_coefficients(scenario.n, scenario.m)
        cov = s1 * p_l + s2 * p_l ** 2 - (m_star * p_l) ** 2
        var1 = (m_star * p_l + m_star * (m_star - 1.0) * p_l ** 2
                - (m_star * p_l) ** 2 - cov)
    var1 = np.maximum(var1, _VAR_FLOOR)
    var_c = max(m_star * p * (1.0 - p), _VAR_FLOOR)
    ks = _ks_normals_arrays(mean1, var1, m_star * p, var_c)
    return float(np.dot(ks, weights))


def _gnp_adjacency(n: int, p: float, gen: np.random.Generator) -> np.ndarray:
    a = np.triu(gen.random((n, n)) < p, 1)
    return a | a.T


def _subsample_edge_count(adj: np.ndarray, m: int, gen: np.random.Generator,
                          total: int | None = None) -> int:
    """Edge count of the induced subgraph on m uniformly chosen nodes.

    When the graph's total edge count is supplied (amortized over repeated
    subsamples of one graph) and the subsample covers more than half the
    nodes, counting goes through the smaller complement:
    edges(S) = total - sum(deg over comp) + edges(comp).
    """
    n = adj.shape[0]
    idx = gen.choice(n, size=m, replace=False)
    if total is None or 2 * m <= n:
        return int(adj[np.ix_(idx, idx)].sum()) // 2
    mask = np.ones(n, dtype=bool)
    mask[idx] = False
    comp = np.flatnonzero(mask)
    within_comp = int(adj[np.ix_(comp, comp)].sum()) // 2
    touching = int(adj[comp].sum()) - within_comp
    return total - touching


def _ks_sorted(a: np.ndarray, b: np.ndarray) -> float:
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.abs(fa - fb).max())


def _map_indexed(count: int, task, threads: int) -> list:
    if threads <= 1:
        return [task(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, range(count)))


def estimate_expected_ks_mc(scenario: AnalyticScenario, outer_draws: int,
                            inner_subsamples: int, fc_draws: int, rng: RngStream,
                            threads: int = 1) -> tuple[float, float | None]:
    """Monte Carlo counterpart of expected_ks; returns (mean, standard error).

    The independent-draw reference is built once from fc_draws fresh draws
    with one subsample each; every outer draw then contributes the KS
    distance between its own inner_subsamples subsample edge counts and the
    reference. The standard error is over outer draws (None when there is
    only one). Replicates are keyed by per-replicate streams, so the result
    is identical for any thread count.
    """
    if min(outer_draws, inner_subsamples, fc_draws) < 1:
        raise ValueError("all draw counts must be >= 1")
    n, p, m = scenario.n, scenario.p, scenario.m

    def fc_one(j: int) -> float:
        gen = rng.child(0, j).generator()
        return _subsample_edge_count(_gnp_adjacency(n, p, gen), m, gen)

    fc_values = np.array(_map_indexed(fc_draws, fc_one, threads), dtype=float)
    fc_values.sort()

    def outer_one(i: int) -> float:
        gen = rng.child(1, i).generator()
        adj = _gnp_adjacency(n, p, gen)
        total = int(adj.sum()) // 2
        f1 = np.array([_subsample_edge_count(adj, m, gen, total)
                       for _ in range(inner_subsamples)], dtype=float)
        f1.sort()
        return _ks_sorted(f1, fc_values)

    ks_values = np.array(_map_indexed(outer_draws, outer_one, threads), dtype=float)
    mean = float(ks_values.mean())
    if outer_draws == 1:
        return mean, None
    return mean, float(ks_values.std(ddof=1) / math.sqrt(outer_draws))


def weighted_er_moments(p: float) -> tuple[float, float]:
    """First two moments of a geometric dyad weight with P(W=w) = p^w (1-p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1); moments diverge at 1")
    first = p / (1.0 - p)
    second = (p + p ** 2) / (1.0 - p) ** 2
    return first, second


def table1_rows(n: int, p: float, alphas=TABLE1_ALPHAS, tail_eps: float = 1e-12,
                mc: tuple[int, int, int] | None = None, rng: RngStream | None = None,
                threads: int = 1) -> list[dict]:
    """Rows for the expected-KS table: analytic modes plus optional MC columns.

    mc, when given, is (outer_draws, inner_subsamples, fc_draws); the rng is
    then required, and each alpha gets its own child stream.
    """
    rows = []
    for idx, alpha in enumerate(alphas):
        scenario = AnalyticScenario(n, p, alpha)
        row = {
            "alpha": alpha,
            "naive": expected_ks(scenario, "naive", tail_eps),
            "improved": expected_ks(scenario, "improved", tail_eps),
            "empirical_estimate": None,
            "empirical_se": None,
        }
        if mc is not None:
            if rng is None:
                raise ValueError("Monte Carlo columns need an rng stream")
            est, se = estimate_expected_ks_mc(scenario, *mc, rng.child(idx),
                                              threads=threads)
            row["empirical_estimate"] = est
            row["empirical_se"] = se
        rows.append(row)
    return rows
