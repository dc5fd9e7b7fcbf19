"""Subsampling, resampling distributions, and distance measures."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats as sps

from netresample.generators import ModelSpec, RngStream
from netresample.graph import (DEGREE_ASSORTATIVITY, EDGE_COUNT, TRIANGLE_COUNT,
                               build_graph)
from netresample.resampling import (SubsamplePlan, kl_divergence, ks_two_sample,
                                    resample_model_independent,
                                    resample_model_single_draw,
                                    resample_observed, summarize,
                                    uniform_subsample)


def k_complete(n):
    return build_graph(n, itertools.combinations(range(n), 2))


def brute_ks(a, b):
    """O(|a|*|b|) sup over all pooled points."""
    best = 0.0
    for x in list(a) + list(b):
        fa = sum(v <= x for v in a) / len(a)
        fb = sum(v <= x for v in b) / len(b)
        best = max(best, abs(fa - fb))
    return best


def discrete_one_sample_ks(values, cdf):
    """sup |ECDF - F| for an integer-lattice F; both right-continuous, so the
    sup is attained on the lattice (scipy.kstest assumes continuous F and
    overstates the deviation at atoms)."""
    values = np.sort(np.asarray(values, dtype=float))
    grid = np.arange(values.min() - 1, values.max() + 1)
    ecdf = np.searchsorted(values, grid, side="right") / values.size
    return float(np.abs(ecdf - cdf(grid)).max())


# ------------------------------------------------------------------- plans

def test_plan_validation():
    with pytest.raises(ValueError):
        SubsamplePlan(replicate_count=0, subsample_size=3)
    with pytest.raises(ValueError):
        SubsamplePlan(replicate_count=5)
    with pytest.raises(ValueError):
        SubsamplePlan(replicate_count=5, subsample_size=3, subsample_fraction=0.5)
    with pytest.raises(ValueError):
        SubsamplePlan(replicate_count=5, subsample_fraction=1.5)


def test_plan_fraction_resolution():
    plan = SubsamplePlan(replicate_count=1, subsample_fraction=0.3)
    assert plan.resolve_size(5106) == 1532
    assert plan.resolve_size(10) == 3
    with pytest.raises(ValueError):
        SubsamplePlan(replicate_count=1, subsample_size=20).resolve_size(10)


# --------------------------------------------------------------- subsample

def test_uniform_subsample_full_size():
    g = k_complete(6)
    sub = uniform_subsample(g, 6, RngStream(1).generator())
    assert sub.edge_count == g.edge_count


def test_uniform_subsample_single_node():
    sub = uniform_subsample(k_complete(6), 1, RngStream(1).generator())
    assert sub.node_count == 1
    assert sub.edge_count == 0


def test_uniform_subsample_range_check():
    with pytest.raises(ValueError):
        uniform_subsample(k_complete(3), 4, RngStream(1).generator())


def test_subsample_of_gnp_is_binomial():
    # induced subgraphs of fresh independent-dyad draws keep dyad prob p
    from netresample.generators import gen_gnp
    base = RngStream(99)
    counts = []
    m, p = 30, 0.2
    for i in range(600):
        gen = base.child(i).generator()
        counts.append(uniform_subsample(gen_gnp(200, p, gen), m, gen).edge_count)
    d = discrete_one_sample_ks(counts, sps.binom(m * (m - 1) // 2, p).cdf)
    assert d < 1.63 / math.sqrt(len(counts))  # 1% critical value


# ------------------------------------------------------- observed resample

def test_observed_full_subsample_is_point_mass():
    g = k_complete(10)
    plan = SubsamplePlan(replicate_count=100, subsample_size=10, seed=5)
    dists = resample_observed(g, plan, [TRIANGLE_COUNT, EDGE_COUNT])
    assert set(dists[0].values) == {120.0}
    assert set(dists[1].values) == {45.0}


def test_observed_single_replicate():
    g = k_complete(8)
    plan = SubsamplePlan(replicate_count=1, subsample_size=4, seed=5)
    (dist,) = resample_observed(g, plan, [EDGE_COUNT])
    assert dist.replicate_count == 1
    assert dist.values.size == 1


def test_observed_records_undefined_as_missing():
    # complete graphs are degree-regular, so assortativity is undefined
    g = k_complete(9)
    plan = SubsamplePlan(replicate_count=7, subsample_size=5, seed=1)
    (dist,) = resample_observed(g, plan, [DEGREE_ASSORTATIVITY])
    assert dist.missing_count == 7
    assert dist.values.size == 0


def test_observed_threads_do_not_change_results():
    from netresample.generators import gen_gnp
    g = gen_gnp(60, 0.2, RngStream(3))
    plan = SubsamplePlan(replicate_count=40, subsample_size=20, seed=8)
    stats = [EDGE_COUNT, TRIANGLE_COUNT, DEGREE_ASSORTATIVITY]
    serial = resample_observed(g, plan, stats, threads=1)
    threaded = resample_observed(g, plan, stats, threads=4)
    for a, b in zip(serial, threaded):
        assert a.per_replicate == b.per_replicate


# ---------------------------------------------------------- model resample

def test_model_independent_point_mass_cases():
    spec = ModelSpec("gnm", 12, m=9)
    plan = SubsamplePlan(replicate_count=5, subsample_size=12, seed=2)
    (dist,) = resample_model_independent(spec, 12, plan, [EDGE_COUNT])
    assert set(dist.values) == {9.0}


def test_model_independent_requires_matching_size():
    spec = ModelSpec("gnp", 12, p=0.5)
    plan = SubsamplePlan(replicate_count=2, subsample_size=4, seed=2)
    with pytest.raises(ValueError, match="target size"):
        resample_model_independent(spec, 13, plan, [EDGE_COUNT])


def test_model_independent_edge_counts_binomial():
    spec = ModelSpec("gnp", 150, p=0.2)
    plan = SubsamplePlan(replicate_count=800, subsample_size=40, seed=21)
    (dist,) = resample_model_independent(spec, 150, plan, [EDGE_COUNT])
    d = discrete_one_sample_ks(dist.values, sps.binom(40 * 39 // 2, 0.2).cdf)
    assert d < 1.63 / math.sqrt(800)


def test_model_independent_edge_counts_binomial_full_scale():
    # F_c edge counts at the reference configuration stay within the stated
    # 1% one-sample band of Binomial(C(100,2), 0.2)
    spec = ModelSpec("gnp", 400, p=0.2)
    plan = SubsamplePlan(replicate_count=5000, subsample_fraction=0.25, seed=47)
    (dist,) = resample_model_independent(spec, 400, plan, [EDGE_COUNT], threads=2)
    d = discrete_one_sample_ks(dist.values, sps.binom(100 * 99 // 2, 0.2).cdf)
    assert d < 1.63 / math.sqrt(5000)


def test_single_draw_ks_concentrates_near_prediction():
    # KS between the single-draw and independent-draw edge-count
    # distributions sits near the covariance-corrected expectation (~0.0999
    # at this size and fraction)
    spec = ModelSpec("gnp", 1000, p=0.2)
    base = RngStream(53)
    plan_fc = SubsamplePlan(replicate_count=400, subsample_fraction=0.3)
    (fc,) = resample_model_independent(spec, 1000, plan_fc, [EDGE_COUNT],
                                       rng=base.child(0), threads=2)
    plan_f1 = SubsamplePlan(replicate_count=400, subsample_fraction=0.3)
    distances = []
    for i in range(8):
        (f1,) = resample_model_single_draw(spec, 1000, plan_f1, [EDGE_COUNT],
                                           rng=base.child(1 + i), threads=2)
        distances.append(ks_two_sample(f1.values, fc.values))
    assert abs(np.mean(distances) - 0.0999) < 0.06


def test_single_draw_deterministic_and_point_mass():
    spec = ModelSpec("gnp", 40, p=0.3)
    plan = SubsamplePlan(replicate_count=30, subsample_size=15, seed=77)
    first = resample_model_single_draw(spec, 40, plan, [EDGE_COUNT])
    second = resample_model_single_draw(spec, 40, plan, [EDGE_COUNT])
    assert first[0].per_replicate == second[0].per_replicate
    full = SubsamplePlan(replicate_count=10, subsample_size=40, seed=77)
    (dist,) = resample_model_single_draw(spec, 40, full, [EDGE_COUNT])
    assert len(set(dist.values)) == 1


def test_shrunken_draw_becomes_missing_replicate():
    # heavy singleton removal can drop the draw below the subsample size
    spec = ModelSpec("dmr", 6, q_del=1.0, q_new=0.0,
                     seed=__import__("netresample").SeedSpec("complete", k=3),
                     remove_singletons=True)
    plan = SubsamplePlan(replicate_count=4, subsample_size=5, seed=4)
    (dist,) = resample_model_independent(spec, 6, plan, [EDGE_COUNT])
    assert dist.missing_count == 4


# ---------------------------------------------------------------------- ks

def test_ks_examples():
    assert ks_two_sample([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert ks_two_sample([0.0, 1.0], [5.0, 6.0]) == 1.0
    assert ks_two_sample([1.0, 2.0], [1.0, 3.0]) == pytest.approx(0.5)


def test_ks_symmetry_and_bounds():
    gen = np.random.default_rng(5)
    for _ in range(30):
        a = gen.normal(size=gen.integers(1, 50))
        b = gen.normal(loc=gen.uniform(-1, 1), size=gen.integers(1, 50))
        d = ks_two_sample(a, b)
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(ks_two_sample(b, a))


def test_ks_matches_brute_force():
    gen = np.random.default_rng(6)
    for _ in range(40):
        a = gen.integers(0, 8, size=gen.integers(1, 50)).astype(float)
        b = gen.integers(0, 8, size=gen.integers(1, 50)).astype(float)
        assert ks_two_sample(a, b) == pytest.approx(brute_ks(list(a), list(b)))


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


# ---------------------------------------------------------------------- kl

def test_kl_identical_samples():
    a = [1.0, 2.0, 3.0, 4.0]
    assert kl_divergence(a, a, 4) == pytest.approx(0.0, abs=1e-12)


def test_kl_nonnegative():
    gen = np.random.default_rng(7)
    for _ in range(30):
        a = gen.normal(size=40)
        b = gen.normal(loc=0.5, size=40)
        assert kl_divergence(a, b) >= 0.0


def test_kl_disjoint_two_bins():
    # counts (4,0) vs (0,4); add-one smoothing gives (5/6,1/6) vs (1/6,5/6)
    value = kl_divergence([0.0] * 4, [1.0] * 4, 2)
    expected = (5 / 6) * math.log(5) + (1 / 6) * math.log(1 / 5)
    assert value == pytest.approx(expected)


def test_kl_rejects_empty():
    with pytest.raises(ValueError):
        kl_divergence([], [1.0])


# ---------------------------------------------------------------- summary

def test_summarize_point_mass():
    g = k_complete(5)
    plan = SubsamplePlan(replicate_count=6, subsample_size=5, seed=3)
    (dist,) = resample_observed(g, plan, [EDGE_COUNT])
    s = summarize(dist)
    assert s.mean == 10.0
    assert s.variance == 0.0


def test_summarize_moments_and_quartiles():
    from netresample.resampling import ResamplingDistribution, Provenance
    d = ResamplingDistribution(EDGE_COUNT, [1.0, 2.0, 3.0], Provenance("observed"), 3)
    s = summarize(d)
    assert s.mean == 2.0
    assert s.variance == pytest.approx(1.0)
    d4 = ResamplingDistribution(EDGE_COUNT, [1.0, 2.0, 3.0, 4.0],
                                Provenance("observed"), 3)
    assert summarize(d4).quartiles == pytest.approx((1.75, 2.5, 3.25))


def test_summarize_counts_missing():
    from netresample.resampling import ResamplingDistribution, Provenance
    d = ResamplingDistribution(EDGE_COUNT, [1.0, None, 3.0], Provenance("observed"), 3)
    s = summarize(d)
    assert s.missing == 1
    assert s.count == 2
    all_missing = ResamplingDistribution(EDGE_COUNT, [None], Provenance("observed"), 3)
    with pytest.raises(ValueError):
        summarize(all_missing)
