"""Model selection and goodness of fit built on the subsampling bootstrap.

Selection trains a classifier on per-subsample feature vectors from each
candidate model and applies it to subsamples of the observed network, with a
plurality rule deciding the winner and the winning share reported as
confidence. Goodness of fit compares the observed resampling distribution
against each candidate's, per statistic, with summary moments plus KS and
(both directions of) smoothed KL distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generators import ModelSpec, RngStream
from .graph import (AVG_LOCAL_CLUSTERING, TRIANGLE_COUNT, Graph, StatKind,
                    compute_stat, degree_quartile)
from .resampling import (DistributionSummary, ResamplingDistribution, SubsamplePlan,
                         kl_divergence, ks_two_sample, resample_model_independent,
                         resample_observed, summarize)

__all__ = ["DEFAULT_FEATURE_SCHEMA", "extract_features", "TrainingSet",
           "build_training_set", "KnnClassifier", "classifier_fit",
           "SelectionReport", "select_model", "GofReport", "goodness_of_fit",
           "compare_networks"]

DEFAULT_FEATURE_SCHEMA = (
    AVG_LOCAL_CLUSTERING,
    TRIANGLE_COUNT,
    degree_quartile(0.25),
    degree_quartile(0.5),
    degree_quartile(0.75),
)


def extract_features(g: Graph, schema=DEFAULT_FEATURE_SCHEMA) -> np.ndarray:
    """Feature vector in schema order; undefined statistics come back NaN."""
    out = np.empty(len(schema))
    for j, kind in enumerate(schema):
        value = compute_stat(g, kind)
        out[j] = np.nan if value is None else value
    return out


@dataclass(frozen=True)
class TrainingSet:
    """Per-subsample features with model labels and training-only scaling."""

    features: np.ndarray  # (rows, n_features), raw scale
    labels: np.ndarray    # (rows,), model index per row
    mean: np.ndarray
    std: np.ndarray
    class_count: int
    dropped: int          # replicates lost to undefined features

    @classmethod
    def from_rows(cls, features: np.ndarray, labels: np.ndarray, class_count: int,
                  dropped: int = 0) -> "TrainingSet":
        if features.shape[0] != labels.shape[0]:
            raise ValueError("features and labels disagree on row count")
        if features.shape[0] == 0:
            raise ValueError("empty training set")
        if labels.min() < 0 or labels.max() >= class_count:
            raise ValueError("label out of range")
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(features, labels, mean, std, class_count, dropped)

    def standardized(self) -> np.ndarray:
        return (self.features - self.mean) / self.std


def _feature_rows(dists: list[ResamplingDistribution]) -> tuple[np.ndarray, int]:
    """Stack per-replicate stat values into feature rows, dropping any
    replicate with an undefined entry."""
    count = dists[0].replicate_count
    rows = []
    dropped = 0
    for i in range(count):
        row = [d.per_replicate[i] for d in dists]
        if any(v is None for v in row):
            dropped += 1
        else:
            rows.append(row)
    if rows:
        return np.array(rows, dtype=float), dropped
    return np.empty((0, len(dists))), dropped


def build_training_set(specs, target_n: int, plan: SubsamplePlan,
                       schema=DEFAULT_FEATURE_SCHEMA, rng: RngStream | None = None,
                       threads: int = 1) -> TrainingSet:
    """Label one subsample of each of plan.replicate_count independent draws
    per candidate model with that model's index."""
    specs = list(specs)
    if len(specs) < 2:
        raise ValueError("need at least two candidate models")
    blocks = []
    labels = []
    dropped = 0
    for i, spec in enumerate(specs):
        stream = rng.child(i) if rng is not None else None
        dists = resample_model_independent(spec, target_n, plan, schema,
                                           rng=stream, threads=threads)
        rows, lost = _feature_rows(dists)
        dropped += lost
        blocks.append(rows)
        labels.append(np.full(rows.shape[0], i))
    features = np.vstack(blocks)
    return TrainingSet.from_rows(features, np.concatenate(labels), len(specs), dropped)


class KnnClassifier:
    """k-nearest-neighbor scores on z-standardized features.

    Scores are class frequencies among the k nearest training rows by
    Euclidean distance; standardization comes from the training set alone.
    Any object with the same ``classify`` contract can stand in for it.
    """

    def __init__(self, training: TrainingSet, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > training.features.shape[0]:
            raise ValueError("k exceeds the number of training rows")
        self.k = k
        self.class_count = training.class_count
        self.mean = training.mean
        self.std = training.std
        self._train = training.standardized()
        self._labels = training.labels

    def classify(self, features: np.ndarray) -> np.ndarray:
        """(rows, classes) score matrix for raw-scale feature rows."""
        x = np.atleast_2d(np.asarray(features, dtype=float))
        z = (x - self.mean) / self.std
        scores = np.empty((z.shape[0], self.class_count))
        for start in range(0, z.shape[0], 512):
            block = z[start:start + 512]
            d2 = ((block[:, None, :] - self._train[None, :, :]) ** 2).sum(axis=2)
            nearest = np.argpartition(d2, self.k - 1, axis=1)[:, :self.k]
            votes = self._labels[nearest]
            for c in range(self.class_count):
                scores[start:start + 512, c] = (votes == c).mean(axis=1)
        return scores


def classifier_fit(training: TrainingSet, k: int = 25) -> KnnClassifier:
    return KnnClassifier(training, k)


@dataclass(frozen=True)
class SelectionReport:
    """Plurality-rule outcome over observed-network subsamples."""

    per_model_proportion: tuple[float, ...]
    selected_model: int
    confidence: float
    tie: bool
    per_subsample_assignment: tuple[int, ...]  # -1 marks a dropped replicate
    dropped_replicates: int
    model_labels: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "models": list(self.model_labels),
            "per_model_proportion": list(self.per_model_proportion),
            "selected_model": self.selected_model,
            "confidence": self.confidence,
            "tie": self.tie,
            "per_subsample_assignment": list(self.per_subsample_assignment),
            "dropped_replicates": self.dropped_replicates,
        }


def _candidate_labels(specs) -> list[str]:
    labels = []
    for i, spec in enumerate(specs):
        labels.append(f"{spec.label()}_{i}")
    return labels


def select_model(g_o: Graph, specs, classifier, plan_o: SubsamplePlan,
                 schema=DEFAULT_FEATURE_SCHEMA, rng: RngStream | None = None,
                 threads: int = 1) -> SelectionReport:
    """Assign each observed subsample the argmax-score model (ties to the
    smallest index) and select by plurality; the winner's share is the
    confidence."""
    specs = list(specs)
    dists = resample_observed(g_o, plan_o, schema, rng=rng, threads=threads)
    count = plan_o.replicate_count
    assignment = np.full(count, -1)
    rows = []
    kept = []
    for i in range(count):
        row = [d.per_replicate[i] for d in dists]
        if not any(v is None for v in row):
            rows.append(row)
            kept.append(i)
    if not rows:
        raise ValueError("every subsample had undefined features")
    scores = classifier.classify(np.array(rows, dtype=float))
    assignment[kept] = np.argmax(scores, axis=1)
    counts = np.bincount(assignment[assignment >= 0], minlength=len(specs))
    proportions = counts / counts.sum()
    selected = int(np.argmax(proportions))
    tie = int((proportions == proportions[selected]).sum()) > 1
    return SelectionReport(
        per_model_proportion=tuple(float(v) for v in proportions),
        selected_model=selected,
        confidence=float(proportions[selected]),
        tie=tie,
        per_subsample_assignment=tuple(int(v) for v in assignment),
        dropped_replicates=count - len(kept),
        model_labels=tuple(_candidate_labels(specs)),
    )


@dataclass(frozen=True)
class StatComparison:
    """One statistic, one candidate: summaries and distances."""

    ks: float
    kl_pq: float | None
    kl_qp: float | None
    observed_summary: DistributionSummary | None
    model_summary: DistributionSummary | None

    def to_json(self) -> dict:
        return {
            "ks": self.ks,
            "kl_pq": self.kl_pq,
            "kl_qp": self.kl_qp,
            "observed_summary":
                self.observed_summary.to_json() if self.observed_summary else None,
            "model_summary":
                self.model_summary.to_json() if self.model_summary else None,
        }


@dataclass(frozen=True)
class GofReport:
    """Per-candidate, per-statistic comparison plus the raw distributions."""

    candidate_labels: tuple[str, ...]
    candidate_specs: tuple[ModelSpec | None, ...]
    statistics: tuple[StatKind, ...]
    subsample_size: int
    observed_distributions: tuple[ResamplingDistribution, ...]
    candidate_distributions: tuple[tuple[ResamplingDistribution, ...], ...]
    comparisons: dict  # (candidate_label, stat_label) -> StatComparison

    def to_json(self) -> dict:
        per_model = []
        for label, spec in zip(self.candidate_labels, self.candidate_specs):
            per_stat = {
                stat.label: self.comparisons[label, stat.label].to_json()
                for stat in self.statistics
            }
            per_model.append({
                "model": label,
                "spec": spec.to_json() if spec is not None else None,
                "per_stat": per_stat,
            })
        return {
            "statistics": [stat.label for stat in self.statistics],
            "subsample_size": self.subsample_size,
            "kl_convention": "kl_pq = KL(observed || candidate), kl_qp = reverse",
            "per_model": per_model,
        }


def _compare(obs: ResamplingDistribution, cand: ResamplingDistribution,
             kl_bins: int | None) -> StatComparison:
    a = obs.values
    b = cand.values
    if a.size == 0 or b.size == 0:
        # an all-missing side is reported, not fatal
        return StatComparison(
            ks=float("nan"), kl_pq=None, kl_qp=None,
            observed_summary=summarize(obs) if a.size else None,
            model_summary=summarize(cand) if b.size else None)
    kl_pq = kl_qp = None
    if kl_bins is not None:
        kl_pq = kl_divergence(a, b, kl_bins)
        kl_qp = kl_divergence(b, a, kl_bins)
    return StatComparison(ks=ks_two_sample(a, b), kl_pq=kl_pq, kl_qp=kl_qp,
                          observed_summary=summarize(obs),
                          model_summary=summarize(cand))


def _build_report(labels, specs, stats, m, observed, candidate_dists,
                  kl_bins) -> GofReport:
    comparisons = {}
    for label, dists in zip(labels, candidate_dists):
        for obs, cand in zip(observed, dists):
            comparisons[label, obs.statistic.label] = _compare(obs, cand, kl_bins)
    return GofReport(
        candidate_labels=tuple(labels),
        candidate_specs=tuple(specs),
        statistics=tuple(d.statistic for d in observed),
        subsample_size=m,
        observed_distributions=tuple(observed),
        candidate_distributions=tuple(tuple(d) for d in candidate_dists),
        comparisons=comparisons,
    )


def goodness_of_fit(g_o: Graph, specs, stats, plan_o: SubsamplePlan,
                    plan_m: SubsamplePlan, rng: RngStream | None = None,
                    threads: int = 1, kl_bins: int | None = 20) -> GofReport:
    """Observed resampling distribution against each candidate model's.

    Observed and model subsamples must resolve to the same node count, so
    both sides carry the same amount of missingness.
    """
    specs = list(specs)
    stats = list(stats)
    m_o = plan_o.resolve_size(g_o.node_count)
    m_m = plan_m.resolve_size(g_o.node_count)
    if m_o != m_m:
        raise ValueError(f"observed/model subsample sizes differ ({m_o} vs {m_m})")
    obs_rng = rng.child(0) if rng is not None else None
    observed = resample_observed(g_o, plan_o, stats, rng=obs_rng, threads=threads)
    candidate_dists = []
    for i, spec in enumerate(specs):
        stream = rng.child(1 + i) if rng is not None else None
        candidate_dists.append(resample_model_independent(
            spec, g_o.node_count, plan_m, stats, rng=stream, threads=threads))
    labels = _candidate_labels(specs)
    return _build_report(labels, specs, stats, m_o, observed, candidate_dists, kl_bins)


def compare_networks(g1: Graph, g2: Graph, stats, plan1: SubsamplePlan,
                     plan2: SubsamplePlan, rng: RngStream | None = None,
                     threads: int = 1, kl_bins: int | None = 20) -> GofReport:
    """Two observed networks compared through their resampling distributions;
    subsample node counts must match."""
    stats = list(stats)
    m1 = plan1.resolve_size(g1.node_count)
    m2 = plan2.resolve_size(g2.node_count)
    if m1 != m2:
        raise ValueError(f"subsample sizes differ ({m1} vs {m2})")
    rng1 = rng.child(0) if rng is not None else None
    rng2 = rng.child(1) if rng is not None else None
    d1 = resample_observed(g1, plan1, stats, rng=rng1, threads=threads)
    d2 = resample_observed(g2, plan2, stats, rng=rng2, threads=threads)
    return _build_report(["network_2"], [None], stats, m1, d1, [d2], kl_bins)
