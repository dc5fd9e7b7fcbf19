"""netresample: bootstrap subsampling toolkit for a single observed network.

Builds resampling distributions of network statistics from uniform node-wise
subsamples, compares them against candidate generative models for goodness of
fit and classifier-based model selection, and provides the closed-form
expected-KS analysis that guides the choice of subsample fraction.
"""

from .analytic import (AnalyticScenario, NormalApprox, OverlapDistribution,
                       cov_edge_counts, estimate_expected_ks_mc, expected_ks,
                       f1_normal, ks_two_normals, overlap_distribution,
                       product_moment_a, table1_rows, weighted_er_moments)
from .generators import (ModelSpec, RngStream, SeedSpec, draw, gen_dmc, gen_dmr,
                         gen_gnm, gen_gnp, gen_triadic, grow_gnp_from_seed,
                         make_seed)
from .graph import (AVG_LOCAL_CLUSTERING, DEGREE_ASSORTATIVITY, EDGE_COUNT,
                    TRIANGLE_COUNT, Graph, StatKind, avg_local_clustering,
                    build_graph, compute_stat, degree_assortativity,
                    degree_quantiles, degree_quartile, induced_subgraph,
                    largest_connected_component, triangle_count)
from .inference import (GofReport, KnnClassifier, SelectionReport, TrainingSet,
                        build_training_set, classifier_fit, compare_networks,
                        extract_features, goodness_of_fit, select_model)
from .resampling import (DistributionSummary, ResamplingDistribution,
                         SubsamplePlan, kl_divergence, ks_two_sample,
                         resample_model_independent, resample_model_single_draw,
                         resample_observed, summarize, uniform_subsample)

__version__ = "0.1.0"
