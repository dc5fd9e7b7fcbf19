"""Command-line surface: reproducible experiments driven by JSON configs.

Every command writes deterministic CSV/JSON artifacts plus a manifest with
content hashes under the output directory. Exit codes: 0 success, 2 config
error, 3 data error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analytic, inference, io
from .generators import RNG_ALGORITHM, ModelSpec, RngStream, draw
from .graph import DEFAULT_GOF_STATS, StatKind, largest_connected_component
from .inference import DEFAULT_FEATURE_SCHEMA
from .resampling import SubsamplePlan, ks_two_sample, resample_observed

__all__ = ["main", "ConfigError"]

THREADS_ENV = "NETRESAMPLE_THREADS"


class ConfigError(Exception):
    """Invalid run configuration."""


def _require(config: dict, key: str, kind=None):
    if key not in config:
        raise ConfigError(f"config missing required field {key!r}")
    value = config[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"config field {key!r} has wrong type "
                          f"(expected {getattr(kind, '__name__', kind)})")
    return value


def _check_known(config: dict, known: set[str], where: str = "config"):
    extra = set(config) - known
    if extra:
        raise ConfigError(f"unknown {where} fields: {sorted(extra)}")


def _parse_model(obj) -> ModelSpec:
    try:
        return ModelSpec.from_json(obj)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid model spec: {exc}") from exc


def _parse_models(config: dict, key: str = "models") -> list[ModelSpec]:
    raw = _require(config, key, list)
    if not raw:
        raise ConfigError(f"config field {key!r} must not be empty")
    return [_parse_model(obj) for obj in raw]


def _parse_stats(config: dict, key: str, default) -> list[StatKind]:
    if key not in config:
        return list(default)
    try:
        return [StatKind.parse(name) for name in config[key]]
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid statistic list: {exc}") from exc


def _parse_plan(obj, replicates: int) -> SubsamplePlan:
    if not isinstance(obj, dict):
        raise ConfigError("subsample must be an object with 'size' or 'fraction'")
    _check_known(obj, {"size", "fraction"}, "subsample")
    try:
        return SubsamplePlan(replicate_count=replicates,
                             subsample_size=obj.get("size"),
                             subsample_fraction=obj.get("fraction"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _master_seed(config: dict, override: int | None) -> int:
    if override is not None:
        return override
    if "master_seed" not in config:
        raise ConfigError("config needs 'master_seed' (or pass --seed)")
    seed = config["master_seed"]
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("'master_seed' must be a nonnegative integer")
    return seed


def _load_input(config: dict, key: str = "input"):
    path = _require(config, key, str)
    graph, labels, info = io.read_edge_list(path, config.get("self_loops", "drop"))
    return graph, labels, info


def _materialize_seeds(spec: ModelSpec) -> ModelSpec:
    """Load explicit seed graphs referenced by path."""
    seed = spec.seed
    if seed is None or seed.type != "explicit" or seed.graph is not None:
        return spec
    graph, _, _ = io.read_edge_list(seed.path, "drop")
    from dataclasses import replace
    return replace(spec, seed=seed.with_graph(graph))


def _write_distributions(out: Path, prefix: str, dists, extra: dict,
                         names: list[str]) -> None:
    for d in dists:
        name = f"{prefix}_{d.statistic.label}.csv"
        io.write_distribution_csv(d, out / name)
        io.write_json(io.distribution_sidecar(d, extra), out / (name + ".meta.json"))
        names.extend([name, name + ".meta.json"])


# ---------------------------------------------------------------- commands

def _cmd_generate(config: dict, out: Path, seed: int, threads: int) -> list[str]:
    _check_known(config, {"model", "count", "master_seed"})
    spec = _materialize_seeds(_parse_model(_require(config, "model", dict)))
    count = config.get("count", 1)
    if not isinstance(count, int) or count < 1:
        raise ConfigError("'count' must be a positive integer")
    stream = RngStream(seed)
    names = []
    for i in range(count):
        g = draw(spec, stream.child(i))
        name = f"graph_{i:04d}.edgelist"
        io.write_edge_list(g, out / name)
        names.append(name)
    return names


def _cmd_subsample(config: dict, out: Path, seed: int, threads: int) -> list[str]:
    _check_known(config, {"input", "self_loops", "subsample", "replicates",
                          "stats", "master_seed"})
    stats = _parse_stats(config, "stats", DEFAULT_GOF_STATS)
    plan = _parse_plan(_require(config, "subsample", dict),
                       _require(config, "replicates", int))
    graph, labels, info = _load_input(config)
    dists = resample_observed(graph, plan, stats, rng=RngStream(seed),
                              threads=threads)
    names: list[str] = []
    extra = {"input": config["input"], "read_info": info, "master_seed": seed}
    _write_distributions(out, "observed", dists, extra, names)
    io.write_json({"labels": labels}, out / "labels.json")
    names.append("labels.json")
    return names


def _maybe_lcc(graph, config):
    return largest_connected_component(graph) if config.get("lcc", False) else graph


def _cmd_gof(config: dict, out: Path, seed: int, threads: int) -> list[str]:
    _check_known(config, {"input", "self_loops", "lcc", "models", "subsample",
                          "observed_replicates", "model_replicates", "stats",
                          "kl_bins", "master_seed"})
    stats = _parse_stats(config, "stats", DEFAULT_GOF_STATS)
    sub = config.get("subsample", {"fraction": 0.3})
    plan_o = _parse_plan(sub, _require(config, "observed_replicates", int))
    plan_m = _parse_plan(sub, _require(config, "model_replicates", int))
    graph, _, info = _load_input(config)
    graph = _maybe_lcc(graph, config)
    specs = [_materialize_seeds(s) for s in _parse_models(config)]
    report = inference.goodness_of_fit(graph, specs, stats, plan_o, plan_m,
                                       rng=RngStream(seed), threads=threads,
                                       kl_bins=config.get("kl_bins", 20))
    names: list[str] = []
    extra = {"input": config["input"], "read_info": info, "master_seed": seed,
             "lcc": config.get("lcc", False)}
    _write_distributions(out, "observed", report.observed_distributions, extra, names)
    for label, dists in zip(report.candidate_labels, report.candidate_distributions):
        _write_distributions(out, label, dists, extra, names)
    io.write_json(report.to_json(), out / "gof_report.json")
    names.append("gof_report.json")
    return names


def _cmd_select(config: dict, out: Path, seed: int, threads: int) -> list[str]:
    _check_known(config, {"input", "self_loops", "lcc", "models", "subsample",
                          "observed_replicates", "model_replicates", "features",
                          "knn_k", "master_seed"})
    schema = _parse_stats(config, "features", DEFAULT_FEATURE_SCHEMA)
    sub = _require(config, "subsample", dict)
    plan_m = _parse_plan(sub, _require(config, "model_replicates", int))
    plan_o = _parse_plan(sub, _require(config, "observed_replicates", int))
    graph, _, _ = _load_input(config)
    graph = _maybe_lcc(graph, config)
    specs = [_materialize_seeds(s) for s in _parse_models(config)]
    stream = RngStream(seed)
    training = inference.build_training_set(specs, graph.node_count, plan_m,
                                            schema, rng=stream.child(0),
                                            threads=threads)
    classifier = inference.classifier_fit(training, k=config.get("knn_k", 25))
    report = inference.select_model(graph, specs, classifier, plan_o, schema,
                                    rng=stream.child(1), threads=threads)
    io.write_json(report.to_json(), out / "selection.json")
    return ["selection.json"]


def _cmd_compare(config: dict, out: Path, seed: int, threads: int) -> list[str]:
    _check_known(config, {"inputs", "self_loops", "lcc", "subsample",
                          "replicates", "stats", "kl_bins", "master_seed"})
    paths = _require(config, "inputs", list)
    if len(paths) != 2:
        raise ConfigError("'inputs' must list exactly two edge-list paths")
    stats = _parse_stats(config, "stats", DEFAULT_GOF_STATS)
    reps = _require(config, "replicates", int)
    sub = _require(config, "subsample", dict)
    plan = _parse_plan(sub, reps)
    graphs = []
    for path in paths:
        g, _, _ = io.read_edge_list(path, config.get("self_loops", "drop"))
        graphs.append(_maybe_lcc(g, config))
    report = inference.compare_networks(graphs[0], graphs[1], stats, plan, plan,
                                        rng=RngStream(seed), threads=threads,
                                        kl_bins=config.get("kl_bins", 20))
    names: list[str] = []
    extra = {"inputs": paths, "master_seed": seed}
    _write_distributions(out, "network_1", report.observed_distributions, extra, names)
    _write_distributions(out, "network_2", report.candidate_distributions[0],
                         extra, names)
    io.write_json(report.to_json(), out / "comparison.json")
    names.append("comparison.json")
    return names


def _fmt_cell(value) -> str:
    # repr is the shortest representation that round-trips the double
    return "NA" if value is None else repr(float(value))


def _cmd_table1(config: dict, out: Path, seed: int | None, threads: int) -> list[str]:
    _check_known(config, {"n", "p", "alphas", "tail_eps", "mc", "master_seed"})
    n = _require(config, "n", int)
    p = _require(config, "p", (int, float))
    alphas = config.get("alphas", list(analytic.TABLE1_ALPHAS))
    mc = None
    rng = None
    if "mc" in config:
        mc_cfg = config["mc"]
        _check_known(mc_cfg, {"outer", "inner", "fc"}, "mc")
        mc = (_require(mc_cfg, "outer", int), _require(mc_cfg, "inner", int),
              _require(mc_cfg, "fc", int))
        rng = RngStream(seed)
    rows = analytic.table1_rows(n, p, alphas, config.get("tail_eps", 1e-12),
                                mc=mc, rng=rng, threads=threads)
    lines = ["alpha,naive,improved,empirical_estimate,empirical_se"]
    for row in rows:
        lines.append(",".join([
            _fmt_cell(row["alpha"]), _fmt_cell(row["naive"]),
            _fmt_cell(row["improved"]), _fmt_cell(row["empirical_estimate"]),
            _fmt_cell(row["empirical_se"]),
        ]))
    (out / "table1.csv").write_text("\n".join(lines) + "\n")
    return ["table1.csv"]


def _cmd_stability(config: dict, out: Path, seed: int, threads: int) -> list[str]:
    _check_known(config, {"model", "seed_sizes", "replicates", "master_seed"})
    template = dict(_require(config, "model", dict))
    seed_sizes = _require(config, "seed_sizes", list)
    replicates = _require(config, "replicates", int)
    if replicates < 2:
        raise ConfigError("stability needs at least 2 replicates")
    names: list[str] = []
    summary = ["seed_size,mean_pairwise_degree_ks"]
    stream = RngStream(seed)
    for si, k in enumerate(seed_sizes):
        template_k = dict(template)
        template_k["seed"] = {"type": "complete", "k": k}
        spec = _parse_model(template_k)
        degree_seqs = []
        for r in range(replicates):
            g = draw(spec, stream.child(si, r))
            degrees = np.sort(g.degrees)
            degree_seqs.append(degrees)
            values, counts = np.unique(degrees, return_counts=True)
            name = f"degrees_seed{k}_rep{r:03d}.csv"
            lines = ["degree,count"] + [f"{int(v)},{int(c)}"
                                        for v, c in zip(values, counts)]
            (out / name).write_text("\n".join(lines) + "\n")
            names.append(name)
        pairs = [ks_two_sample(a, b)
                 for a, b in itertools.combinations(degree_seqs, 2)]
        summary.append(f"{k},{format(float(np.mean(pairs)), '.17g')}")
    (out / "stability_summary.csv").write_text("\n".join(summary) + "\n")
    names.append("stability_summary.csv")
    return names


_COMMANDS = {
    "generate": (_cmd_generate, True),
    "subsample": (_cmd_subsample, True),
    "gof": (_cmd_gof, True),
    "select": (_cmd_select, True),
    "compare": (_cmd_compare, True),
    "table1": (_cmd_table1, False),  # seed needed only with Monte Carlo columns
    "stability": (_cmd_stability, True),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netresample",
        description="Bootstrap subsampling toolkit for a single observed network")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config master seed")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default ${THREADS_ENV} or 1); "
                            "never affects results")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    try:
        config = json.loads(Path(args.config).read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return 2

    runner, needs_seed = _COMMANDS[args.command]
    out = Path(args.out)
    try:
        if needs_seed or "mc" in config or args.seed is not None \
                or "master_seed" in config:
            seed = _master_seed(config, args.seed)
        else:
            seed = None
        out.mkdir(parents=True, exist_ok=True)
        names = runner(config, out, seed, threads)
        io.write_manifest(out, args.command, config, seed, RNG_ALGORITHM, names)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except io.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
