"""Edge-list ingestion, artifact serialization, and run manifests.

All writers are deterministic: stable orderings, fixed float formatting
(17 significant digits, which round-trips IEEE doubles), canonical JSON.
Rerunning a command with the same config and master seed must reproduce
every artifact byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .graph import Graph, build_graph
from .resampling import ResamplingDistribution

__all__ = ["DataError", "read_edge_list", "write_edge_list",
           "write_distribution_csv", "read_distribution_csv", "write_json",
           "sha256_file", "write_manifest"]


class DataError(Exception):
    """Unreadable or malformed input data."""


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def read_edge_list(path, self_loops: str = "drop"):
    """Parse a whitespace-separated edge list into a graph.

    Node labels may be arbitrary tokens; they map to dense indices in
    first-appearance order. Lines starting with '#' and blank lines are
    skipped. Returns (graph, labels, info) where labels[i] is the original
    token of node i and info counts dropped self-loops and duplicate edges.
    """
    if self_loops not in ("drop", "reject"):
        raise ValueError("self_loops must be 'drop' or 'reject'")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from exc
    index: dict[str, int] = {}
    edges = []
    dropped_loops = 0
    seen = set()
    duplicates = 0
    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected two tokens, got {len(parts)}")
        u_label, v_label = parts
        u = index.setdefault(u_label, len(index))
        v = index.setdefault(v_label, len(index))
        if u == v:
            if self_loops == "reject":
                raise DataError(f"{path}:{lineno}: self-loop on {u_label!r}")
            dropped_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        edges.append(key)
    labels = [None] * len(index)
    for label, i in index.items():
        labels[i] = label
    graph = build_graph(len(index), edges)
    info = {"dropped_self_loops": dropped_loops, "duplicate_edges": duplicates,
            "lines": lineno}
    return graph, labels, info


def write_edge_list(g: Graph, path) -> None:
    """One 'u v' line per edge with u < v, sorted; dense integer indices."""
    lines = [f"{u} {v}" for u, v in g.edges()]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def write_distribution_csv(d: ResamplingDistribution, path) -> None:
    """CSV with header 'replicate,<stat label>', NA for missing replicates."""
    rows = [f"replicate,{d.statistic.label}"]
    for i, value in enumerate(d.per_replicate):
        rows.append(f"{i},{'NA' if value is None else _fmt(value)}")
    Path(path).write_text("\n".join(rows) + "\n")


def read_distribution_csv(path):
    """Inverse of write_distribution_csv: (stat_label, per-replicate values)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("replicate,"):
        raise DataError(f"{path}: not a distribution CSV")
    label = lines[0].split(",", 1)[1]
    values = []
    for line in lines[1:]:
        _, raw = line.split(",", 1)
        values.append(None if raw == "NA" else float(raw))
    return label, values


def distribution_sidecar(d: ResamplingDistribution, extra: dict | None = None) -> dict:
    meta = {
        "statistic": d.statistic.label,
        "source": d.source.to_json(),
        "subsample_size": d.subsample_size,
        "replicate_count": d.replicate_count,
        "missing": d.missing_count,
    }
    if extra:
        meta.update(extra)
    return meta


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: dict, master_seed: int,
                   rng_algorithm: str, artifact_names: list[str]) -> Path:
    """Manifest listing every artifact with its content hash.

    Thread counts and absolute paths are deliberately excluded: the manifest
    must be identical whenever config and seed are.
    """
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "config": config,
        "master_seed": master_seed,
        "rng_algorithm": rng_algorithm,
        "artifacts": [
            {"path": name, "sha256": sha256_file(out_dir / name)}
            for name in sorted(artifact_names)
        ],
    }
    path = out_dir / "manifest.json"
    write_json(manifest, path)
    return path
