"""TU-format benchmark dataset parsing and Gram/distance matrix artifacts.

The TU layout (one directory per dataset, prefix DS):
  DS_A.txt               edge rows "i, j" with 1-based global node ids,
                         both directions listed for an undirected edge
  DS_graph_indicator.txt one graph id per global node, contiguous from 1
  DS_graph_labels.txt    one class label per graph (verbatim, may be negative)
  DS_node_labels.txt     optional, one categorical label per node
  DS_node_attributes.txt optional, comma-separated floats per node
  DS_edge_attributes.txt optional, one row per DS_A row; dimension-1
                         attributes become edge weights

Matrix artifacts are plain text (one row per line, space-separated decimals
at 17 significant digits so doubles round-trip bitwise) plus a flat JSON
metadata sidecar at <path>.meta.json.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import Dataset, Graph

SYMMETRY_TOL = 1e-9

META_KEYS = ("kind", "scheme", "h", "lambda", "ground_distance", "solver", "gamma",
             "dataset", "version")


class DatasetFormatError(ValueError):
    """A TU dataset directory or matrix file violates the expected layout."""


@dataclass
class MatrixArtifact:
    """An N x N kernel or distance matrix with run metadata."""

    values: np.ndarray
    kind: str  # "kernel" | "distance"
    scheme: str | None = None
    h: int | None = None
    lambda_: float | None = None
    ground_distance: str | None = None
    solver: str | None = None
    gamma: float | None = None
    dataset: str | None = None
    version: str | None = None

    def validate(self) -> None:
        v = self.values
        if self.kind not in ("kernel", "distance"):
            raise DatasetFormatError(f"unknown artifact kind: {self.kind!r}")
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DatasetFormatError(f"matrix is not square: shape {v.shape}")
        if v.size and np.abs(v - v.T).max() > SYMMETRY_TOL:
            raise DatasetFormatError(
                f"invariant violation: asymmetry {np.abs(v - v.T).max():.3e} "
                f"exceeds {SYMMETRY_TOL}"
            )
        if self.kind == "distance":
            if v.size and np.abs(np.diag(v)).max() > SYMMETRY_TOL:
                raise DatasetFormatError(
                    f"invariant violation: distance diagonal not zero "
                    f"(max {np.abs(np.diag(v)).max():.3e})"
                )
            if v.size and v.min() < 0:
                raise DatasetFormatError(
                    f"invariant violation: negative distance entry {v.min():.3e}"
                )

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "scheme": self.scheme,
            "h": self.h,
            "lambda": self.lambda_,
            "ground_distance": self.ground_distance,
            "solver": self.solver,
            "gamma": self.gamma,
            "dataset": self.dataset,
            "version": self.version,
        }


def _read_rows(path: Path) -> list[list[str]]:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([f.strip() for f in line.split(",")])
    return rows


def parse_tu(directory, name: str) -> Dataset:
    """Parse a TU-format dataset directory into a Dataset.

    Global node ids are rebased to 0 per graph; each undirected edge is
    stored once even though DS_A.txt lists both directions; dimension-1
    edge attributes become edge weights.
    """
    directory = Path(directory)
    paths = {key: directory / f"{name}_{key}.txt"
             for key in ("A", "graph_indicator", "graph_labels",
                         "node_labels", "node_attributes", "edge_attributes")}
    for key in ("A", "graph_indicator", "graph_labels"):
        if not paths[key].exists():
            raise DatasetFormatError(f"missing required file: {paths[key]}")

    indicator = [int(r[0]) for r in _read_rows(paths["graph_indicator"])]
    n_total = len(indicator)
    graph_ids = sorted(set(indicator))
    if graph_ids != list(range(1, len(graph_ids) + 1)):
        raise DatasetFormatError(
            f"{name}: graph ids in graph_indicator are not contiguous from 1"
        )
    n_graphs = len(graph_ids)

    graph_labels = [int(r[0]) for r in _read_rows(paths["graph_labels"])]
    if len(graph_labels) != n_graphs:
        raise DatasetFormatError(
            f"{name}: {len(graph_labels)} graph labels for {n_graphs} graphs"
        )

    # global -> (graph index, local index), nodes numbered in global order
    graph_of = np.asarray(indicator, dtype=np.int64) - 1
    local = np.zeros(n_total, dtype=np.int64)
    sizes = np.zeros(n_graphs, dtype=np.int64)
    for g_node in range(n_total):
        g = graph_of[g_node]
        local[g_node] = sizes[g]
        sizes[g] += 1

    edge_rows = _read_rows(paths["A"])
    edge_attr_rows = None
    if paths["edge_attributes"].exists():
        edge_attr_rows = _read_rows(paths["edge_attributes"])
        if len(edge_attr_rows) != len(edge_rows):
            raise DatasetFormatError(
                f"{name}: {len(edge_attr_rows)} edge attribute rows for "
                f"{len(edge_rows)} edge rows"
            )
        if edge_attr_rows and len(edge_attr_rows[0]) != 1:
            raise DatasetFormatError(
                f"{name}: edge attributes have dimension {len(edge_attr_rows[0])}; "
                "only dimension-1 attributes (edge weights) are supported"
            )

    seen: dict[tuple[int, int], float] = {}
    per_graph_edges: list[list[tuple[int, int]]] = [[] for _ in range(n_graphs)]
    per_graph_weights: list[list[float]] = [[] for _ in range(n_graphs)]
    for row_idx, row in enumerate(edge_rows):
        if len(row) != 2:
            raise DatasetFormatError(f"{name}: DS_A row {row_idx} has {len(row)} fields")
        a, b = int(row[0]) - 1, int(row[1]) - 1
        if not (0 <= a < n_total and 0 <= b < n_total):
            raise DatasetFormatError(f"{name}: DS_A row {row_idx} references node out of range")
        if graph_of[a] != graph_of[b]:
            raise DatasetFormatError(
                f"{name}: DS_A row {row_idx} crosses graphs "
                f"{graph_of[a] + 1} and {graph_of[b] + 1}"
            )
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        w = float(edge_attr_rows[row_idx][0]) if edge_attr_rows is not None else 1.0
        seen[key] = w
        g = int(graph_of[a])
        per_graph_edges[g].append((int(local[key[0]]), int(local[key[1]])))
        per_graph_weights[g].append(w)

    node_labels = None
    if paths["node_labels"].exists():
        rows = _read_rows(paths["node_labels"])
        if len(rows) != n_total:
            raise DatasetFormatError(
                f"{name}: {len(rows)} node label rows for {n_total} nodes"
            )
        node_labels = np.asarray([int(r[0]) for r in rows], dtype=np.int64)

    node_attrs = None
    if paths["node_attributes"].exists():
        rows = _read_rows(paths["node_attributes"])
        if len(rows) != n_total:
            raise DatasetFormatError(
                f"{name}: {len(rows)} node attribute rows for {n_total} nodes"
            )
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise DatasetFormatError(f"{name}: ragged node attribute rows (widths {sorted(widths)})")
        node_attrs = np.asarray([[float(x) for x in r] for r in rows], dtype=np.float64)

    graphs = []
    for g in range(n_graphs):
        members = np.where(graph_of == g)[0]
        graphs.append(Graph(
            node_count=int(sizes[g]),
            edges=np.asarray(per_graph_edges[g], dtype=np.int64).reshape(-1, 2),
            weights=np.asarray(per_graph_weights[g], dtype=np.float64),
            node_labels=node_labels[members] if node_labels is not None else None,
            node_attributes=node_attrs[members] if node_attrs is not None else None,
        ))
    return Dataset(graphs, graph_labels, name)


def write_matrix(artifact: MatrixArtifact, path) -> None:
    """Write artifact values as text rows plus a <path>.meta.json sidecar."""
    artifact.validate()
    path = Path(path)
    with open(path, "w") as fh:
        for row in artifact.values:
            fh.write(" ".join(f"{x:.17g}" for x in row))
            fh.write("\n")
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(artifact.metadata(), fh, indent=2)
        fh.write("\n")


def read_matrix(path) -> MatrixArtifact:
    """Inverse of write_matrix; validates artifact invariants."""
    path = Path(path)
    meta_path = Path(str(path) + ".meta.json")
    if not path.exists():
        raise DatasetFormatError(f"missing matrix file: {path}")
    if not meta_path.exists():
        raise DatasetFormatError(f"missing metadata sidecar: {meta_path}")
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split()])
    if not rows:
        raise DatasetFormatError(f"{path}: empty matrix file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DatasetFormatError(f"{path}: non-rectangular matrix (row widths {sorted(widths)})")
    values = np.asarray(rows, dtype=np.float64)
    with open(meta_path) as fh:
        meta = json.load(fh)
    artifact = MatrixArtifact(
        values=values,
        kind=meta.get("kind"),
        scheme=meta.get("scheme"),
        h=meta.get("h"),
        lambda_=meta.get("lambda"),
        ground_distance=meta.get("ground_distance"),
        solver=meta.get("solver"),
        gamma=meta.get("gamma"),
        dataset=meta.get("dataset"),
        version=meta.get("version"),
    )
    artifact.validate()
    return artifact
