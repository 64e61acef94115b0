"""Node embedding schemes: categorical WL refinement and continuous propagation.

Both schemes produce one matrix per graph whose columns concatenate the
iteration-0..H features, so a graph with m-dimensional node features embeds
into n x (m * (H + 1)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Dataset, Graph

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


class EmbeddingSchemeError(ValueError):
    """Requested scheme is incompatible with the available node data."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Per-graph node embeddings, iteration 0 block first.

    Categorical label ids are stored exactly in the float matrix (they stay
    far below 2**53), so equality comparisons on them are exact.
    """

    values: np.ndarray  # n x (m * (H + 1))
    scheme: str
    h: int
    m: int

    @property
    def node_count(self) -> int:
        return self.values.shape[0]

    def block(self, h: int) -> np.ndarray:
        """Feature block of iteration h (n x m view)."""
        if not 0 <= h <= self.h:
            raise ValueError(f"iteration {h} outside 0..{self.h}")
        return self.values[:, h * self.m:(h + 1) * self.m]


class LabelDictionary:
    """Perfect-hash label compression shared across all graphs of a run.

    Maps raw initial labels and (own label, sorted neighbor labels) keys to
    consecutive fresh ids; injective by construction. Refinement ids start
    after the last initial id because initial labels are interned first.
    """

    def __init__(self):
        self._map: dict = {}
        self.next_id = 0

    def intern(self, key) -> int:
        fresh = self._map.get(key)
        if fresh is None:
            fresh = self.next_id
            self._map[key] = fresh
            self.next_id += 1
        return fresh

    def __len__(self) -> int:
        return len(self._map)


def wl_refine_categorical(
    dataset: Dataset, h_iterations: int, dictionary: LabelDictionary | None = None
) -> list[EmbeddingMatrix]:
    """WL labelling scheme over a whole dataset with one shared dictionary.

    Iteration 0 remaps the raw labels; iteration h+1 assigns a fresh id per
    distinct (own label, ascending neighbor labels) pair, so two nodes share
    a label at h+1 iff their labels and neighbor label multisets coincide at
    h. Graphs are processed ascending, nodes ascending, which makes the id
    assignment deterministic.
    """
    if h_iterations < 0:
        raise EmbeddingSchemeError(f"H must be >= 0, got {h_iterations}")
    for i, g in enumerate(dataset.graphs):
        if g.node_labels is None:
            raise EmbeddingSchemeError(
                f"graph {i} of dataset {dataset.name!r} has no node labels; "
                "categorical scheme requires them"
            )
    dictionary = dictionary if dictionary is not None else LabelDictionary()

    current: list[np.ndarray] = []
    for g in dataset.graphs:
        current.append(np.asarray([dictionary.intern(int(l)) for l in g.node_labels],
                                  dtype=np.int64))
    iterations = [current]
    neighbors = [g.neighbor_lists() for g in dataset.graphs]
    for _ in range(h_iterations):
        prev = iterations[-1]
        nxt = []
        for gi, g in enumerate(dataset.graphs):
            labels = prev[gi]
            new_labels = np.empty(g.node_count, dtype=np.int64)
            for v in range(g.node_count):
                key = (int(labels[v]), tuple(sorted(int(labels[u]) for u in neighbors[gi][v])))
                new_labels[v] = dictionary.intern(key)
            nxt.append(new_labels)
        iterations.append(nxt)

    out = []
    for gi in range(len(dataset.graphs)):
        values = np.column_stack([iterations[h][gi] for h in range(h_iterations + 1)])
        out.append(EmbeddingMatrix(values.astype(np.float64), CATEGORICAL, h_iterations, 1))
    return out


def propagate_continuous(graph: Graph, h_iterations: int) -> EmbeddingMatrix:
    """Continuous attribute propagation with weighted neighborhood averages.

    One step maps a(v) to (a(v) + mean-of-weighted-neighbor-values) / 2,
    where the mean divides by the neighbor count deg(v); isolated nodes keep
    their value unchanged. Missing edge weights default to 1.
    """
    if h_iterations < 0:
        raise EmbeddingSchemeError(f"H must be >= 0, got {h_iterations}")
    if graph.node_attributes is None:
        raise EmbeddingSchemeError("graph has no node attributes; continuous scheme requires them")
    n = graph.node_count
    attrs = graph.node_attributes
    adj = np.zeros((n, n), dtype=np.float64)
    for (u, v), w in zip(graph.edges, graph.weights):
        if u == v:
            adj[u, u] += w
        else:
            adj[u, v] += w
            adj[v, u] += w
    deg = graph.degrees().astype(np.float64)
    inv_deg = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)

    blocks = [attrs]
    current = attrs
    for _ in range(h_iterations):
        neighbor_avg = inv_deg[:, None] * (adj @ current)
        nxt = 0.5 * (current + neighbor_avg)
        if n:
            isolated = deg == 0
            nxt[isolated] = current[isolated]
        blocks.append(nxt)
        current = nxt
    values = np.hstack(blocks)
    return EmbeddingMatrix(values, CONTINUOUS, h_iterations, attrs.shape[1])


def embed(dataset: Dataset, scheme: str, h_iterations: int) -> list[EmbeddingMatrix]:
    """Embed every graph of a dataset under the requested scheme."""
    if scheme == CATEGORICAL:
        return wl_refine_categorical(dataset, h_iterations)
    if scheme == CONTINUOUS:
        out = []
        for i, g in enumerate(dataset.graphs):
            if g.node_attributes is None:
                raise EmbeddingSchemeError(
                    f"graph {i} of dataset {dataset.name!r} has no node attributes; "
                    "continuous scheme requires them"
                )
            out.append(propagate_continuous(g, h_iterations))
        return out
    raise EmbeddingSchemeError(f"unknown scheme: {scheme!r}")
