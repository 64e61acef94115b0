"""Node-to-node ground distance matrices between two embedding matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import CATEGORICAL, CONTINUOUS, EmbeddingMatrix

HAMMING = "hamming"
EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class GroundDistanceMatrix:
    values: np.ndarray  # n x n', nonnegative
    kind: str
    h: int
    m: int


def hamming_matrix(a: EmbeddingMatrix, b: EmbeddingMatrix) -> GroundDistanceMatrix:
    """Normalized Hamming distances: fraction of the H+1 features that differ.

    Label ids are compared with exact equality; entry (i, j) is 0 iff the two
    rows coincide and 1 iff they share no feature.
    """
    if a.scheme != CATEGORICAL or b.scheme != CATEGORICAL:
        raise ValueError(f"hamming_matrix needs categorical embeddings, got {a.scheme}/{b.scheme}")
    if a.h != b.h:
        raise ValueError(f"iteration mismatch: H={a.h} vs H={b.h}")
    diff = a.values[:, None, :] != b.values[None, :, :]
    values = diff.mean(axis=2)
    return GroundDistanceMatrix(values, HAMMING, a.h, 1)


def squared_distance_matrix(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """All-pairs squared Euclidean distances via the squared-norm expansion.

    The BLAS shortcut cancels catastrophically for near-identical rows (the
    error is later amplified by the square root), so entries indistinguishable
    from rounding residue are recomputed from the row difference, which is
    exact at 0; negatives are clamped before use.
    """
    sqx = (x * x).sum(axis=1)
    sqy = (y * y).sum(axis=1)
    sq = sqx[:, None] + sqy[None, :] - 2.0 * (x @ y.T)
    suspect = sq < 1e-12 * (sqx[:, None] + sqy[None, :] + 1.0)
    if suspect.any():
        ii, jj = np.nonzero(suspect)
        d = x[ii] - y[jj]
        sq[ii, jj] = (d * d).sum(axis=1)
    return np.maximum(sq, 0.0)


def euclidean_matrix(a: EmbeddingMatrix, b: EmbeddingMatrix) -> GroundDistanceMatrix:
    """Euclidean distances between all row pairs of the concatenated features."""
    if a.scheme != CONTINUOUS or b.scheme != CONTINUOUS:
        raise ValueError(f"euclidean_matrix needs continuous embeddings, got {a.scheme}/{b.scheme}")
    if a.h != b.h or a.m != b.m:
        raise ValueError(f"dimension mismatch: (H={a.h}, m={a.m}) vs (H={b.h}, m={b.m})")
    values = np.sqrt(squared_distance_matrix(a.values, b.values))
    return GroundDistanceMatrix(values, EUCLIDEAN, a.h, a.m)


def hamming_prefix_stack(a: EmbeddingMatrix, b: EmbeddingMatrix) -> np.ndarray:
    """Hamming matrices for every prefix h <= H, stacked as (H+1, n, n').

    Layer h equals hamming_matrix on the first h+1 feature columns; used to
    derive all-h Wasserstein distances from one optimal plan.
    """
    if a.scheme != CATEGORICAL or b.scheme != CATEGORICAL or a.h != b.h:
        raise ValueError("hamming_prefix_stack needs categorical embeddings with equal H")
    diff = (a.values[:, None, :] != b.values[None, :, :]).astype(np.float64)
    cum = np.cumsum(diff, axis=2)
    denom = np.arange(1, a.h + 2, dtype=np.float64)
    return np.moveaxis(cum / denom, 2, 0)
