"""Dataset-level distance and Gram matrices.

gwd_matrix assembles the pairwise Wasserstein distances between per-graph
embedding sets; wwl_kernel exponentiates them into a Laplacian kernel;
the histogram/RBF baselines and the spectral definiteness checks used by
the experiments live here too.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .embedding import CATEGORICAL, CONTINUOUS, embed
from .graphs import Dataset, standardize_attributes
from .ground_distance import EUCLIDEAN, HAMMING, squared_distance_matrix
from .io import MatrixArtifact
from .ot import (
    EXACT,
    SINKHORN,
    SINKHORN_MAX_ITER,
    SINKHORN_TOL,
    wasserstein_exact,
    wasserstein_sinkhorn,
)


class KernelConfigError(ValueError):
    pass


@dataclass(frozen=True)
class KernelConfig:
    """Everything a Gram-matrix run needs: scheme, depth, solver, lambdas."""

    scheme: str
    h: int
    solver: str = EXACT
    gamma: float | None = None
    lambdas: tuple[float, ...] = (1.0,)
    standardize: bool = False
    sinkhorn_tol: float = SINKHORN_TOL
    sinkhorn_max_iter: int = SINKHORN_MAX_ITER

    def __post_init__(self):
        if self.scheme not in (CATEGORICAL, CONTINUOUS):
            raise KernelConfigError(f"unknown scheme {self.scheme!r}")
        if self.h < 0:
            raise KernelConfigError(f"H must be >= 0, got {self.h}")
        if self.solver not in (EXACT, SINKHORN):
            raise KernelConfigError(f"unknown solver {self.solver!r}")
        if self.solver == SINKHORN and (self.gamma is None or self.gamma <= 0):
            raise KernelConfigError("sinkhorn solver needs gamma > 0")
        if any(lam <= 0 for lam in self.lambdas):
            raise KernelConfigError(f"lambdas must be positive, got {self.lambdas}")
        object.__setattr__(self, "lambdas", tuple(float(l) for l in self.lambdas))

    @property
    def ground_distance(self) -> str:
        return HAMMING if self.scheme == CATEGORICAL else EUCLIDEAN


@dataclass
class StageTimings:
    embedding: float = 0.0
    ground_distance: float = 0.0
    ot: float = 0.0
    total: float = 0.0

    def as_dict(self) -> dict:
        return {"embedding": self.embedding, "ground_distance": self.ground_distance,
                "ot": self.ot, "total": self.total}


def _pair_list(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _solve_pair_all_h(values_a, values_b, config: KernelConfig, h_out: list[int]):
    """Distances for every h in h_out between two embedding matrices.

    Categorical/exact pairs are solved once at the deepest h; the optimal
    plan there is optimal for every shallower Hamming matrix as well (the
    refinement never merges distinct labels), so the rest are dot products.
    Returns (distances, distance_seconds, ot_seconds).
    """
    t0 = time.perf_counter()
    if config.scheme == CATEGORICAL:
        diff = (values_a[:, None, :] != values_b[None, :, :]).astype(np.float64)
        cum = np.cumsum(diff, axis=2)
        costs = [np.ascontiguousarray(cum[:, :, h] / (h + 1)) for h in h_out]
    else:
        m = values_a.shape[1] // (config.h + 1)
        sq_blocks = []
        for h in range(config.h + 1):
            xa = values_a[:, h * m:(h + 1) * m]
            xb = values_b[:, h * m:(h + 1) * m]
            sq_blocks.append(squared_distance_matrix(xa, xb))
        cum = np.cumsum(np.stack(sq_blocks), axis=0)
        costs = [np.sqrt(cum[h]) for h in h_out]
    t1 = time.perf_counter()

    distances = np.empty(len(h_out))
    if config.solver == SINKHORN:
        for k, cost in enumerate(costs):
            distances[k] = wasserstein_sinkhorn(
                cost, config.gamma, config.sinkhorn_tol, config.sinkhorn_max_iter,
                return_plan=False,
            ).distance
    elif config.scheme == CATEGORICAL:
        # one exact solve at the deepest h covers all shallower ones
        deepest = wasserstein_exact(costs[-1])
        plan = deepest.plan.values
        for k in range(len(h_out) - 1):
            distances[k] = float((plan * costs[k]).sum())
        distances[-1] = deepest.distance
    else:
        for k, cost in enumerate(costs):
            distances[k] = wasserstein_exact(cost, return_plan=False).distance
    t2 = time.perf_counter()
    return distances, t1 - t0, t2 - t1


def _assemble_gwd(dataset: Dataset, config: KernelConfig, threads: int | None,
                  all_h: bool) -> tuple[list[MatrixArtifact], StageTimings]:
    timings = StageTimings()
    start = time.perf_counter()
    if config.standardize:
        dataset = standardize_attributes(dataset)
    embeddings = embed(dataset, config.scheme, config.h)
    timings.embedding = time.perf_counter() - start

    n = len(dataset)
    h_out = list(range(config.h + 1)) if all_h else [config.h]
    matrices = [np.zeros((n, n)) for _ in h_out]
    pairs = _pair_list(n)

    def run(pair):
        i, j = pair
        d, t_dist, t_ot = _solve_pair_all_h(
            embeddings[i].values, embeddings[j].values, config, h_out)
        for k in range(len(h_out)):
            matrices[k][i, j] = d[k]
            matrices[k][j, i] = d[k]
        return t_dist, t_ot

    threads = threads or 1
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for t_dist, t_ot in pool.map(run, pairs, chunksize=64):
                timings.ground_distance += t_dist
                timings.ot += t_ot
    else:
        for pair in pairs:
            t_dist, t_ot = run(pair)
            timings.ground_distance += t_dist
            timings.ot += t_ot
    timings.total = time.perf_counter() - start

    artifacts = []
    for k, h in enumerate(h_out):
        artifacts.append(MatrixArtifact(
            values=matrices[k],
            kind="distance",
            scheme=config.scheme,
            h=h,
            ground_distance=config.ground_distance,
            solver=config.solver,
            gamma=config.gamma if config.solver == SINKHORN else None,
            dataset=dataset.name,
            version=__version__,
        ))
    return artifacts, timings


def gwd_matrix(dataset: Dataset, config: KernelConfig,
               threads: int | None = None) -> MatrixArtifact:
    """Pairwise graph Wasserstein distances at iteration config.h.

    Symmetric with a zero diagonal; only the upper triangle is solved.
    """
    artifacts, _ = _assemble_gwd(dataset, config, threads, all_h=False)
    return artifacts[0]


def gwd_matrix_all_h(dataset: Dataset, config: KernelConfig,
                     threads: int | None = None) -> list[MatrixArtifact]:
    """One distance artifact per h in 0..config.h from a single sweep."""
    artifacts, _ = _assemble_gwd(dataset, config, threads, all_h=True)
    return artifacts


def wwl_kernel(distance: MatrixArtifact, lam: float) -> MatrixArtifact:
    """Laplacian kernel K = exp(-lambda * D) of a distance artifact."""
    if lam <= 0:
        raise KernelConfigError(f"lambda must be positive, got {lam}")
    if distance.kind != "distance":
        raise KernelConfigError(f"kind mismatch: expected a distance artifact, got {distance.kind}")
    values = np.exp(-lam * distance.values)
    return MatrixArtifact(
        values=values,
        kind="kernel",
        scheme=distance.scheme,
        h=distance.h,
        lambda_=float(lam),
        ground_distance=distance.ground_distance,
        solver=distance.solver,
        gamma=distance.gamma,
        dataset=distance.dataset,
        version=distance.version or __version__,
    )


def _require_labels(dataset: Dataset):
    for i, g in enumerate(dataset.graphs):
        if g.node_labels is None:
            raise KernelConfigError(f"graph {i} of {dataset.name!r} has no node labels")


def vertex_histogram_kernel(dataset: Dataset) -> MatrixArtifact:
    """Dot products of node-label count histograms over the shared alphabet."""
    _require_labels(dataset)
    alphabet = sorted({int(l) for g in dataset.graphs for l in g.node_labels})
    index = {l: k for k, l in enumerate(alphabet)}
    hist = np.zeros((len(dataset), len(alphabet)))
    for gi, g in enumerate(dataset.graphs):
        for l in g.node_labels:
            hist[gi, index[int(l)]] += 1
    return MatrixArtifact(values=hist @ hist.T, kind="kernel", scheme=CATEGORICAL,
                          dataset=dataset.name, version=__version__)


def edge_histogram_kernel(dataset: Dataset) -> MatrixArtifact:
    """Dot products of histograms over sorted endpoint-label pairs."""
    _require_labels(dataset)
    pair_keys = sorted({
        (min(int(g.node_labels[u]), int(g.node_labels[v])),
         max(int(g.node_labels[u]), int(g.node_labels[v])))
        for g in dataset.graphs for u, v in g.edges
    })
    index = {key: k for k, key in enumerate(pair_keys)}
    hist = np.zeros((len(dataset), max(len(pair_keys), 1)))
    for gi, g in enumerate(dataset.graphs):
        for u, v in g.edges:
            a, b = int(g.node_labels[u]), int(g.node_labels[v])
            hist[gi, index[(min(a, b), max(a, b))]] += 1
    return MatrixArtifact(values=hist @ hist.T, kind="kernel", scheme=CATEGORICAL,
                          dataset=dataset.name, version=__version__)


def vh_c_kernel(dataset: Dataset, h: int, gamma_rbf: float | None = None,
                standardize: bool = False) -> MatrixArtifact:
    """RBF kernel between summed node embeddings (continuous vertex histogram)."""
    if standardize:
        dataset = standardize_attributes(dataset)
    embeddings = embed(dataset, CONTINUOUS, h)
    sums = np.vstack([e.values.sum(axis=0) for e in embeddings])
    if gamma_rbf is None:
        gamma_rbf = 1.0 / sums.shape[1]  # 1 over the concatenated dimension
    values = np.exp(-gamma_rbf * squared_distance_matrix(sums, sums))
    return MatrixArtifact(values=values, kind="kernel", scheme=CONTINUOUS, h=h,
                          gamma=float(gamma_rbf), dataset=dataset.name, version=__version__)


def rbf_wl_kernel(dataset: Dataset, h: int, gamma_rbf: float | None = None,
                  standardize: bool = False) -> MatrixArtifact:
    """Sum of Gaussian kernel values over all node-embedding pairs."""
    if standardize:
        dataset = standardize_attributes(dataset)
    embeddings = embed(dataset, CONTINUOUS, h)
    if gamma_rbf is None:
        gamma_rbf = 1.0 / embeddings[0].values.shape[1]
    n = len(dataset)
    values = np.zeros((n, n))
    for i in range(n):
        xi = embeddings[i].values
        for j in range(i, n):
            k = float(np.exp(-gamma_rbf * squared_distance_matrix(xi, embeddings[j].values)).sum())
            values[i, j] = k
            values[j, i] = k
    return MatrixArtifact(values=values, kind="kernel", scheme=CONTINUOUS, h=h,
                          gamma=float(gamma_rbf), dataset=dataset.name, version=__version__)


EIGEN_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumReport:
    check: str  # "psd" | "cnd"
    passed: bool
    lambda_min: float
    lambda_max: float
    tol: float = EIGEN_TOL


def _matrix_of(k, expected_kind: str | None) -> np.ndarray:
    if isinstance(k, MatrixArtifact):
        if expected_kind is not None and k.kind != expected_kind:
            raise KernelConfigError(
                f"kind mismatch: expected a {expected_kind} artifact, got {k.kind}")
        return k.values
    return np.asarray(k, dtype=np.float64)


def psd_check(kernel, tol: float = EIGEN_TOL) -> SpectrumReport:
    """Positive-semidefiniteness via the full symmetric eigenspectrum.

    Passes iff lambda_min >= -tol * max(1, lambda_max).
    """
    values = _matrix_of(kernel, "kernel")
    if np.abs(values - values.T).max() > 1e-9:
        raise KernelConfigError(
            f"matrix asymmetry {np.abs(values - values.T).max():.3e} exceeds 1e-9")
    eig = np.linalg.eigvalsh((values + values.T) / 2.0)
    lo, hi = float(eig[0]), float(eig[-1])
    return SpectrumReport("psd", lo >= -tol * max(1.0, hi), lo, hi, tol)


def cnd_check(distance, tol: float = EIGEN_TOL) -> SpectrumReport:
    """Conditional negative definiteness of a distance matrix.

    Double-centers with J = I - (1/N) 11^T and requires -1/2 J D J to be
    positive semidefinite at the psd_check tolerance (the classical
    criterion for cnd functions restricted to sum-zero weights).
    """
    values = _matrix_of(distance, "distance")
    if np.abs(values - values.T).max() > 1e-9:
        raise KernelConfigError(
            f"matrix asymmetry {np.abs(values - values.T).max():.3e} exceeds 1e-9")
    if np.abs(np.diag(values)).max() > 1e-9:
        raise KernelConfigError("distance matrix diagonal is not zero")
    n = values.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    centered = -0.5 * (j @ values @ j)
    eig = np.linalg.eigvalsh((centered + centered.T) / 2.0)
    lo, hi = float(eig[0]), float(eig[-1])
    return SpectrumReport("cnd", lo >= -tol * max(1.0, hi), lo, hi, tol)
