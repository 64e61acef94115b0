"""Wasserstein Weisfeiler-Lehman graph kernels."""

__version__ = "0.1.0"

from .graphs import (
    Dataset,
    Graph,
    GraphValidationError,
    degree_as_attribute,
    degree_as_label,
    erdos_renyi,
    permute,
    perturb_edges,
    standardize_attributes,
    validate,
)
from .io import DatasetFormatError, MatrixArtifact, parse_tu, read_matrix, write_matrix
from .embedding import (
    CATEGORICAL,
    CONTINUOUS,
    EmbeddingMatrix,
    EmbeddingSchemeError,
    LabelDictionary,
    embed,
    propagate_continuous,
    wl_refine_categorical,
)
from .ground_distance import (
    EUCLIDEAN,
    HAMMING,
    GroundDistanceMatrix,
    euclidean_matrix,
    hamming_matrix,
)
from .ot import (
    EXACT,
    SINKHORN,
    LemmaReport,
    OtgError,
    OtResult,
    TransportPlan,
    verify_lemma_optimality,
    wasserstein_bruteforce,
    wasserstein_exact,
    wasserstein_sinkhorn,
)
from .kernels import (
    KernelConfig,
    KernelConfigError,
    SpectrumReport,
    cnd_check,
    edge_histogram_kernel,
    gwd_matrix,
    gwd_matrix_all_h,
    psd_check,
    rbf_wl_kernel,
    vertex_histogram_kernel,
    vh_c_kernel,
    wwl_kernel,
)

__all__ = [
    "__version__",
    "Dataset", "Graph", "GraphValidationError", "degree_as_attribute",
    "degree_as_label", "erdos_renyi", "permute", "perturb_edges",
    "standardize_attributes", "validate",
    "DatasetFormatError", "MatrixArtifact", "parse_tu", "read_matrix", "write_matrix",
    "CATEGORICAL", "CONTINUOUS", "EmbeddingMatrix", "EmbeddingSchemeError",
    "LabelDictionary", "embed", "propagate_continuous", "wl_refine_categorical",
    "EUCLIDEAN", "HAMMING", "GroundDistanceMatrix", "euclidean_matrix", "hamming_matrix",
    "EXACT", "SINKHORN", "LemmaReport", "OtgError", "OtResult", "TransportPlan",
    "verify_lemma_optimality", "wasserstein_bruteforce", "wasserstein_exact",
    "wasserstein_sinkhorn",
    "KernelConfig", "KernelConfigError", "SpectrumReport", "cnd_check",
    "edge_histogram_kernel", "gwd_matrix", "gwd_matrix_all_h", "psd_check",
    "rbf_wl_kernel", "vertex_histogram_kernel", "vh_c_kernel", "wwl_kernel",
]
