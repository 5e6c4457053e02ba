"""Numerical verification of projective inducibility for scaled Bergman
metrics on classical bounded symmetric domains and their Hartogs extensions."""

from .calabi import (
    CalabiMatrix,
    GradingError,
    Verdict,
    bergman_diastasis_series,
    calabi_matrix,
    extract_immersion,
    graded_blocks,
    immersion_reconstruction_error,
    normalization_check,
    psd_verdict,
    scan_lambdas,
)
from .cartan_hartogs import (
    CHDomain,
    StencilError,
    ch_block_assembly,
    ch_contains,
    ch_direct_series,
    ch_potential_eval,
    ch_projectively_induced,
    ch_sample,
    ch_truncated_verdict,
    einstein_residual,
    mu_einstein,
    parse_ch_spec,
    thm1_threshold,
)
from .domains import (
    CatalogInconsistencyError,
    DomainModel,
    WallachSet,
    catalog,
    contains,
    generic_norm_eval,
    parse_domain,
    sample,
    sample_points,
    validate_catalog,
    wallach_contains,
    wallach_set,
)
from .gram import (
    BranchError,
    GramReport,
    SearchResult,
    gram_matrix,
    gram_report,
    replay_witness,
    search_violation,
    witness_payload,
)
from .multiindex import Basis, MultiIndex, basis, enumerate_indices, index_sum
from .series import HermitianSeries

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "BranchError",
    "CHDomain",
    "CalabiMatrix",
    "CatalogInconsistencyError",
    "DomainModel",
    "GradingError",
    "GramReport",
    "HermitianSeries",
    "MultiIndex",
    "SearchResult",
    "StencilError",
    "Verdict",
    "WallachSet",
    "basis",
    "bergman_diastasis_series",
    "calabi_matrix",
    "catalog",
    "ch_block_assembly",
    "ch_contains",
    "ch_direct_series",
    "ch_potential_eval",
    "ch_projectively_induced",
    "ch_sample",
    "ch_truncated_verdict",
    "contains",
    "einstein_residual",
    "enumerate_indices",
    "extract_immersion",
    "generic_norm_eval",
    "graded_blocks",
    "gram_matrix",
    "gram_report",
    "immersion_reconstruction_error",
    "index_sum",
    "mu_einstein",
    "normalization_check",
    "parse_ch_spec",
    "parse_domain",
    "psd_verdict",
    "replay_witness",
    "sample",
    "sample_points",
    "scan_lambdas",
    "search_violation",
    "thm1_threshold",
    "validate_catalog",
    "wallach_contains",
    "wallach_set",
    "witness_payload",
]
