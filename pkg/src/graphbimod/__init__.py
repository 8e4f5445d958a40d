"""Finite-graph bimodules: index vectors, residue expectations, Fock projections, KMS states.

The package works with the edge module of a finite directed graph without
sources or sinks, carried as a bimodule over the function algebra on the
vertices.  Everything downstream (path spaces, index vectors, the residue
expectation, the quotient module with its Fock projection, and the gauge
dynamics with its equilibrium states) is computed from that one structure.
"""

from .algebra import AlgebraElement, VertexSet
from .bimodule import (
    AxiomReport,
    Edge,
    GraphBimodule,
    GraphStructureError,
    ModuleVector,
    beta_is_central,
    check_bimodule_axioms,
    index_element,
    left_action,
    left_inner,
    right_action,
    right_inner,
    smeb_check,
    watatani_phi,
)
from .fock import (
    FockVector,
    Path,
    beta_k,
    left_inner_fock,
    make_path,
    paths,
    phi_k,
    rank_one_phi,
    rank_one_tensor_matrix,
    right_inner_fock,
)
from .spectral import (
    PFData,
    PartialSumReport,
    ResidueReport,
    eta_tilde,
    pf_data,
    phi_s_partial,
    verify_rate_certificate,
)
from .cuntz_pimsner import (
    CommutatorReport,
    ConditionalExpectation,
    GramData,
    ProjectionData,
    ResidueConfig,
    ResidueUncertifiedError,
    SpanningElement,
    commutator_check,
    covariance_substitute,
    gauge_scaled,
    gram,
    phi_infty,
    projection_p,
    spanning_basis,
)
from .kms import (
    TraceFamily,
    TraceState,
    d_weight,
    gamma,
    gamma_minus_i,
    invariant_traces,
    kms_check,
    state_phi_d,
    tr_phi,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "AxiomReport",
    "CommutatorReport",
    "ConditionalExpectation",
    "Edge",
    "FockVector",
    "GramData",
    "GraphBimodule",
    "GraphStructureError",
    "ModuleVector",
    "PFData",
    "PartialSumReport",
    "Path",
    "ProjectionData",
    "ResidueConfig",
    "ResidueReport",
    "ResidueUncertifiedError",
    "SpanningElement",
    "TraceFamily",
    "TraceState",
    "VertexSet",
    "beta_is_central",
    "beta_k",
    "check_bimodule_axioms",
    "commutator_check",
    "covariance_substitute",
    "d_weight",
    "eta_tilde",
    "gamma",
    "gamma_minus_i",
    "gauge_scaled",
    "gram",
    "index_element",
    "invariant_traces",
    "kms_check",
    "left_action",
    "left_inner",
    "left_inner_fock",
    "make_path",
    "paths",
    "pf_data",
    "phi_infty",
    "phi_k",
    "phi_s_partial",
    "projection_p",
    "rank_one_phi",
    "rank_one_tensor_matrix",
    "right_action",
    "right_inner",
    "right_inner_fock",
    "smeb_check",
    "spanning_basis",
    "state_phi_d",
    "tr_phi",
    "verify_rate_certificate",
    "watatani_phi",
]
