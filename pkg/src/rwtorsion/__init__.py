"""Torsional rigidity, spectral bounds, and heat content on finite
random walk spaces, with reductions from metric graphs and convolution
kernels on grids."""

from .audit import AuditReport, AuditRow, audit
from .errors import (
    ComputationError,
    ConsistencyError,
    DomainTooLarge,
    DuplicateEdge,
    EmptyDomain,
    InputError,
    IsolatedVertex,
    KernelEscapesBox,
    NoConvergence,
    NonConvergence,
    NonpositiveMeasure,
    NonpositiveWeight,
    NotReversible,
    PaddingNegative,
    ParseError,
    RowNotStochastic,
    RWTorsionError,
    SingularSystem,
    StandingAssumptionViolated,
    StepCapExceeded,
    UnknownState,
    ZeroFunction,
    ZeroG,
)
from .geometry import (
    CheegerResult,
    cheeger,
    interaction,
    is_calibrable,
    mean_curvature,
    perimeter,
    total_variation,
)
from .graph import (
    WeightedGraph,
    from_weighted_graph,
    parse_domain_file,
    parse_graph_file,
    serialize_graph,
)
from .kernel import (
    GridSpec,
    RadialKernel,
    RescaledTorsion,
    build_grid_space,
    cells_inside,
    make_kernel,
    parse_kernel_spec,
    rescale_constant_1,
    rescale_constant_2,
    rescaled_torsion,
    symmetrize_set,
)
from .montecarlo import McEstimate, mc_stress, mc_torsion, sample_exit_time
from .quantum import (
    MetricGraph,
    QuantumTorsionResult,
    choose_c,
    metric_graph,
    parse_metric_graph_file,
    quantum_lower_bound,
    quantum_torsion,
    reduce_to_rws,
)
from .space import (
    Domain,
    FiniteRWSpace,
    ReversibilityReport,
    build_space,
    check_reversibility,
    is_m_connected,
    m_boundary,
    m_closure,
    make_domain,
    restrict,
    space_from_csr,
)
from .torsion import (
    GSequence,
    LambdaPEstimate,
    PTorsionResult,
    TorsionResult,
    eigenvalue_exact,
    eigenvalue_limit,
    exit_moment,
    g_sequence,
    heat_content,
    heat_content_integral,
    lambda_p_estimate,
    p_torsion,
    rayleigh_quotient,
    stress_solve,
    torsion_series,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "AuditRow",
    "CheegerResult",
    "ComputationError",
    "ConsistencyError",
    "Domain",
    "DomainTooLarge",
    "DuplicateEdge",
    "EmptyDomain",
    "FiniteRWSpace",
    "GSequence",
    "GridSpec",
    "InputError",
    "IsolatedVertex",
    "KernelEscapesBox",
    "LambdaPEstimate",
    "McEstimate",
    "MetricGraph",
    "NoConvergence",
    "NonConvergence",
    "NonpositiveMeasure",
    "NonpositiveWeight",
    "NotReversible",
    "PTorsionResult",
    "PaddingNegative",
    "ParseError",
    "QuantumTorsionResult",
    "RWTorsionError",
    "RadialKernel",
    "RescaledTorsion",
    "ReversibilityReport",
    "RowNotStochastic",
    "SingularSystem",
    "StandingAssumptionViolated",
    "StepCapExceeded",
    "TorsionResult",
    "UnknownState",
    "WeightedGraph",
    "ZeroFunction",
    "ZeroG",
    "audit",
    "build_grid_space",
    "build_space",
    "cells_inside",
    "check_reversibility",
    "cheeger",
    "choose_c",
    "eigenvalue_exact",
    "eigenvalue_limit",
    "exit_moment",
    "from_weighted_graph",
    "g_sequence",
    "heat_content",
    "heat_content_integral",
    "interaction",
    "is_calibrable",
    "is_m_connected",
    "lambda_p_estimate",
    "m_boundary",
    "m_closure",
    "make_domain",
    "make_kernel",
    "mc_stress",
    "mc_torsion",
    "mean_curvature",
    "metric_graph",
    "p_torsion",
    "parse_domain_file",
    "parse_graph_file",
    "parse_kernel_spec",
    "parse_metric_graph_file",
    "perimeter",
    "quantum_lower_bound",
    "quantum_torsion",
    "rayleigh_quotient",
    "reduce_to_rws",
    "rescale_constant_1",
    "rescale_constant_2",
    "rescaled_torsion",
    "restrict",
    "sample_exit_time",
    "serialize_graph",
    "space_from_csr",
    "stress_solve",
    "symmetrize_set",
    "torsion_series",
    "total_variation",
]
