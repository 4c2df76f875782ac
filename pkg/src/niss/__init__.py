"""Non-interactive source simulation over binary memoryless sources."""

from .bounds import (
    BoundReport,
    CorrelationVector,
    LambdaWeights,
    TargetSpec,
    base_point,
    binary_special_case,
    e_from_q,
    inner_polytope,
    inner_vertex,
    lambda_grid,
    outer_check,
    polytope_contains,
    q_from_e,
    theta_bounds,
)
from .errors import NissError
from .fourier import (
    BinarySourceSpec,
    FourierSpectrum,
    TruthTable,
    analyze,
    cross_correlation,
    disagreement_probability,
    indicator_lift,
    parity,
    pearson_rho,
    synthesize,
)
from .oracle import (
    achievable_scan,
    enumerate_functions,
    joint_distribution,
    sandwich_report,
    verify_correlation_formula,
)
from .ortho import GeneralSourceSpec, OrthonormalBasis, expand, gram_schmidt, reconstruct, subset_order
from .rounding import (
    RealFunctionFamily,
    generated_distribution_exact,
    generated_distribution_mc,
    preservation_check,
    probability_profile,
    round_sample,
    validate_family,
)

__version__ = "0.1.0"
