"""Numerical Fatou coordinates for parabolic germs and skew products.

The package builds translation conjugacies for maps tangent to the identity:
one-variable germs z + a2 z^2 + ..., and two-variable skew products
(lambda(z), f(z, w)) fixing the origin with identity derivative. It reduces
them to normal form, transports them to the chart at infinity, computes
incoming/outgoing Fatou coordinates and the mixed-region conjugacies as
iteration limits, and measures the residual of every functional equation
those coordinates are supposed to satisfy.
"""

from .cli import RunConfig, cmd_basin_scan, cmd_coord, cmd_normalize, cmd_verify, main
from .engine import (
    CONVERGED,
    ESCAPED,
    MAX_ITER,
    ConvergenceConfig,
    FatouValue,
    GeneralConjugacy,
    abel_corrections,
    build_general_pipeline,
    conjugated_fiber_limit,
    dual_germ_1d,
    dual_step,
    eta_point,
    general_fatou,
    incoming_1d,
    incoming_1d_trace,
    incoming_2d_finite,
    incoming_2d_special,
    outgoing_1d,
    outgoing_1d_direct,
    outgoing_2d_finite,
    outgoing_2d_special,
    psi_a,
    psi_a_finite,
    psi_b,
    psi_b_finite,
)
from .errors import (
    ChainDomainError,
    ChartMismatch,
    DegenerateQuadratic,
    FatouError,
    NewtonDiverged,
    NonFiniteValue,
    NonvanishingConstant,
    NoValidRadius,
    NotNormalized,
    NotTangentToIdentity,
    OrderTooLargeForJet,
    ParseError,
    TooFewSamples,
    WrongForm,
)
from .expressions import ev, parse_expr, parse_map_file, to_text
from .germs import (
    INFINITY,
    ORIGIN,
    Germ1D,
    Point2,
    SkewGerm2D,
    fiber_limit_map,
    make_germ1d,
    make_skew_germ,
    to_infinity,
)
from .normal_form import (
    BranchedLog,
    ConjugacyChain,
    LogShearParams,
    normalize_quadratic,
    raise_order,
)
from .regions import ProductRegion, Sector, UNeighborhood, classify, make_regions
from .sampling import low_discrepancy, region_points, sector_points
from .series import (
    TruncatedSeries1,
    TruncatedSeries2,
    compose1,
    infinity_chart1,
    origin_chart1,
    reverse1,
    substitute2,
)
from .verify import (
    ResidualReport,
    abel_residuals,
    decay_exponent,
    direct_branch_check,
    duality_check,
    finite_n_identity_check,
    lambda_scaling_check,
    parametrization_residuals,
    render_reports,
    transport_check,
)

__all__ = [
    "CONVERGED",
    "ESCAPED",
    "MAX_ITER",
    "INFINITY",
    "ORIGIN",
    "BranchedLog",
    "ChainDomainError",
    "ChartMismatch",
    "ConjugacyChain",
    "ConvergenceConfig",
    "DegenerateQuadratic",
    "FatouError",
    "FatouValue",
    "GeneralConjugacy",
    "Germ1D",
    "LogShearParams",
    "NewtonDiverged",
    "NonFiniteValue",
    "NonvanishingConstant",
    "NoValidRadius",
    "NotNormalized",
    "NotTangentToIdentity",
    "OrderTooLargeForJet",
    "ParseError",
    "Point2",
    "ProductRegion",
    "ResidualReport",
    "RunConfig",
    "Sector",
    "SkewGerm2D",
    "TooFewSamples",
    "TruncatedSeries1",
    "TruncatedSeries2",
    "UNeighborhood",
    "WrongForm",
    "abel_corrections",
    "abel_residuals",
    "build_general_pipeline",
    "classify",
    "cmd_basin_scan",
    "cmd_coord",
    "cmd_normalize",
    "cmd_verify",
    "compose1",
    "conjugated_fiber_limit",
    "decay_exponent",
    "direct_branch_check",
    "dual_germ_1d",
    "dual_step",
    "duality_check",
    "eta_point",
    "ev",
    "fiber_limit_map",
    "finite_n_identity_check",
    "general_fatou",
    "incoming_1d",
    "incoming_1d_trace",
    "incoming_2d_finite",
    "incoming_2d_special",
    "infinity_chart1",
    "lambda_scaling_check",
    "low_discrepancy",
    "main",
    "make_germ1d",
    "make_regions",
    "make_skew_germ",
    "normalize_quadratic",
    "origin_chart1",
    "outgoing_1d",
    "outgoing_1d_direct",
    "outgoing_2d_finite",
    "outgoing_2d_special",
    "parametrization_residuals",
    "parse_expr",
    "parse_map_file",
    "psi_a",
    "psi_a_finite",
    "psi_b",
    "psi_b_finite",
    "raise_order",
    "region_points",
    "render_reports",
    "reverse1",
    "sector_points",
    "to_infinity",
    "to_text",
    "transport_check",
]

__version__ = "0.1.0"
