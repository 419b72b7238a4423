"""Numerical laboratory for Ricci-Yamabe soliton geometry on coordinate charts.

The package represents metrics and potentials as closed-form component
functions, runs the full curvature pipeline through a nested forward-mode
differentiation core (exact to rounding up to fourth order), and checks
the defining soliton equations together with every identity they imply,
pointwise on catalog geometries and integrally on compact ones.
"""

from .errors import (
    AlphaZero,
    DegenerateBeta,
    DegenerateDenominator,
    GridTooCoarse,
    MetricSingular,
    NoConvergence,
    NotASoliton,
    NotCompact,
    NotSPD,
    NotSteady,
    OrderTooHigh,
    RysLabError,
    StencilOutOfDomain,
)
from .geometry import (
    ChartDomain,
    ChartPoint,
    MetricField,
    OneFormField,
    ScalarField,
    VectorField,
    partial_derivative,
    sample_points,
)
from .curvature import (
    CurvatureBundle,
    Sym2Tensor,
    christoffel,
    curvature_bundle,
    divergence_ricci,
    grad_norm_sq,
    grad_scalar_curvature,
    gradient,
    hessian,
    laplacian,
    laplacian_scalar_curvature,
    lie_derivative_metric,
    ricci,
    ricci_norm_sq,
    ricci_operator,
    scalar_curvature,
)
from .soliton import (
    SolitonClass,
    SolitonInstance,
    SolitonKind,
    SolitonParams,
    classify,
    concircular_conclusions,
    concircular_defect,
    defining_residual,
    eta_rys_residual,
    gen_grys_residual,
    grys_residual,
    rys_residual,
)

__version__ = "0.1.0"
