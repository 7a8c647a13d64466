"""Anisotropic 2D mesh adaptation from interpolation-error metric tensors."""

from .driver import (
    AdaptOptions,
    AdaptReport,
    convergence_study,
    layer_concentration,
    run_adaptation,
)
from .estimates import (
    h1_error_sq,
    l2_error_sq,
    linf_error_ds,
    lp_error_estimate,
    norm_equiv_constants,
    w1p_error_estimate,
)
from .mesh import (
    ElementGeometry,
    TriMesh,
    build_mesh,
    element_geometry,
    single_triangle_mesh,
    structured_rect_mesh,
)
from .metric import (
    MetricField,
    build_metric,
    metric_edge_length,
    metric_interpolate,
    metric_volume,
    monitor,
    monitor_hr,
    regularize_hessian,
)
from .norms import (
    ErrorBreakdown,
    element_linf_error_quadratic,
    interp_error_lp,
    interp_grad_error_lp,
)
from .problems import Problem, get_problem, hessian_analytic_field
from .recovery import recover_hessian
from .remesh import QualityReport, RemeshOptions, adapt_mesh, quality_report

__version__ = "0.1.0"

__all__ = [
    "AdaptOptions",
    "AdaptReport",
    "ErrorBreakdown",
    "ElementGeometry",
    "MetricField",
    "Problem",
    "QualityReport",
    "RemeshOptions",
    "TriMesh",
    "adapt_mesh",
    "build_mesh",
    "build_metric",
    "convergence_study",
    "element_geometry",
    "element_linf_error_quadratic",
    "get_problem",
    "h1_error_sq",
    "hessian_analytic_field",
    "interp_error_lp",
    "interp_grad_error_lp",
    "l2_error_sq",
    "layer_concentration",
    "linf_error_ds",
    "lp_error_estimate",
    "metric_edge_length",
    "metric_interpolate",
    "metric_volume",
    "monitor",
    "monitor_hr",
    "norm_equiv_constants",
    "quality_report",
    "recover_hessian",
    "regularize_hessian",
    "run_adaptation",
    "single_triangle_mesh",
    "structured_rect_mesh",
    "w1p_error_estimate",
]
