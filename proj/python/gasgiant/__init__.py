"""Numerical geometry and spectral analysis for degenerate collar metrics.

Thin re-export of the compiled core: metric construction and curvature,
geodesic tracing and boundary distances, ray-transform probes, truncated
eigenvalue ladders, polytrope profiles, and the declarative experiment
runner.
"""

from ._core import (
    EigenTable,
    ExitRecord,
    IndicialData,
    InjectivityReport,
    Metric,
    MetricJet,
    PolytropeProfile,
    RateFit,
    ScatteringResult,
    boundary_distance,
    discrete_injectivity_probe,
    eigenvalues_truncated,
    exit_time_scaling,
    fit_loglog,
    flat_metric,
    hausdorff_dimension_boundary,
    indicial_data,
    jacobi_summary,
    lane_emden,
    metric_from_json,
    metric_from_json_file,
    metric_jet,
    run_experiment_json,
    scattering_relation,
    sectional_curvature,
    trace_from_boundary,
    truncation_ladder,
    volume_sublevel,
    xray_transform,
)

__all__ = [
    "EigenTable",
    "ExitRecord",
    "IndicialData",
    "InjectivityReport",
    "Metric",
    "MetricJet",
    "PolytropeProfile",
    "RateFit",
    "ScatteringResult",
    "boundary_distance",
    "discrete_injectivity_probe",
    "eigenvalues_truncated",
    "exit_time_scaling",
    "fit_loglog",
    "flat_metric",
    "hausdorff_dimension_boundary",
    "indicial_data",
    "jacobi_summary",
    "lane_emden",
    "metric_from_json",
    "metric_from_json_file",
    "metric_jet",
    "run_experiment_json",
    "scattering_relation",
    "sectional_curvature",
    "trace_from_boundary",
    "truncation_ladder",
    "volume_sublevel",
    "xray_transform",
]
