"""Embedded Runge-Kutta pairs built from extrapolation and deferred
correction, with exact stability/accuracy/parallelism analysis, adaptive
integration (serial or stage-parallel), and a benchmark CLI."""

from .accuracy import accuracy_efficiency, embedded_defect, principal_error_norm
from .analysis import MethodReport, analyze_method, parallel_metrics
from .builders import (
    BuildError,
    DCConfig,
    EmbeddedMethod,
    LoadError,
    deferred_correction_pair,
    euler_extrapolation_pair,
    load_reference_pair,
    midpoint_extrapolation_pair,
)
from .coeffs import Coefficient, WORK_PREC
from .executors import ParallelExecutor, Schedule, SerialExecutor, build_schedule
from .graphs import StageGraph, build_stage_graph, seq_stages
from .integrator import (
    IVP,
    ControllerConfig,
    IntegrationError,
    RunRecord,
    StepSizeUnderflow,
    control_step,
    controlled_step,
    integrate,
    rk_step,
)
from .order_conditions import ElementaryWeights, order_residuals, verify_order
from .stability import (
    imag_interval,
    real_interval,
    stability_polynomial,
    stability_report,
    taylor_polynomial,
)
from .tableau import (
    Tableau,
    TableauError,
    TableauParseError,
    make_tableau,
    parse_tableau,
    serialize_tableau,
)
from .trees import RootedTree, count_conditions, enumerate_trees, trees_of_order

__all__ = [
    "BuildError",
    "Coefficient",
    "ControllerConfig",
    "DCConfig",
    "ElementaryWeights",
    "EmbeddedMethod",
    "IVP",
    "IntegrationError",
    "LoadError",
    "MethodReport",
    "ParallelExecutor",
    "RootedTree",
    "RunRecord",
    "Schedule",
    "SerialExecutor",
    "StageGraph",
    "StepSizeUnderflow",
    "Tableau",
    "TableauError",
    "TableauParseError",
    "WORK_PREC",
    "accuracy_efficiency",
    "analyze_method",
    "build_schedule",
    "build_stage_graph",
    "control_step",
    "controlled_step",
    "count_conditions",
    "deferred_correction_pair",
    "embedded_defect",
    "enumerate_trees",
    "euler_extrapolation_pair",
    "imag_interval",
    "integrate",
    "load_reference_pair",
    "make_tableau",
    "midpoint_extrapolation_pair",
    "order_residuals",
    "parallel_metrics",
    "parse_tableau",
    "principal_error_norm",
    "real_interval",
    "rk_step",
    "seq_stages",
    "serialize_tableau",
    "stability_polynomial",
    "stability_report",
    "taylor_polynomial",
    "trees_of_order",
    "verify_order",
]
