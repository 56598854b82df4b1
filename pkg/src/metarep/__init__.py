"""Replicability analysis for meta-analytic findings.

Quantifies how much a meta-analytic conclusion depends on individual
studies: r-values, sensitivity intervals, lower confidence bounds on the
number of studies with an effect, multiplicity adjustment across
endpoints, annotated forest plots, and a Monte-Carlo calibration study
of the underlying tests.
"""

from .errors import EnumerationCapError, InvalidInputError, PreconditionError
from .ingest import InputRecord, ReportedMeasure, load_study_set, normalize, parse_csv
from .meta import (
    Measure,
    MetaModel,
    MetaResult,
    Study,
    StudySet,
    dersimonian_laird_tau2,
    fixed_effect_meta,
    meta_analysis,
    random_effects_meta,
)
from .multiplicity import (
    AdjustMethod,
    AdjustmentResult,
    EndpointFamily,
    bh_adjust,
    bonferroni_adjust,
    declare,
)
from .replicability import (
    BoundTraceRow,
    LeaveOneOutReport,
    LeaveOneOutRow,
    ReplicabilityBound,
    RValueResult,
    SensitivityInterval,
    enumerate_subsets,
    leave_one_out_report,
    r_value,
    replicability_bound,
    sensitivity_interval,
)
from .report import (
    format_rvalue,
    render_forest_plot,
    report_sentence,
    serialize_results,
)
from .simulation import (
    SimConfig,
    SimulationGrid,
    TestKind,
    desk_config,
    emit_grid,
    full_config,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "EnumerationCapError",
    "InvalidInputError",
    "PreconditionError",
    "InputRecord",
    "ReportedMeasure",
    "load_study_set",
    "normalize",
    "parse_csv",
    "Measure",
    "MetaModel",
    "MetaResult",
    "Study",
    "StudySet",
    "dersimonian_laird_tau2",
    "fixed_effect_meta",
    "meta_analysis",
    "random_effects_meta",
    "AdjustMethod",
    "AdjustmentResult",
    "EndpointFamily",
    "bh_adjust",
    "bonferroni_adjust",
    "declare",
    "BoundTraceRow",
    "LeaveOneOutReport",
    "LeaveOneOutRow",
    "ReplicabilityBound",
    "RValueResult",
    "SensitivityInterval",
    "enumerate_subsets",
    "leave_one_out_report",
    "r_value",
    "replicability_bound",
    "sensitivity_interval",
    "format_rvalue",
    "render_forest_plot",
    "report_sentence",
    "serialize_results",
    "SimConfig",
    "SimulationGrid",
    "TestKind",
    "desk_config",
    "emit_grid",
    "full_config",
    "run_simulation",
    "__version__",
]
