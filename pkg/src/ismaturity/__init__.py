"""Staged information-security maturity planning and gated assessment.

The library covers the full pipeline: ingest stakeholder importance surveys
over the ISO/IEC 27001 Annex A controls, partition the controls into four
implementation stages, attach per-control minimum maturity levels (one fixed
floor, or levels derived from probability/impact risk ratings), evaluate
measured maturity levels stage by stage with prefix gating, and render the
results as reports with gap and misallocation analysis.
"""

from .assessment import (
    AssessmentResult,
    Gap,
    MisallocationFinding,
    StageResult,
    evaluate,
    gap_analysis,
    misallocation_findings,
    naive_average,
)
from .catalog import (
    Control,
    ControlCatalog,
    ControlId,
    DependencyGraph,
    Finding,
    load_catalog,
    parse_control_id,
    topological_order,
    validate_dependencies,
)
from .errors import ConsistencyError, MaturityError, ValidationError
from .files import (
    default_catalog,
    default_importance_db,
    default_stage_plan,
    load_applicability_csv,
    load_measurements_csv,
    load_ratings_csv,
    load_survey_csv,
    read_catalog_file,
    read_importance_file,
    read_minimum_db_file,
    read_stage_plan_file,
)
from .importance import (
    ImportanceDatabase,
    IncompleteSurveyWarning,
    SurveyResponse,
    control_average,
    ingest_responses,
    merge_responses,
)
from .minimums import (
    ApplicabilityMap,
    FixedMinimums,
    MinimumLevelDatabase,
    MinimumRequirement,
    RiskGrade,
    RiskMinimums,
    build_minimum_db,
    level_name,
    mark_applicable,
    mark_not_applicable,
    parse_risk_grade,
    risk_minimum,
)
from .reporting import (
    ModeComparison,
    ReportDocument,
    build_report,
    compare_modes,
    format_level,
    label_line,
    parse_comparison,
    parse_report,
    render_comparison,
    render_document,
    render_report,
)
from .staging import (
    Stage,
    StageDelta,
    StagePlan,
    build_stage_plan,
    default_boundaries,
    diff_stage_plans,
    exclude_from_plan,
    partition_quartiles,
    promote_prerequisites,
)

__version__ = "0.1.0"

__all__ = [
    "ApplicabilityMap",
    "AssessmentResult",
    "ConsistencyError",
    "Control",
    "ControlCatalog",
    "ControlId",
    "DependencyGraph",
    "Finding",
    "FixedMinimums",
    "Gap",
    "ImportanceDatabase",
    "IncompleteSurveyWarning",
    "MaturityError",
    "MinimumLevelDatabase",
    "MinimumRequirement",
    "MisallocationFinding",
    "ModeComparison",
    "ReportDocument",
    "RiskGrade",
    "RiskMinimums",
    "Stage",
    "StageDelta",
    "StagePlan",
    "StageResult",
    "SurveyResponse",
    "ValidationError",
    "build_minimum_db",
    "build_report",
    "build_stage_plan",
    "compare_modes",
    "control_average",
    "default_boundaries",
    "default_catalog",
    "default_importance_db",
    "default_stage_plan",
    "diff_stage_plans",
    "evaluate",
    "exclude_from_plan",
    "format_level",
    "gap_analysis",
    "ingest_responses",
    "label_line",
    "level_name",
    "load_applicability_csv",
    "load_catalog",
    "load_measurements_csv",
    "load_ratings_csv",
    "load_survey_csv",
    "mark_applicable",
    "mark_not_applicable",
    "merge_responses",
    "misallocation_findings",
    "naive_average",
    "parse_comparison",
    "parse_control_id",
    "parse_report",
    "parse_risk_grade",
    "partition_quartiles",
    "promote_prerequisites",
    "read_catalog_file",
    "read_importance_file",
    "read_minimum_db_file",
    "read_stage_plan_file",
    "render_comparison",
    "render_document",
    "render_report",
    "risk_minimum",
    "topological_order",
    "validate_dependencies",
    "__version__",
]
