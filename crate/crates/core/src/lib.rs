//! Regulation-driven selection of explainability methods for AI medical devices.

pub mod applicability;
pub mod canonical;
pub mod goals;
pub mod loader;
pub mod matching;
pub mod model;
pub mod recommend;
pub mod report;
pub mod whatif;

pub use applicability::{applicable_regulations, assess, ApplicabilityFinding, TriggerFlag};
pub use goals::{derive_goals, partition, GoalRequirement};
pub use loader::{
    default_kb, load_kb, load_profile, serialize_kb, serialize_profile, validate_kb, validate_profile, IssueCode,
    LoadError, Severity, ValidationIssue,
};
pub use matching::{build_matrix, eligible_entries, CoverageMatrix, EligibleEntry};
pub use model::{
    kb_fingerprint, Agnosticism, Audience, DeviceProfile, GoalId, InputModality, KnowledgeBase, LegalGoal, LoopType,
    MethodEntry, MethodFamily, ModelType, Regulation, RegulationId, Scope, Stage,
};
pub use recommend::{explain_cover, irredundant_covers, minimal_covers, Recommendation, DEFAULT_COVER_CAP};
pub use report::{analyze, analyze_with, render, AnalysisOptions, AnalysisReport, RenderFormat, ReportError};
pub use whatif::{apply_overrides, diff_reports, parse_override, render_diff, OverrideError, ReportDiff};
