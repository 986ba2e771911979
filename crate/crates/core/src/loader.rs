//! Parsing, validation and serialization of knowledge-base and profile files.
//!
//! Both files are UTF-8 JSON with a strict schema: unknown keys are rejected and
//! every enumeration is a closed set of lowercase literals. A knowledge base is
//! only handed out after [`validate_kb`] reports no errors.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::model::{
    Agnosticism, AlgorithmExample, DeviceProfile, GoalId, InputModality, KnowledgeBase,
    LegalGoal, MethodEntry, MethodFamily, ModelType, Regulation, RegulationId, Scope, Stage,
};

/// The knowledge base shipped with the engine.
pub const DEFAULT_KB_JSON: &str = include_str!("../data/default_kb.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Closed list of issue codes. The literal strings are part of the file-format
/// contract and documented in `docs/schema.md`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IssueCode {
    #[serde(rename = "E_SYNTAX")]
    Syntax,
    #[serde(rename = "E_SCHEMA")]
    Schema,
    #[serde(rename = "E_VERSION")]
    Version,
    #[serde(rename = "E_REGULATION_SET")]
    RegulationSet,
    #[serde(rename = "E_GOAL_SET")]
    GoalSet,
    #[serde(rename = "E_EMPTY_CATALOG")]
    EmptyCatalog,
    #[serde(rename = "E_DUPLICATE_ID")]
    DuplicateId,
    #[serde(rename = "E_EMPTY_FIELD")]
    EmptyField,
    #[serde(rename = "E_DANGLING_REF")]
    DanglingRef,
    #[serde(rename = "E_ADDRESSABILITY")]
    Addressability,
    #[serde(rename = "E_MISSING_ACTION_NOTE")]
    MissingActionNote,
    #[serde(rename = "E_ENTRY_SCOPE_ANY")]
    EntryScopeAny,
    #[serde(rename = "E_AGNOSTICISM")]
    Agnosticism,
    #[serde(rename = "E_SCOPE_RULE")]
    ScopeRule,
    #[serde(rename = "E_MANUAL_GOAL_MAPPED")]
    ManualGoalMapped,
    #[serde(rename = "E_GOAL_A_FAMILY")]
    GoalAFamily,
    #[serde(rename = "E_GOAL_E_FAMILY")]
    GoalEFamily,
    #[serde(rename = "E_GOAL_H_FAMILY")]
    GoalHFamily,
    #[serde(rename = "E_EMPTY_MODEL_TYPES")]
    EmptyModelTypes,
    #[serde(rename = "E_EMPTY_INPUT_MODALITIES")]
    EmptyInputModalities,
    #[serde(rename = "E_CONFORMITY_WITHOUT_MEDICAL_DEVICE")]
    ConformityWithoutMedicalDevice,
    #[serde(rename = "W_STAGE_MISMATCH")]
    StageMismatch,
    #[serde(rename = "W_NO_ALGORITHM_EXAMPLES")]
    NoAlgorithmExamples,
}

impl IssueCode {
    pub const ALL: [IssueCode; 23] = [
        IssueCode::Syntax,
        IssueCode::Schema,
        IssueCode::Version,
        IssueCode::RegulationSet,
        IssueCode::GoalSet,
        IssueCode::EmptyCatalog,
        IssueCode::DuplicateId,
        IssueCode::EmptyField,
        IssueCode::DanglingRef,
        IssueCode::Addressability,
        IssueCode::MissingActionNote,
        IssueCode::EntryScopeAny,
        IssueCode::Agnosticism,
        IssueCode::ScopeRule,
        IssueCode::ManualGoalMapped,
        IssueCode::GoalAFamily,
        IssueCode::GoalEFamily,
        IssueCode::GoalHFamily,
        IssueCode::EmptyModelTypes,
        IssueCode::EmptyInputModalities,
        IssueCode::ConformityWithoutMedicalDevice,
        IssueCode::StageMismatch,
        IssueCode::NoAlgorithmExamples,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::Syntax => "E_SYNTAX",
            IssueCode::Schema => "E_SCHEMA",
            IssueCode::Version => "E_VERSION",
            IssueCode::RegulationSet => "E_REGULATION_SET",
            IssueCode::GoalSet => "E_GOAL_SET",
            IssueCode::EmptyCatalog => "E_EMPTY_CATALOG",
            IssueCode::DuplicateId => "E_DUPLICATE_ID",
            IssueCode::EmptyField => "E_EMPTY_FIELD",
            IssueCode::DanglingRef => "E_DANGLING_REF",
            IssueCode::Addressability => "E_ADDRESSABILITY",
            IssueCode::MissingActionNote => "E_MISSING_ACTION_NOTE",
            IssueCode::EntryScopeAny => "E_ENTRY_SCOPE_ANY",
            IssueCode::Agnosticism => "E_AGNOSTICISM",
            IssueCode::ScopeRule => "E_SCOPE_RULE",
            IssueCode::ManualGoalMapped => "E_MANUAL_GOAL_MAPPED",
            IssueCode::GoalAFamily => "E_GOAL_A_FAMILY",
            IssueCode::GoalEFamily => "E_GOAL_E_FAMILY",
            IssueCode::GoalHFamily => "E_GOAL_H_FAMILY",
            IssueCode::EmptyModelTypes => "E_EMPTY_MODEL_TYPES",
            IssueCode::EmptyInputModalities => "E_EMPTY_INPUT_MODALITIES",
            IssueCode::ConformityWithoutMedicalDevice => "E_CONFORMITY_WITHOUT_MEDICAL_DEVICE",
            IssueCode::StageMismatch => "W_STAGE_MISMATCH",
            IssueCode::NoAlgorithmExamples => "W_NO_ALGORITHM_EXAMPLES",
        }
    }

    pub fn severity(self) -> Severity {
        if self.as_str().starts_with("W_") {
            Severity::Warning
        } else {
            Severity::Error
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub code: IssueCode,
    /// Dotted path into the document, e.g. `catalog[3].goal_ids[1]`.
    pub location: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(code: IssueCode, location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: code.severity(),
            code,
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {} at {}: {}", self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path} (line {line}, column {column}): {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("document failed validation with {} error(s)", count_errors(.0))]
    Invalid(Vec<ValidationIssue>),
}

fn count_errors(issues: &[ValidationIssue]) -> usize {
    issues.iter().filter(|i| i.is_error()).count()
}

impl LoadError {
    /// Uniform issue view of any load failure.
    pub fn issues(&self) -> Vec<ValidationIssue> {
        match self {
            LoadError::Syntax {
                line,
                column,
                message,
            } => vec![ValidationIssue::new(
                IssueCode::Syntax,
                format!("line {line}, column {column}"),
                message.clone(),
            )],
            LoadError::Schema { path, message, .. } => {
                vec![ValidationIssue::new(IssueCode::Schema, path.clone(), message.clone())]
            }
            LoadError::Invalid(issues) => issues.clone(),
        }
    }

    pub fn is_syntax(&self) -> bool {
        matches!(self, LoadError::Syntax { .. })
    }
}

/// A catalog row as written in the file. Goal references stay textual until
/// validation so that unknown ids surface as `E_DANGLING_REF`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryRecord {
    pub id: String,
    pub question: String,
    pub family: MethodFamily,
    pub scope: Scope,
    pub stage: Stage,
    pub agnosticism: Agnosticism,
    pub model_types: BTreeSet<ModelType>,
    pub input_modalities: BTreeSet<InputModality>,
    pub goal_ids: Vec<String>,
    pub algorithm_examples: Vec<AlgorithmExample>,
    pub explanation_note: String,
}

/// Raw knowledge-base document, schema-checked but not yet validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    pub version: String,
    pub regulations: Vec<Regulation>,
    pub goals: Vec<LegalGoal>,
    pub catalog: Vec<EntryRecord>,
}

impl From<&KnowledgeBase> for KbDocument {
    fn from(kb: &KnowledgeBase) -> Self {
        KbDocument {
            version: kb.version.clone(),
            regulations: kb.regulations.clone(),
            goals: kb.goals.clone(),
            catalog: kb
                .catalog
                .iter()
                .map(|e| EntryRecord {
                    id: e.id.clone(),
                    question: e.question.clone(),
                    family: e.family,
                    scope: e.scope,
                    stage: e.stage,
                    agnosticism: e.agnosticism,
                    model_types: e.model_types.clone(),
                    input_modalities: e.input_modalities.clone(),
                    goal_ids: e.goal_ids.iter().map(|g| g.to_string()).collect(),
                    algorithm_examples: e.algorithm_examples.clone(),
                    explanation_note: e.explanation_note.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub device: DeviceProfile,
}

/// Deserialize a strict JSON document, mapping failures to position-annotated
/// errors. `prefix` is prepended to schema paths.
pub fn parse_document<T: DeserializeOwned>(source: &[u8], prefix: &str) -> Result<T, LoadError> {
    let mut de = serde_json::Deserializer::from_slice(source);
    let parsed = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = schema_path(prefix, &e.path().to_string(), &e.inner().to_string());
        from_json_error(e.into_inner(), path)
    })?;
    de.end().map_err(|e| from_json_error(e, String::new()))?;
    Ok(parsed)
}

/// Same as [`parse_document`] for an already parsed JSON value (no positions).
pub fn parse_value<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, LoadError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = schema_path(prefix, &e.path().to_string(), &e.inner().to_string());
        LoadError::Schema {
            path,
            line: 0,
            column: 0,
            message: strip_position(&e.into_inner().to_string()),
        }
    })
}

fn from_json_error(err: serde_json::Error, path: String) -> LoadError {
    use serde_json::error::Category;
    let message = strip_position(&err.to_string());
    match err.classify() {
        Category::Data => LoadError::Schema {
            path,
            line: err.line(),
            column: err.column(),
            message,
        },
        Category::Syntax | Category::Eof | Category::Io => LoadError::Syntax {
            line: err.line(),
            column: err.column(),
            message,
        },
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(idx) => message[..idx].to_owned(),
        None => message.to_owned(),
    }
}

/// Join the prefix and the serde path; missing-field errors point at the
/// missing key itself rather than at its parent.
fn schema_path(prefix: &str, path: &str, message: &str) -> String {
    let mut segments: Vec<String> = Vec::new();
    if !prefix.is_empty() {
        segments.push(prefix.to_owned());
    }
    if path != "." && !path.is_empty() {
        segments.push(path.to_owned());
    }
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            segments.push(rest[..end].to_owned());
        }
    }
    if segments.is_empty() {
        "$".to_owned()
    } else {
        segments.join(".")
    }
}

/// Parse, validate and build a knowledge base. Never returns a KB with errors.
pub fn load_kb(source: &[u8]) -> Result<KnowledgeBase, LoadError> {
    let doc: KbDocument = parse_document(source, "")?;
    build_kb(doc)
}

/// Validate a parsed document and convert it into a [`KnowledgeBase`].
pub fn build_kb(doc: KbDocument) -> Result<KnowledgeBase, LoadError> {
    let issues = validate_kb(&doc);
    if issues.iter().any(ValidationIssue::is_error) {
        return Err(LoadError::Invalid(issues));
    }
    let catalog = doc
        .catalog
        .into_iter()
        .map(|r| MethodEntry {
            goal_ids: r
                .goal_ids
                .iter()
                .map(|g| g.parse().expect("validated goal reference"))
                .collect(),
            id: r.id,
            question: r.question,
            family: r.family,
            scope: r.scope,
            stage: r.stage,
            agnosticism: r.agnosticism,
            model_types: r.model_types,
            input_modalities: r.input_modalities,
            algorithm_examples: r.algorithm_examples,
            explanation_note: r.explanation_note,
        })
        .collect();
    Ok(KnowledgeBase {
        version: doc.version,
        regulations: doc.regulations,
        goals: doc.goals,
        catalog,
    })
}

/// The embedded default knowledge base.
pub fn default_kb() -> &'static KnowledgeBase {
    static KB: OnceLock<KnowledgeBase> = OnceLock::new();
    KB.get_or_init(|| load_kb(DEFAULT_KB_JSON.as_bytes()).expect("embedded KB is valid"))
}

/// Canonical document form of a knowledge base (sorted keys, sorted sets).
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let value = serde_json::to_value(KbDocument::from(kb)).expect("KB serializes");
    canonical::to_canonical_pretty(&value)
}

const GOAL_A_FAMILIES: &[MethodFamily] = &[
    MethodFamily::GlobalFeatureAttribution,
    MethodFamily::RuleExtraction,
    MethodFamily::RuleBased,
    MethodFamily::Surrogate,
];

const GOAL_E_FAMILIES: &[MethodFamily] = &[
    MethodFamily::Counterfactual,
    MethodFamily::Contrastive,
    MethodFamily::CounterfactualInteraction,
    MethodFamily::RuleExtraction,
    MethodFamily::RuleBased,
    MethodFamily::Surrogate,
];

const GOAL_H_FAMILIES: &[MethodFamily] = GOAL_A_FAMILIES;

/// Goals that no XAI method can address.
const MANUAL_GOALS: [GoalId; 2] = [GoalId::C, GoalId::J];

// Issues are ordered by (section, record, code); section-level issues sort
// before the records of that section.
struct Collector {
    issues: Vec<((u8, usize), ValidationIssue)>,
}

impl Collector {
    fn push(&mut self, key: (u8, usize), code: IssueCode, location: String, message: String) {
        self.issues.push((key, ValidationIssue::new(code, location, message)));
    }

    fn finish(mut self) -> Vec<ValidationIssue> {
        self.issues
            .sort_by(|(ka, a), (kb, b)| ka.cmp(kb).then(a.code.as_str().cmp(b.code.as_str())));
        self.issues.into_iter().map(|(_, i)| i).collect()
    }
}

/// Check every knowledge-base rule and return all issues in document order.
pub fn validate_kb(doc: &KbDocument) -> Vec<ValidationIssue> {
    let mut c = Collector { issues: Vec::new() };

    if semver::Version::parse(&doc.version).is_err() {
        c.push(
            (0, 0),
            IssueCode::Version,
            "version".into(),
            format!("`{}` is not a semantic version", doc.version),
        );
    }

    check_regulations(doc, &mut c);
    check_goals(doc, &mut c);
    check_catalog(doc, &mut c);

    c.finish()
}

fn check_regulations(doc: &KbDocument, c: &mut Collector) {
    let mut seen = BTreeSet::new();
    for (i, reg) in doc.regulations.iter().enumerate() {
        let key = (1, i + 1);
        let loc = format!("regulations[{i}]");
        if !seen.insert(reg.id) {
            c.push(key, IssueCode::RegulationSet, format!("{loc}.id"), format!("regulation {} is listed twice", reg.id));
        }
        if reg.full_name.trim().is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.full_name"), "full_name is empty".into());
        }
        if reg.explanation_articles.is_empty() {
            c.push(
                key,
                IssueCode::EmptyField,
                format!("{loc}.explanation_articles"),
                format!("regulation {} cites no explanation articles", reg.id),
            );
        }
        for (j, article) in reg.explanation_articles.iter().enumerate() {
            if article.trim().is_empty() {
                c.push(key, IssueCode::EmptyField, format!("{loc}.explanation_articles[{j}]"), "article citation is empty".into());
            }
        }
        if reg.trigger_description.trim().is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.trigger_description"), "trigger_description is empty".into());
        }
    }
    for id in RegulationId::ALL {
        if !seen.contains(&id) {
            c.push((1, 0), IssueCode::RegulationSet, "regulations".into(), format!("regulation {id} is missing"));
        }
    }
}

fn check_goals(doc: &KbDocument, c: &mut Collector) {
    let declared_regs: BTreeSet<RegulationId> = doc.regulations.iter().map(|r| r.id).collect();
    let mut seen = BTreeSet::new();
    for (i, goal) in doc.goals.iter().enumerate() {
        let key = (2, i + 1);
        let loc = format!("goals[{i}]");
        if !seen.insert(goal.id) {
            c.push(key, IssueCode::GoalSet, format!("{loc}.id"), format!("goal {} is listed twice", goal.id));
        }
        if goal.description.trim().is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.description"), "description is empty".into());
        }
        if goal.regulations.is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.regulations"), format!("goal {} names no regulation", goal.id));
        }
        for reg in &goal.regulations {
            if !declared_regs.contains(reg) {
                c.push(
                    key,
                    IssueCode::DanglingRef,
                    format!("{loc}.regulations"),
                    format!("goal {} references undeclared regulation {reg}", goal.id),
                );
            }
        }
        let expected = !MANUAL_GOALS.contains(&goal.id);
        if goal.xai_addressable != expected {
            c.push(
                key,
                IssueCode::Addressability,
                format!("{loc}.xai_addressable"),
                format!(
                    "goal {} must have xai_addressable = {expected}: only C and J are reserved for manual measures",
                    goal.id
                ),
            );
        }
        if !goal.xai_addressable
            && goal.manual_action.as_deref().is_none_or(|a| a.trim().is_empty())
        {
            c.push(
                key,
                IssueCode::MissingActionNote,
                format!("{loc}.manual_action"),
                format!("goal {} is not XAI-addressable and needs a manual_action note", goal.id),
            );
        }
    }
    for id in GoalId::ALL {
        if !seen.contains(&id) {
            c.push((2, 0), IssueCode::GoalSet, "goals".into(), format!("goal {id} is missing"));
        }
    }
}

fn check_catalog(doc: &KbDocument, c: &mut Collector) {
    if doc.catalog.is_empty() {
        c.push((3, 0), IssueCode::EmptyCatalog, "catalog".into(), "the method catalog is empty".into());
        return;
    }
    let mut seen_ids = BTreeSet::new();
    for (i, entry) in doc.catalog.iter().enumerate() {
        let key = (3, i + 1);
        let loc = format!("catalog[{i}]");
        let name = &entry.id;

        if entry.id.trim().is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.id"), "entry id is empty".into());
        } else if !seen_ids.insert(entry.id.as_str()) {
            c.push(key, IssueCode::DuplicateId, format!("{loc}.id"), format!("entry id {name} is not unique"));
        }
        if entry.question.trim().is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.question"), format!("entry {name} has no question"));
        }
        if entry.explanation_note.trim().is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.explanation_note"), format!("entry {name} has no explanation note"));
        }
        if entry.scope == Scope::Any {
            c.push(
                key,
                IssueCode::EntryScopeAny,
                format!("{loc}.scope"),
                format!("entry {name} must be either global or local"),
            );
        }
        let agnostic = entry.agnosticism == Agnosticism::ModelAgnostic;
        if agnostic != entry.model_types.is_empty() {
            c.push(
                key,
                IssueCode::Agnosticism,
                format!("{loc}.agnosticism"),
                if agnostic {
                    format!("model-agnostic entry {name} must not restrict model_types")
                } else {
                    format!("model-specific entry {name} must list its model_types")
                },
            );
        }
        if entry.algorithm_examples.is_empty() {
            c.push(
                key,
                IssueCode::NoAlgorithmExamples,
                format!("{loc}.algorithm_examples"),
                format!("entry {name} cites no algorithm"),
            );
        }
        if entry.goal_ids.is_empty() {
            c.push(key, IssueCode::EmptyField, format!("{loc}.goal_ids"), format!("entry {name} maps no goal"));
            continue;
        }

        let mut resolved: Vec<&LegalGoal> = Vec::new();
        for (j, raw) in entry.goal_ids.iter().enumerate() {
            let goal = raw
                .parse::<GoalId>()
                .ok()
                .and_then(|id| doc.goals.iter().find(|g| g.id == id));
            let Some(goal) = goal else {
                c.push(
                    key,
                    IssueCode::DanglingRef,
                    format!("{loc}.goal_ids[{j}]"),
                    format!("entry {name} references unknown goal `{raw}`"),
                );
                continue;
            };
            resolved.push(goal);
            if !goal.xai_addressable {
                c.push(
                    key,
                    IssueCode::ManualGoalMapped,
                    format!("{loc}.goal_ids[{j}]"),
                    format!("goal {} must be met by manual measures and cannot be mapped to entry {name}", goal.id),
                );
            }
            if entry.scope == Scope::Local && goal.scope == Scope::Global {
                c.push(
                    key,
                    IssueCode::ScopeRule,
                    format!("{loc}.goal_ids[{j}]"),
                    format!("goal {} requires global explanations but entry {name} is local", goal.id),
                );
            }
        }

        let has = |id: GoalId| resolved.iter().any(|g| g.id == id);
        let family_rules = [
            (GoalId::A, GOAL_A_FAMILIES, IssueCode::GoalAFamily),
            (GoalId::E, GOAL_E_FAMILIES, IssueCode::GoalEFamily),
            (GoalId::H, GOAL_H_FAMILIES, IssueCode::GoalHFamily),
        ];
        for (goal, allowed, code) in family_rules {
            if has(goal) && !allowed.contains(&entry.family) {
                c.push(
                    key,
                    code,
                    format!("{loc}.family"),
                    format!("family {} cannot address goal {goal}", entry.family),
                );
            }
        }

        if !resolved.is_empty() && resolved.iter().all(|g| !entry.stage.compatible_with(g.stage)) {
            c.push(
                key,
                IssueCode::StageMismatch,
                format!("{loc}.stage"),
                format!("stage {} of entry {name} matches none of its goals' stages", entry.stage),
            );
        }
    }
}

/// Check profile invariants. `prefix` is the path of the device record.
pub fn validate_profile(profile: &DeviceProfile, prefix: &str) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if profile.model_types.is_empty() {
        issues.push(ValidationIssue::new(
            IssueCode::EmptyModelTypes,
            format!("{prefix}.model_types"),
            "at least one model type is required",
        ));
    }
    if profile.input_modalities.is_empty() {
        issues.push(ValidationIssue::new(
            IssueCode::EmptyInputModalities,
            format!("{prefix}.input_modalities"),
            "at least one input modality is required",
        ));
    }
    if profile.requires_third_party_conformity && !profile.is_medical_device {
        issues.push(ValidationIssue::new(
            IssueCode::ConformityWithoutMedicalDevice,
            format!("{prefix}.requires_third_party_conformity"),
            "third-party conformity assessment is only modelled for medical devices",
        ));
    }
    issues
}

impl DeviceProfile {
    pub fn validate(&self) -> Vec<ValidationIssue> {
        validate_profile(self, "device")
    }
}

/// Parse and validate a profile document (`{"device": {...}}`).
pub fn load_profile(source: &[u8]) -> Result<DeviceProfile, LoadError> {
    let doc: ProfileDocument = parse_document(source, "")?;
    check_profile(doc.device, "device")
}

/// Validate a profile record that was parsed elsewhere.
pub fn check_profile(profile: DeviceProfile, prefix: &str) -> Result<DeviceProfile, LoadError> {
    let issues = validate_profile(&profile, prefix);
    if issues.is_empty() {
        Ok(profile)
    } else {
        Err(LoadError::Invalid(issues))
    }
}

pub fn serialize_profile(profile: &DeviceProfile) -> String {
    let value = serde_json::to_value(ProfileDocument {
        device: profile.clone(),
    })
    .expect("profile serializes");
    canonical::to_canonical_pretty(&value)
}
