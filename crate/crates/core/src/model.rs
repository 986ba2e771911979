//! Domain types of the knowledge base and of the device profile.
//!
//! A [`KnowledgeBase`] can only be obtained through the loader, which runs the
//! full consistency check first, so every instance in circulation satisfies the
//! catalog rules enforced in [`crate::loader::validate_kb`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// The three EU legal instruments carrying explanation duties.
///
/// Declaration order is the reporting order (MDR, AIA, GDPR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegulationId {
    Mdr,
    Aia,
    Gdpr,
}

impl RegulationId {
    pub const ALL: [RegulationId; 3] = [RegulationId::Mdr, RegulationId::Aia, RegulationId::Gdpr];

    pub fn as_str(self) -> &'static str {
        match self {
            RegulationId::Mdr => "MDR",
            RegulationId::Aia => "AIA",
            RegulationId::Gdpr => "GDPR",
        }
    }
}

impl fmt::Display for RegulationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegulationId {
    type Err = UnknownLiteral;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mdr" => Ok(RegulationId::Mdr),
            "aia" => Ok(RegulationId::Aia),
            "gdpr" => Ok(RegulationId::Gdpr),
            _ => Err(UnknownLiteral::new("regulation", s)),
        }
    }
}

/// A string that is not a literal of the expected closed enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{value}`")]
pub struct UnknownLiteral {
    pub kind: &'static str,
    pub value: String,
}

impl UnknownLiteral {
    fn new(kind: &'static str, value: &str) -> Self {
        Self {
            kind,
            value: value.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regulation {
    pub id: RegulationId,
    pub full_name: String,
    /// Citation strings such as `"Art. 10.11"`.
    pub explanation_articles: Vec<String>,
    pub trigger_description: String,
    pub format_constraints: String,
}

impl Regulation {
    /// Article citations prefixed with the regulation acronym, e.g. `"GDPR Art. 22"`.
    pub fn citations(&self) -> impl Iterator<Item = String> + '_ {
        self.explanation_articles
            .iter()
            .map(move |a| format!("{} {}", self.id, a))
    }
}

/// Legal explanatory goal identifier. Ordered alphabetically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GoalId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
}

impl GoalId {
    pub const ALL: [GoalId; 11] = [
        GoalId::A,
        GoalId::B,
        GoalId::C,
        GoalId::D,
        GoalId::E,
        GoalId::F,
        GoalId::G,
        GoalId::H,
        GoalId::I,
        GoalId::J,
        GoalId::K,
    ];

    pub fn as_char(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for GoalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for GoalId {
    type Err = UnknownLiteral;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GoalId::ALL
            .into_iter()
            .find(|g| s.len() == 1 && s.starts_with(g.as_char()))
            .ok_or_else(|| UnknownLiteral::new("goal id", s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Global,
    Local,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ExAnte,
    ExPost,
    Any,
}

impl Stage {
    /// `Any` is compatible with everything; otherwise the stages must agree.
    pub fn compatible_with(self, other: Stage) -> bool {
        self == Stage::Any || other == Stage::Any || self == other
    }
}

macro_rules! literal_display {
    ($ty:ty { $($variant:ident => $lit:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $(<$ty>::$variant => $lit,)+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = UnknownLiteral;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($lit => Ok(<$ty>::$variant),)+
                    _ => Err(UnknownLiteral::new(stringify!($ty), s)),
                }
            }
        }
    };
}

literal_display!(Scope { Global => "global", Local => "local", Any => "any" });
literal_display!(Stage { ExAnte => "ex_ante", ExPost => "ex_post", Any => "any" });

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegalGoal {
    pub id: GoalId,
    pub description: String,
    pub regulations: BTreeSet<RegulationId>,
    pub scope: Scope,
    pub stage: Stage,
    pub xai_addressable: bool,
    /// What to do instead of XAI; present exactly on non-addressable goals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_action: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodFamily {
    GlobalFeatureAttribution,
    RuleExtraction,
    RuleBased,
    Surrogate,
    LocalFeatureAttribution,
    SaliencyMap,
    ActivationMaximisation,
    LayerwiseRelevance,
    ConceptBased,
    SimilarityBased,
    Counterfactual,
    Contrastive,
    Anchors,
    CounterfactualInteraction,
    ContextualAnalysis,
    VisualAttribution,
    FeatureImportanceAnalysis,
    SelfOrganisingMap,
}

literal_display!(MethodFamily {
    GlobalFeatureAttribution => "global_feature_attribution",
    RuleExtraction => "rule_extraction",
    RuleBased => "rule_based",
    Surrogate => "surrogate",
    LocalFeatureAttribution => "local_feature_attribution",
    SaliencyMap => "saliency_map",
    ActivationMaximisation => "activation_maximisation",
    LayerwiseRelevance => "layerwise_relevance",
    ConceptBased => "concept_based",
    SimilarityBased => "similarity_based",
    Counterfactual => "counterfactual",
    Contrastive => "contrastive",
    Anchors => "anchors",
    CounterfactualInteraction => "counterfactual_interaction",
    ContextualAnalysis => "contextual_analysis",
    VisualAttribution => "visual_attribution",
    FeatureImportanceAnalysis => "feature_importance_analysis",
    SelfOrganisingMap => "self_organising_map",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    Dnn,
    TreeBased,
    Svm,
    BayesianNetwork,
    LinearModel,
    RandomForest,
    DecisionTree,
    Other,
}

literal_display!(ModelType {
    Dnn => "dnn",
    TreeBased => "tree_based",
    Svm => "svm",
    BayesianNetwork => "bayesian_network",
    LinearModel => "linear_model",
    RandomForest => "random_forest",
    DecisionTree => "decision_tree",
    Other => "other",
});

impl ModelType {
    pub const ALL: [ModelType; 8] = [
        ModelType::Dnn,
        ModelType::TreeBased,
        ModelType::Svm,
        ModelType::BayesianNetwork,
        ModelType::LinearModel,
        ModelType::RandomForest,
        ModelType::DecisionTree,
        ModelType::Other,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputModality {
    Tabular,
    Image,
    TimeSeries,
    Text,
    Other,
}

literal_display!(InputModality {
    Tabular => "tabular",
    Image => "image",
    TimeSeries => "time_series",
    Text => "text",
    Other => "other",
});

impl InputModality {
    pub const ALL: [InputModality; 5] = [
        InputModality::Tabular,
        InputModality::Image,
        InputModality::TimeSeries,
        InputModality::Text,
        InputModality::Other,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agnosticism {
    ModelAgnostic,
    ModelSpecific,
}

literal_display!(Agnosticism {
    ModelAgnostic => "model_agnostic",
    ModelSpecific => "model_specific",
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmExample {
    pub name: String,
    pub citation: String,
}

/// One row of the XAI method catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub id: String,
    pub question: String,
    pub family: MethodFamily,
    pub scope: Scope,
    /// Informational only; never used as a filter.
    pub stage: Stage,
    pub agnosticism: Agnosticism,
    /// Empty means any model type.
    pub model_types: BTreeSet<ModelType>,
    /// Empty means any input modality.
    pub input_modalities: BTreeSet<InputModality>,
    pub goal_ids: BTreeSet<GoalId>,
    pub algorithm_examples: Vec<AlgorithmExample>,
    pub explanation_note: String,
}

impl MethodEntry {
    pub fn is_model_agnostic(&self) -> bool {
        self.agnosticism == Agnosticism::ModelAgnostic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopType {
    Open,
    SemiClosed,
    Closed,
}

literal_display!(LoopType {
    Open => "open",
    SemiClosed => "semi_closed",
    Closed => "closed",
});

impl LoopType {
    pub const ALL: [LoopType; 3] = [LoopType::Open, LoopType::SemiClosed, LoopType::Closed];
}

/// Intended recipient of the instructions. Only affects report wording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    HealthcareProfessional,
    Layperson,
    Patient,
}

literal_display!(Audience {
    HealthcareProfessional => "healthcare_professional",
    Layperson => "layperson",
    Patient => "patient",
});

/// User-supplied description of the device under analysis.
///
/// Use [`crate::loader::load_profile`] or [`DeviceProfile::validate`] before
/// handing a hand-built profile to the engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    pub name: String,
    pub loop_type: LoopType,
    pub is_medical_device: bool,
    pub requires_third_party_conformity: bool,
    pub listed_annex_iii: bool,
    pub processes_personal_data: bool,
    pub high_stakes_effects: bool,
    pub model_types: BTreeSet<ModelType>,
    pub input_modalities: BTreeSet<InputModality>,
    pub audience: Audience,
}

/// The curated, validated knowledge base. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnowledgeBase {
    pub(crate) version: String,
    pub(crate) regulations: Vec<Regulation>,
    pub(crate) goals: Vec<LegalGoal>,
    pub(crate) catalog: Vec<MethodEntry>,
}

impl KnowledgeBase {
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn regulations(&self) -> &[Regulation] {
        &self.regulations
    }

    pub fn goals(&self) -> &[LegalGoal] {
        &self.goals
    }

    pub fn catalog(&self) -> &[MethodEntry] {
        &self.catalog
    }

    /// Every regulation id is present in a validated KB.
    pub fn regulation(&self, id: RegulationId) -> &Regulation {
        self.regulations
            .iter()
            .find(|r| r.id == id)
            .expect("validated KB holds all three regulations")
    }

    /// Every goal id is present in a validated KB.
    pub fn goal(&self, id: GoalId) -> &LegalGoal {
        self.goals
            .iter()
            .find(|g| g.id == id)
            .expect("validated KB holds all eleven goals")
    }

    pub fn entry(&self, id: &str) -> Option<&MethodEntry> {
        self.catalog.iter().find(|e| e.id == id)
    }

    /// Canonical serialization: compact JSON with sorted keys and sorted sets.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("KB serializes to JSON");
        crate::canonical::to_canonical_string(&value)
    }

    /// Hex SHA-256 of [`KnowledgeBase::canonical_json`].
    pub fn fingerprint(&self) -> String {
        kb_fingerprint(self)
    }
}

pub fn kb_fingerprint(kb: &KnowledgeBase) -> String {
    hex::encode(Sha256::digest(kb.canonical_json().as_bytes()))
}
