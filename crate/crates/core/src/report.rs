//! End-to-end analysis and report rendering.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::applicability::{applicable_regulations, assess, ApplicabilityFinding};
use crate::canonical;
use crate::goals::{derive_goals, partition, GoalRequirement};
use crate::matching::{build_matrix, eligible_entries, CoverageMatrix};
use crate::model::{
    Audience, DeviceProfile, GoalId, KnowledgeBase, MethodFamily, RegulationId, Scope,
};
use crate::recommend::{
    explain_cover, irredundant_covers, minimal_covers, Alternatives, CoverExplanation,
    Recommendation,
};

pub const DISCLAIMER: &str = "The recommended XAI methods help meet, but do not guarantee satisfaction of, the applicable legal explanation requirements. Each method must be applied correctly and its explanations assessed case by case; manual measures remain necessary for the goals listed under Manual Actions.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManualGoal {
    pub goal: GoalId,
    pub required_by: BTreeSet<RegulationId>,
    pub action_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibleRecord {
    pub entry_id: String,
    pub family: MethodFamily,
    pub scope: Scope,
    pub question: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegulationCitation {
    pub regulation: RegulationId,
    pub full_name: String,
    pub articles: Vec<String>,
    pub format_constraints: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub profile_echo: DeviceProfile,
    pub kb_version: String,
    pub kb_fingerprint: String,
    pub findings: Vec<ApplicabilityFinding>,
    pub requirements: Vec<GoalRequirement>,
    pub manual_goals: Vec<ManualGoal>,
    pub eligible: Vec<EligibleRecord>,
    pub coverage: CoverageMatrix,
    pub recommendation: Recommendation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<Alternatives>,
    pub per_cover_explanations: Vec<CoverExplanation>,
    /// Citations of the applicable regulations, copied from the KB.
    pub citations: Vec<RegulationCitation>,
    pub disclaimer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub cap: usize,
    /// Also list irredundant covers up to this size.
    pub alternatives_up_to: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            cap: crate::recommend::DEFAULT_COVER_CAP,
            alternatives_up_to: None,
        }
    }
}

/// Run the whole pipeline. The result carries no timestamp.
pub fn analyze(profile: &DeviceProfile, kb: &KnowledgeBase, cap: usize) -> AnalysisReport {
    analyze_with(profile, kb, AnalysisOptions { cap, ..Default::default() })
}

pub fn analyze_with(profile: &DeviceProfile, kb: &KnowledgeBase, options: AnalysisOptions) -> AnalysisReport {
    let findings = assess(profile, kb);
    let applicable = applicable_regulations(&findings);
    let requirements = derive_goals(&applicable, kb);
    let (addressable, manual) = partition(&requirements);

    let manual_goals = requirements
        .iter()
        .filter(|r| manual.contains(&r.goal))
        .map(|r| ManualGoal {
            goal: r.goal,
            required_by: r.required_by.clone(),
            action_note: kb.goal(r.goal).manual_action.clone().unwrap_or_default(),
        })
        .collect();

    let eligible = eligible_entries(profile, kb);
    let coverage = build_matrix(&eligible, &addressable);
    let recommendation = minimal_covers(&coverage, options.cap);
    let alternatives = options
        .alternatives_up_to
        .map(|size| irredundant_covers(&coverage, size, options.cap));
    let per_cover_explanations = recommendation
        .covers
        .iter()
        .map(|cover| explain_cover(cover, &coverage, kb).expect("covers are matrix rows"))
        .collect();

    let citations = applicable
        .iter()
        .map(|&id| {
            let reg = kb.regulation(id);
            RegulationCitation {
                regulation: id,
                full_name: reg.full_name.clone(),
                articles: reg.explanation_articles.clone(),
                format_constraints: reg.format_constraints.clone(),
            }
        })
        .collect();

    AnalysisReport {
        profile_echo: profile.clone(),
        kb_version: kb.version().to_owned(),
        kb_fingerprint: kb.fingerprint(),
        findings,
        requirements,
        manual_goals,
        eligible: eligible
            .iter()
            .map(|e| EligibleRecord {
                entry_id: e.entry.id.clone(),
                family: e.entry.family,
                scope: e.entry.scope,
                question: e.entry.question.clone(),
                reason: e.reason.clone(),
            })
            .collect(),
        coverage,
        recommendation,
        alternatives,
        per_cover_explanations,
        citations,
        disclaimer: DISCLAIMER.to_owned(),
        generated_at: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderFormat {
    Document,
    Structured,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("structured report does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("report is inconsistent: {0}")]
    Inconsistent(String),
}

impl AnalysisReport {
    pub fn addressable_goals(&self) -> BTreeSet<GoalId> {
        self.requirements
            .iter()
            .filter(|r| r.addressable)
            .map(|r| r.goal)
            .collect()
    }

    pub fn applies(&self, regulation: RegulationId) -> bool {
        self.findings
            .iter()
            .any(|f| f.regulation == regulation && f.applies)
    }

    /// Checks the cross-field invariants of a report.
    pub fn check_consistency(&self) -> Result<(), ReportError> {
        let fail = |m: String| Err(ReportError::Inconsistent(m));
        let addressable = self.addressable_goals();
        for goal in &self.coverage.columns {
            if !addressable.contains(goal) {
                return fail(format!("matrix column {goal} is not an addressable requirement"));
            }
        }
        for m in &self.manual_goals {
            if m.action_note.trim().is_empty() {
                return fail(format!("manual goal {} has no action note", m.goal));
            }
        }
        for r in &self.requirements {
            if r.required_by.is_empty() || r.citations.is_empty() {
                return fail(format!("goal {} lacks a regulation citation", r.goal));
            }
        }
        if self.disclaimer.trim().is_empty() {
            return fail("disclaimer missing".into());
        }
        Ok(())
    }

    /// Parse a structured rendering back into a report.
    pub fn from_structured(bytes: &[u8]) -> Result<Self, ReportError> {
        let report: AnalysisReport = serde_json::from_slice(bytes)?;
        report.check_consistency()?;
        Ok(report)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn render(report: &AnalysisReport, format: RenderFormat) -> Vec<u8> {
    match format {
        RenderFormat::Structured => canonical::to_canonical_pretty(&report.to_value()).into_bytes(),
        RenderFormat::Document => render_document(report).into_bytes(),
    }
}

fn preamble(audience: Audience) -> &'static str {
    match audience {
        Audience::HealthcareProfessional => {
            "This report is addressed to healthcare professionals and technical staff. It lists the EU explanation duties triggered by the device, the legal explanatory goals behind them, and catalog entries of explainable-AI (XAI) methods that jointly address every goal that XAI can support."
        }
        Audience::Layperson | Audience::Patient => {
            "This report explains, in plain terms, which EU rules require the device to explain itself, what those explanations should help people understand, and which kinds of explanation techniques can help. Technical terms are explained in the glossary at the end."
        }
    }
}

const GLOSSARY: &[(&str, &str)] = &[
    ("XAI", "explainable AI: techniques that show how an AI model reaches its outputs"),
    ("Global explanation", "describes how the model behaves overall"),
    ("Local explanation", "describes why the model produced one particular output"),
    ("Ex-ante", "information provided before the system is used"),
    ("Ex-post", "information provided after a specific output"),
    ("Surrogate model", "a simpler, transparent model that imitates the original one"),
    ("Counterfactual", "the smallest change to the input that would change the output"),
];

fn set_str<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

fn render_document(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let p = &r.profile_echo;
    let _ = writeln!(out, "# XAI compliance report: {}\n", p.name);
    let _ = writeln!(out, "{}\n", preamble(p.audience));
    let _ = writeln!(
        out,
        "- Device: {} loop, medical device: {}, models: {}, inputs: {}",
        p.loop_type.as_str().replace('_', "-"),
        yes_no(p.is_medical_device),
        set_str(&p.model_types),
        set_str(&p.input_modalities)
    );
    let _ = writeln!(out, "- Knowledge base: version {}, fingerprint {}", r.kb_version, r.kb_fingerprint);
    if let Some(ts) = &r.generated_at {
        let _ = writeln!(out, "- Generated at: {ts}");
    }

    out.push_str("\n## Applicability\n\n");
    for f in &r.findings {
        let verdict = if f.applies { "applies" } else { "does not apply" };
        let _ = writeln!(out, "- **{}** {verdict}. {}", f.regulation, f.justification);
    }

    out.push_str("\n## Required Goals\n\n");
    if r.requirements.is_empty() {
        out.push_str("No explanation requirements identified.\n");
    } else {
        out.push_str("| Goal | Description | Required by | Scope | Stage | XAI-addressable |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for g in &r.requirements {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                g.goal,
                g.description,
                set_str(&g.required_by),
                g.scope,
                g.stage,
                yes_no(g.addressable)
            );
        }
        out.push('\n');
        for g in &r.requirements {
            let _ = writeln!(out, "- {}: {}", g.goal, g.citations.join("; "));
        }
    }

    out.push_str("\n## Manual Actions\n\n");
    if r.manual_goals.is_empty() {
        out.push_str("None.\n");
    }
    for m in &r.manual_goals {
        let _ = writeln!(
            out,
            "- [ ] Goal {} (required by {}): {}",
            m.goal,
            set_str(&m.required_by),
            m.action_note
        );
    }

    out.push_str("\n## Recommended Method Sets\n\n");
    render_recommendation(&mut out, r);

    out.push_str("\n## Citations\n\n");
    if r.citations.is_empty() {
        out.push_str("No regulation applies.\n");
    }
    for c in &r.citations {
        let _ = writeln!(out, "- {} ({})", c.regulation, c.full_name);
        for a in &c.articles {
            let _ = writeln!(out, "  - {} {}", c.regulation, a);
        }
        let _ = writeln!(out, "  - Format: {}", c.format_constraints);
    }

    if matches!(p.audience, Audience::Layperson | Audience::Patient) {
        out.push_str("\n## Glossary\n\n");
        for (term, meaning) in GLOSSARY {
            let _ = writeln!(out, "- **{term}**: {meaning}");
        }
    }

    out.push_str("\n## Disclaimer\n\n");
    out.push_str(&r.disclaimer);
    out.push('\n');
    out
}

fn render_recommendation(out: &mut String, r: &AnalysisReport) {
    let rec = &r.recommendation;
    if r.coverage.columns.is_empty() {
        out.push_str("No XAI-addressable goal is required; no method set is needed.\n");
        return;
    }
    if !rec.uncovered_goals.is_empty() {
        let _ = writeln!(
            out,
            "No eligible method addresses goal(s) {}; they need other tools or human measures.\n",
            set_str(&rec.uncovered_goals)
        );
    }
    let Some(size) = rec.min_size() else {
        out.push_str("No eligible method set covers the addressable goals.\n");
        return;
    };
    let _ = writeln!(
        out,
        "Minimum set size: {size}. {} option(s) listed{}.\n",
        rec.covers.len(),
        if rec.exhaustive { "" } else { " (more exist; raise the cap to see them)" }
    );
    for (i, exp) in r.per_cover_explanations.iter().enumerate() {
        let _ = writeln!(out, "### Option {}: {}\n", i + 1, exp.cover.join(" + "));
        for a in &exp.assignments {
            for e in &a.entries {
                let _ = writeln!(out, "- Goal {}: {} \"{}\" ({})", a.goal, e.id, e.question, e.explanation_note);
            }
        }
        out.push('\n');
    }
    if let Some(alt) = &r.alternatives {
        let _ = writeln!(out, "### Irredundant alternatives up to size {}\n", alt.max_size);
        for c in &alt.covers {
            let _ = writeln!(out, "- {}", c.join(" + "));
        }
        if !alt.exhaustive {
            out.push_str("- ... (truncated)\n");
        }
        out.push('\n');
    }
    out.push_str("Eligible entries:\n\n");
    for e in &r.eligible {
        let _ = writeln!(out, "- {} [{}, {}]: {}", e.entry_id, e.family, e.scope, e.reason);
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
