//! What-if analysis: profile overrides and report diffs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{Audience, DeviceProfile, GoalId, RegulationId};
use crate::report::AnalysisReport;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverrideError {
    #[error("`{0}` is not of the form key=value")]
    Malformed(String),
    #[error("unknown profile field `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    BadValue { key: String, message: String },
}

/// Parse a `key=value` override.
pub fn parse_override(raw: &str) -> Result<(String, String), OverrideError> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| OverrideError::Malformed(raw.to_owned()))?;
    Ok((k.trim().to_owned(), v.trim().to_owned()))
}

const BOOL_FIELDS: &[&str] = &[
    "is_medical_device",
    "requires_third_party_conformity",
    "listed_annex_iii",
    "processes_personal_data",
    "high_stakes_effects",
];
const SET_FIELDS: &[&str] = &["model_types", "input_modalities"];
const TEXT_FIELDS: &[&str] = &["name", "loop_type", "audience"];

/// Apply overrides to a profile. Set-valued fields take comma-separated
/// literals and replace the whole set. The result is not re-validated.
pub fn apply_overrides(profile: &DeviceProfile, overrides: &[(String, String)]) -> Result<DeviceProfile, OverrideError> {
    let mut value = serde_json::to_value(profile).expect("profile serializes");
    let obj = value.as_object_mut().expect("profile is an object");
    for (key, raw) in overrides {
        let new = if BOOL_FIELDS.contains(&key.as_str()) {
            match raw.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Value::Bool(true),
                "false" | "no" | "0" => Value::Bool(false),
                _ => {
                    return Err(OverrideError::BadValue {
                        key: key.clone(),
                        message: format!("`{raw}` is not a boolean"),
                    })
                }
            }
        } else if SET_FIELDS.contains(&key.as_str()) {
            Value::Array(
                raw.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| Value::String(s.to_owned()))
                    .collect(),
            )
        } else if TEXT_FIELDS.contains(&key.as_str()) {
            Value::String(raw.clone())
        } else {
            return Err(OverrideError::UnknownKey(key.clone()));
        };
        obj.insert(key.clone(), new);
    }
    serde_json::from_value(value).map_err(|e| OverrideError::BadValue {
        key: overrides
            .iter()
            .map(|(k, _)| k.as_str())
            .find(|k| e.to_string().contains(k))
            .unwrap_or("profile")
            .to_owned(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingChange {
    pub regulation: RegulationId,
    pub before: bool,
    pub after: bool,
    pub justification: String,
}

/// Change in the set of regulations demanding one goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementChange {
    pub goal: GoalId,
    pub added_by: BTreeSet<RegulationId>,
    pub removed_by: BTreeSet<RegulationId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub findings_changed: Vec<FindingChange>,
    pub requirement_changes: Vec<RequirementChange>,
    /// Goals newly demanded by at least one regulation.
    pub goals_added: BTreeSet<GoalId>,
    /// Goals no longer demanded by at least one regulation.
    pub goals_removed: BTreeSet<GoalId>,
    pub addressable_added: BTreeSet<GoalId>,
    pub addressable_removed: BTreeSet<GoalId>,
    pub manual_added: BTreeSet<GoalId>,
    pub manual_removed: BTreeSet<GoalId>,
    pub eligible_added: Vec<String>,
    pub eligible_removed: Vec<String>,
    pub covers_added: Vec<Vec<String>>,
    pub covers_removed: Vec<Vec<String>>,
    pub min_cover_size: [Option<usize>; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audience: Option<[Audience; 2]>,
}

impl ReportDiff {
    /// True when nothing in the derivation changed (audience may still differ).
    pub fn derivation_is_empty(&self) -> bool {
        self.findings_changed.is_empty()
            && self.requirement_changes.is_empty()
            && self.manual_added.is_empty()
            && self.manual_removed.is_empty()
            && self.eligible_added.is_empty()
            && self.eligible_removed.is_empty()
            && self.covers_added.is_empty()
            && self.covers_removed.is_empty()
            && self.min_cover_size[0] == self.min_cover_size[1]
    }

    pub fn is_empty(&self) -> bool {
        self.derivation_is_empty() && self.audience.is_none()
    }
}

fn minus<T: Ord + Clone>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> BTreeSet<T> {
    a.difference(b).cloned().collect()
}

pub fn diff_reports(base: &AnalysisReport, modified: &AnalysisReport) -> ReportDiff {
    let findings_changed = base
        .findings
        .iter()
        .zip(&modified.findings)
        .filter(|(b, m)| b.applies != m.applies)
        .map(|(b, m)| FindingChange {
            regulation: b.regulation,
            before: b.applies,
            after: m.applies,
            justification: m.justification.clone(),
        })
        .collect();

    let required_by = |r: &AnalysisReport, g: GoalId| {
        r.requirements
            .iter()
            .find(|q| q.goal == g)
            .map(|q| q.required_by.clone())
            .unwrap_or_default()
    };
    let requirement_changes: Vec<RequirementChange> = GoalId::ALL
        .into_iter()
        .filter_map(|g| {
            let before = required_by(base, g);
            let after = required_by(modified, g);
            let change = RequirementChange {
                goal: g,
                added_by: minus(&after, &before),
                removed_by: minus(&before, &after),
            };
            (!change.added_by.is_empty() || !change.removed_by.is_empty()).then_some(change)
        })
        .collect();
    let goals_added: BTreeSet<GoalId> = requirement_changes
        .iter()
        .filter(|c| !c.added_by.is_empty())
        .map(|c| c.goal)
        .collect();
    let goals_removed: BTreeSet<GoalId> = requirement_changes
        .iter()
        .filter(|c| !c.removed_by.is_empty())
        .map(|c| c.goal)
        .collect();

    let manual = |r: &AnalysisReport| r.manual_goals.iter().map(|m| m.goal).collect::<BTreeSet<_>>();
    let (addr_b, addr_m) = (base.addressable_goals(), modified.addressable_goals());
    let eligible = |r: &AnalysisReport| r.eligible.iter().map(|e| e.entry_id.clone()).collect::<BTreeSet<_>>();
    let (el_b, el_m) = (eligible(base), eligible(modified));
    let covers = |r: &AnalysisReport| r.recommendation.covers.iter().cloned().collect::<BTreeSet<_>>();
    let (cov_b, cov_m) = (covers(base), covers(modified));

    let audience = (base.profile_echo.audience != modified.profile_echo.audience)
        .then_some([base.profile_echo.audience, modified.profile_echo.audience]);

    ReportDiff {
        findings_changed,
        addressable_added: goals_added.intersection(&addr_m).copied().collect(),
        addressable_removed: goals_removed.intersection(&addr_b).copied().collect(),
        requirement_changes,
        goals_added,
        goals_removed,
        manual_added: minus(&manual(modified), &manual(base)),
        manual_removed: minus(&manual(base), &manual(modified)),
        eligible_added: minus(&el_m, &el_b).into_iter().collect(),
        eligible_removed: minus(&el_b, &el_m).into_iter().collect(),
        covers_added: minus(&cov_m, &cov_b).into_iter().collect(),
        covers_removed: minus(&cov_b, &cov_m).into_iter().collect(),
        min_cover_size: [base.recommendation.min_size(), modified.recommendation.min_size()],
        audience,
    }
}

fn set_str<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|i| i.to_string()).collect();
    if parts.is_empty() {
        "-".to_owned()
    } else {
        parts.join(", ")
    }
}

fn size_str(s: Option<usize>) -> String {
    s.map_or_else(|| "none".to_owned(), |n| n.to_string())
}

/// Plain-text side-by-side rendering used by the CLI.
pub fn render_diff(diff: &ReportDiff) -> String {
    let mut out = String::new();
    if diff.is_empty() {
        out.push_str("No differences.\n");
        return out;
    }
    let _ = writeln!(out, "{:<28} {:<24} {:<24}", "", "base", "modified");
    for f in &diff.findings_changed {
        let _ = writeln!(
            out,
            "{:<28} {:<24} {:<24}",
            format!("{} applies", f.regulation),
            f.before,
            f.after
        );
    }
    let _ = writeln!(
        out,
        "{:<28} {:<24} {:<24}",
        "minimum cover size",
        size_str(diff.min_cover_size[0]),
        size_str(diff.min_cover_size[1])
    );
    if let Some([b, m]) = diff.audience {
        let _ = writeln!(out, "{:<28} {:<24} {:<24}", "audience (wording only)", b, m);
    }
    out.push('\n');
    for c in &diff.requirement_changes {
        let mut parts = Vec::new();
        if !c.added_by.is_empty() {
            parts.push(format!("+ required by {}", set_str(&c.added_by)));
        }
        if !c.removed_by.is_empty() {
            parts.push(format!("- no longer required by {}", set_str(&c.removed_by)));
        }
        let _ = writeln!(out, "goal {}: {}", c.goal, parts.join("; "));
    }
    let rows: [(&str, String); 10] = [
        ("goals added", set_str(&diff.goals_added)),
        ("goals removed", set_str(&diff.goals_removed)),
        ("addressable added", set_str(&diff.addressable_added)),
        ("addressable removed", set_str(&diff.addressable_removed)),
        ("manual added", set_str(&diff.manual_added)),
        ("manual removed", set_str(&diff.manual_removed)),
        ("eligible added", set_str(&diff.eligible_added)),
        ("eligible removed", set_str(&diff.eligible_removed)),
        ("covers added", set_str(diff.covers_added.iter().map(|c| format!("[{}]", c.join(" + "))))),
        ("covers removed", set_str(diff.covers_removed.iter().map(|c| format!("[{}]", c.join(" + "))))),
    ];
    for (label, value) in rows {
        let _ = writeln!(out, "{label:<20} {value}");
    }
    out.lines().map(|l| format!("{}\n", l.trim_end())).collect()
}
