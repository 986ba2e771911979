//! Catalog filtering against a device profile and the goal coverage matrix.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{DeviceProfile, GoalId, KnowledgeBase, MethodEntry, Scope};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EligibleEntry<'kb> {
    pub entry: &'kb MethodEntry,
    pub reason: String,
}

/// Catalog entries usable for the profile's models and inputs, sorted by id.
pub fn eligible_entries<'kb>(profile: &DeviceProfile, kb: &'kb KnowledgeBase) -> Vec<EligibleEntry<'kb>> {
    let mut out: Vec<EligibleEntry<'kb>> = kb
        .catalog()
        .iter()
        .filter_map(|entry| eligibility_reason(entry, profile).map(|reason| EligibleEntry { entry, reason }))
        .collect();
    out.sort_by(|a, b| a.entry.id.cmp(&b.entry.id));
    out
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

fn eligibility_reason(entry: &MethodEntry, profile: &DeviceProfile) -> Option<String> {
    let mut reason = if entry.is_model_agnostic() {
        "model-agnostic".to_owned()
    } else {
        let matched: BTreeSet<_> = entry.model_types.intersection(&profile.model_types).collect();
        if matched.is_empty() {
            return None;
        }
        let mut r = format!("matches model type {}", join(&matched));
        let unmatched: Vec<_> = profile.model_types.difference(&entry.model_types).collect();
        if !unmatched.is_empty() {
            r.push_str(&format!(" (not applicable to {})", join(unmatched)));
        }
        r
    };
    if !entry.input_modalities.is_empty() {
        let matched: Vec<_> = entry.input_modalities.intersection(&profile.input_modalities).collect();
        if matched.is_empty() {
            return None;
        }
        reason.push_str(&format!("; {} input", join(matched)));
    }
    Some(reason)
}

/// Which eligible entry maps to which addressable goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<GoalId>,
    /// `cells[r][c]` is true iff entry `rows[r]` maps to goal `columns[c]`.
    pub cells: Vec<Vec<bool>>,
    /// Scope of each row's entry, kept for the global-goal column check.
    pub row_scopes: Vec<Scope>,
}

impl CoverageMatrix {
    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.rows.iter().position(|r| r == id)
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    /// Goals of a row, in column order.
    pub fn row_goals(&self, row: usize) -> impl Iterator<Item = GoalId> + '_ {
        self.columns
            .iter()
            .zip(&self.cells[row])
            .filter(|(_, &hit)| hit)
            .map(|(g, _)| *g)
    }

    /// Columns no row covers.
    pub fn empty_columns(&self) -> BTreeSet<GoalId> {
        (0..self.columns.len())
            .filter(|&c| self.cells.iter().all(|row| !row[c]))
            .map(|c| self.columns[c])
            .collect()
    }
}

pub fn build_matrix(eligible: &[EligibleEntry<'_>], addressable: &BTreeSet<GoalId>) -> CoverageMatrix {
    let mut sorted: Vec<&EligibleEntry<'_>> = eligible.iter().collect();
    sorted.sort_by(|a, b| a.entry.id.cmp(&b.entry.id));
    let columns: Vec<GoalId> = addressable.iter().copied().collect();
    CoverageMatrix {
        rows: sorted.iter().map(|e| e.entry.id.clone()).collect(),
        cells: sorted
            .iter()
            .map(|e| columns.iter().map(|g| e.entry.goal_ids.contains(g)).collect())
            .collect(),
        row_scopes: sorted.iter().map(|e| e.entry.scope).collect(),
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::default_kb;
    use crate::model::{Audience, InputModality, LoopType, ModelType};
    use GoalId::*;

    fn profile(models: &[ModelType], inputs: &[InputModality]) -> DeviceProfile {
        DeviceProfile {
            name: "t".into(),
            loop_type: LoopType::Closed,
            is_medical_device: true,
            requires_third_party_conformity: true,
            listed_annex_iii: false,
            processes_personal_data: true,
            high_stakes_effects: true,
            model_types: models.iter().copied().collect(),
            input_modalities: inputs.iter().copied().collect(),
            audience: Audience::Patient,
        }
    }

    fn ids(eligible: &[EligibleEntry<'_>]) -> Vec<String> {
        eligible.iter().map(|e| e.entry.id.clone()).collect()
    }

    #[test]
    fn svm_tabular() {
        let p = profile(&[ModelType::Svm], &[InputModality::Tabular]);
        let got = ids(&eligible_entries(&p, default_kb()));
        let mut expected: Vec<String> = (1..=9).map(|i| format!("MA-{i}")).collect();
        expected.extend(["MS-3".to_owned(), "MS-9".to_owned()]);
        assert_eq!(got, expected);
    }

    #[test]
    fn other_other_only_agnostic() {
        let p = profile(&[ModelType::Other], &[InputModality::Other]);
        let got = eligible_entries(&p, default_kb());
        assert_eq!(got.len(), 9);
        assert!(got.iter().all(|e| e.entry.is_model_agnostic() && e.reason == "model-agnostic"));
    }

    #[test]
    fn partial_eligibility_is_explained() {
        let p = profile(&[ModelType::Dnn, ModelType::Svm], &[InputModality::TimeSeries]);
        let got = eligible_entries(&p, default_kb());
        let ts = got.iter().find(|e| e.entry.id == "TS-3").unwrap();
        assert_eq!(ts.reason, "matches model type dnn (not applicable to svm); time_series input");
    }

    #[test]
    fn surrogate_row_all_true() {
        let kb = default_kb();
        let eligible = vec![EligibleEntry { entry: kb.entry("MA-1").unwrap(), reason: "model-agnostic".into() }];
        let addressable: BTreeSet<_> = [A, B, D, E, F, G, H, I, K].into();
        let m = build_matrix(&eligible, &addressable);
        assert_eq!(m.rows, vec!["MA-1"]);
        assert_eq!(m.cells, vec![vec![true; 9]]);
    }

    #[test]
    fn lime_row_only_d() {
        let kb = default_kb();
        let eligible = vec![EligibleEntry { entry: kb.entry("MA-2").unwrap(), reason: "model-agnostic".into() }];
        let m = build_matrix(&eligible, &[A, B, D].into());
        assert_eq!(m.cells, vec![vec![false, false, true]]);
        assert_eq!(m.empty_columns(), [A, B].into());
    }

    #[test]
    fn empty_eligible_zero_rows() {
        let m = build_matrix(&[], &[A].into());
        assert!(m.rows.is_empty() && m.cells.is_empty());
        assert_eq!(m.columns, vec![A]);
    }
}
