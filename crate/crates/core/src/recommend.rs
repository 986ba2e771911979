//! Exact minimum-cardinality set cover over the coverage matrix.
//!
//! Instances are tiny (a few dozen rows, at most eleven goal columns), so the
//! solver first finds the optimum size with branch-and-bound and then lists
//! every cover of that size in lexicographic order of entry ids.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::matching::CoverageMatrix;
use crate::model::{GoalId, KnowledgeBase};

pub const DEFAULT_COVER_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    /// Minimum covers, each a sorted list of entry ids, ordered lexicographically.
    pub covers: Vec<Vec<String>>,
    pub uncovered_goals: BTreeSet<GoalId>,
    /// False when more minimum covers exist than the cap allowed to list.
    pub exhaustive: bool,
}

impl Recommendation {
    pub fn min_size(&self) -> Option<usize> {
        self.covers.first().map(Vec::len)
    }
}

/// Irredundant covers up to a size bound, the optional wider menu of options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternatives {
    pub max_size: usize,
    pub covers: Vec<Vec<String>>,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoverError {
    #[error("cover references entry `{0}` which is not a row of the coverage matrix")]
    UnknownRow(String),
}

/// Rows as bitmasks over the coverable columns, ordered by entry id.
struct Instance {
    ids: Vec<String>,
    masks: Vec<u32>,
    target: u32,
}

impl Instance {
    fn new(matrix: &CoverageMatrix) -> Self {
        assert!(matrix.columns.len() <= 32, "at most 32 goal columns are supported");
        let mut order: Vec<usize> = (0..matrix.rows.len()).collect();
        order.sort_by(|&a, &b| matrix.rows[a].cmp(&matrix.rows[b]));
        let masks: Vec<u32> = order
            .iter()
            .map(|&r| {
                matrix.cells[r]
                    .iter()
                    .enumerate()
                    .filter(|(_, &hit)| hit)
                    .fold(0u32, |m, (c, _)| m | (1 << c))
            })
            .collect();
        let target = masks.iter().fold(0, |acc, m| acc | m);
        Self {
            ids: order.iter().map(|&r| matrix.rows[r].clone()).collect(),
            masks,
            target,
        }
    }

    fn names(&self, rows: &[usize]) -> Vec<String> {
        rows.iter().map(|&r| self.ids[r].clone()).collect()
    }

    fn lower_bound(&self, remaining: u32) -> usize {
        if remaining == 0 {
            return 0;
        }
        let best = self
            .masks
            .iter()
            .map(|m| (m & remaining).count_ones())
            .max()
            .unwrap_or(0);
        if best == 0 {
            usize::MAX
        } else {
            remaining.count_ones().div_ceil(best) as usize
        }
    }

    fn min_size(&self) -> usize {
        let mut best = self.greedy_size();
        self.branch(0, 0, &mut best);
        best
    }

    fn greedy_size(&self) -> usize {
        let mut covered = 0;
        let mut used = 0;
        while covered != self.target {
            let gain = |m: &u32| (m & !covered).count_ones();
            let pick = self.masks.iter().max_by_key(|m| gain(m)).expect("target is coverable");
            covered |= pick;
            used += 1;
        }
        used
    }

    // Branch on the uncovered goal with the fewest candidate rows.
    fn branch(&self, covered: u32, depth: usize, best: &mut usize) {
        if covered == self.target {
            *best = (*best).min(depth);
            return;
        }
        let remaining = self.target & !covered;
        if depth.saturating_add(self.lower_bound(remaining)) >= *best {
            return;
        }
        let goal = (0..32)
            .filter(|b| remaining & (1 << b) != 0)
            .min_by_key(|b| self.masks.iter().filter(|m| *m & (1 << b) != 0).count())
            .expect("remaining is non-empty");
        let mut candidates: Vec<u32> = self
            .masks
            .iter()
            .copied()
            .filter(|m| m & (1 << goal) != 0)
            .collect();
        candidates.sort_by_key(|m| std::cmp::Reverse((m & remaining).count_ones()));
        candidates.dedup();
        for mask in candidates {
            self.branch(covered | mask, depth + 1, best);
        }
    }

    /// All `size`-subsets covering the target, in lexicographic order, stopping
    /// after `limit` hits.
    fn enumerate(&self, size: usize, limit: usize, irredundant_only: bool) -> Vec<Vec<usize>> {
        let n = self.masks.len();
        let mut suffix = vec![0u32; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] | self.masks[i];
        }
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(size);
        self.walk(size, 0, 0, &suffix, &mut chosen, &mut out, limit, irredundant_only);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        size: usize,
        start: usize,
        covered: u32,
        suffix: &[u32],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
        irredundant_only: bool,
    ) {
        if out.len() >= limit {
            return;
        }
        if chosen.len() == size {
            if covered == self.target && (!irredundant_only || self.is_irredundant(chosen)) {
                out.push(chosen.clone());
            }
            return;
        }
        let need = size - chosen.len();
        let remaining = self.target & !covered;
        if self.masks.len() - start < need || suffix[start] & remaining != remaining {
            return;
        }
        if self.lower_bound(remaining) > need {
            return;
        }
        for i in start..self.masks.len() {
            if self.masks[i] == 0 {
                continue;
            }
            chosen.push(i);
            self.walk(size, i + 1, covered | self.masks[i], suffix, chosen, out, limit, irredundant_only);
            chosen.pop();
            if out.len() >= limit {
                return;
            }
        }
    }

    fn is_irredundant(&self, rows: &[usize]) -> bool {
        rows.iter().all(|&r| {
            let others = rows
                .iter()
                .filter(|&&o| o != r)
                .fold(0u32, |acc, &o| acc | self.masks[o]);
            self.masks[r] & !others != 0
        })
    }
}

/// Exact minimum covers of every coverable addressable goal.
///
/// Goals whose column is all-false are reported as uncovered and excluded from
/// the target. With no columns at all the single empty cover is returned; with
/// columns but nothing coverable, no cover is returned.
pub fn minimal_covers(matrix: &CoverageMatrix, cap: usize) -> Recommendation {
    assert!(cap >= 1, "cover cap must be positive");
    let uncovered_goals = matrix.empty_columns();
    let inst = Instance::new(matrix);
    if inst.target == 0 {
        let covers = if matrix.columns.is_empty() { vec![Vec::new()] } else { Vec::new() };
        return Recommendation {
            covers,
            uncovered_goals,
            exhaustive: true,
        };
    }
    let size = inst.min_size();
    let mut found = inst.enumerate(size, cap + 1, false);
    let exhaustive = found.len() <= cap;
    found.truncate(cap);
    Recommendation {
        covers: found.iter().map(|rows| inst.names(rows)).collect(),
        uncovered_goals,
        exhaustive,
    }
}

/// Every irredundant cover of size at most `max_size`, ordered by
/// (size, entry ids), capped at `cap`.
pub fn irredundant_covers(matrix: &CoverageMatrix, max_size: usize, cap: usize) -> Alternatives {
    assert!(cap >= 1, "cover cap must be positive");
    let inst = Instance::new(matrix);
    if inst.target == 0 {
        return Alternatives {
            max_size,
            covers: if matrix.columns.is_empty() { vec![Vec::new()] } else { Vec::new() },
            exhaustive: true,
        };
    }
    let mut found: Vec<Vec<usize>> = Vec::new();
    for size in 1..=max_size.min(inst.masks.len()) {
        let room = cap + 1 - found.len();
        found.extend(inst.enumerate(size, room, true));
        if found.len() > cap {
            break;
        }
    }
    let exhaustive = found.len() <= cap;
    found.truncate(cap);
    Alternatives {
        max_size,
        covers: found.iter().map(|rows| inst.names(rows)).collect(),
        exhaustive,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringEntry {
    pub id: String,
    pub question: String,
    pub explanation_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalAssignment {
    pub goal: GoalId,
    /// Every cover member mapping to the goal, by entry id.
    pub entries: Vec<CoveringEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverExplanation {
    pub cover: Vec<String>,
    pub assignments: Vec<GoalAssignment>,
}

/// Which cover member answers which goal, with the catalog question text.
pub fn explain_cover(
    cover: &[String],
    matrix: &CoverageMatrix,
    kb: &KnowledgeBase,
) -> Result<CoverExplanation, CoverError> {
    let mut members: Vec<(usize, &str)> = Vec::with_capacity(cover.len());
    for id in cover {
        let row = matrix.row_index(id).ok_or_else(|| CoverError::UnknownRow(id.clone()))?;
        members.push((row, id.as_str()));
    }
    members.sort_by(|a, b| a.1.cmp(b.1));
    members.dedup();

    let assignments = matrix
        .columns
        .iter()
        .enumerate()
        .filter_map(|(col, &goal)| {
            let entries: Vec<CoveringEntry> = members
                .iter()
                .filter(|(row, _)| matrix.cell(*row, col))
                .map(|(_, id)| {
                    let entry = kb.entry(id);
                    CoveringEntry {
                        id: (*id).to_owned(),
                        question: entry.map(|e| e.question.clone()).unwrap_or_default(),
                        explanation_note: entry.map(|e| e.explanation_note.clone()).unwrap_or_default(),
                    }
                })
                .collect();
            (!entries.is_empty()).then_some(GoalAssignment { goal, entries })
        })
        .collect();

    Ok(CoverExplanation {
        cover: members.iter().map(|(_, id)| (*id).to_owned()).collect(),
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::default_kb;
    use crate::matching::{build_matrix, EligibleEntry};
    use GoalId::*;

    fn matrix_of(ids: &[&str], goals: &[GoalId]) -> CoverageMatrix {
        let kb = default_kb();
        let eligible: Vec<_> = ids
            .iter()
            .map(|id| EligibleEntry { entry: kb.entry(id).unwrap(), reason: "test".into() })
            .collect();
        build_matrix(&eligible, &goals.iter().copied().collect())
    }

    const RNS_GOALS: [GoalId; 9] = [A, B, D, E, F, G, H, I, K];

    #[test]
    fn counterfactual_cannot_touch_a_or_b() {
        let rec = minimal_covers(&matrix_of(&["MA-5"], &[A, B]), 10);
        assert!(rec.covers.is_empty());
        assert_eq!(rec.uncovered_goals, [A, B].into());
        assert!(rec.exhaustive);
    }

    #[test]
    fn global_shap_plus_counterfactual_is_unique_pair() {
        let rec = minimal_covers(&matrix_of(&["MA-5", "MA-3"], &RNS_GOALS), 10);
        assert_eq!(rec.covers, vec![vec!["MA-3".to_owned(), "MA-5".to_owned()]]);
        assert!(rec.uncovered_goals.is_empty());
    }

    #[test]
    fn no_columns_yields_empty_cover() {
        let rec = minimal_covers(&matrix_of(&["MA-1"], &[]), 10);
        assert_eq!(rec.covers, vec![Vec::<String>::new()]);
        let rec = minimal_covers(&matrix_of(&[], &[]), 3);
        assert_eq!(rec.covers, vec![Vec::<String>::new()]);
    }

    #[test]
    fn no_rows_leaves_everything_uncovered() {
        let rec = minimal_covers(&matrix_of(&[], &[A, D]), 10);
        assert!(rec.covers.is_empty());
        assert_eq!(rec.uncovered_goals, [A, D].into());
    }

    #[test]
    fn cap_truncates_and_flags() {
        let m = matrix_of(&["MA-1", "MS-3", "MS-4"], &RNS_GOALS);
        let rec = minimal_covers(&m, 2);
        assert_eq!(rec.covers, vec![vec!["MA-1".to_owned()], vec!["MS-3".to_owned()]]);
        assert!(!rec.exhaustive);
        let rec = minimal_covers(&m, 3);
        assert_eq!(rec.covers.len(), 3);
        assert!(rec.exhaustive);
    }

    #[test]
    fn covers_sorted_by_id_even_if_rows_are_not() {
        let m = CoverageMatrix {
            rows: vec!["z".into(), "b".into(), "a".into()],
            columns: vec![A, B],
            cells: vec![vec![true, true], vec![true, false], vec![false, true]],
            row_scopes: vec![crate::model::Scope::Global; 3],
        };
        let rec = minimal_covers(&m, 10);
        assert_eq!(rec.covers, vec![vec!["z".to_owned()]]);
        let alt = irredundant_covers(&m, 3, 10);
        assert_eq!(
            alt.covers,
            vec![vec!["z".to_owned()], vec!["a".to_owned(), "b".to_owned()]]
        );
    }

    #[test]
    fn irredundant_menu_includes_mixes() {
        let m = matrix_of(&["MA-1", "MA-3", "MA-5", "MS-4"], &RNS_GOALS);
        let alt = irredundant_covers(&m, 3, 50);
        assert_eq!(alt.covers[0], vec!["MA-1"]);
        assert_eq!(alt.covers[1], vec!["MS-4"]);
        assert_eq!(alt.covers[2], vec!["MA-3", "MA-5"]);
        assert_eq!(alt.covers.len(), 3);
    }

    #[test]
    fn explain_surrogate_cover() {
        let m = matrix_of(&["MA-1", "MA-2"], &RNS_GOALS);
        let exp = explain_cover(&["MA-1".to_owned()], &m, default_kb()).unwrap();
        assert_eq!(exp.assignments.len(), 9);
        for a in &exp.assignments {
            assert_eq!(a.entries.len(), 1);
            assert_eq!(a.entries[0].question, "What is the inner logic of the model?");
        }
    }

    #[test]
    fn explain_two_row_cover_lists_shared_goal_twice() {
        let m = matrix_of(&["MA-3", "MA-5"], &RNS_GOALS);
        let exp = explain_cover(&["MA-5".to_owned(), "MA-3".to_owned()], &m, default_kb()).unwrap();
        assert_eq!(exp.cover, vec!["MA-3", "MA-5"]);
        let f = exp.assignments.iter().find(|a| a.goal == F).unwrap();
        let ids: Vec<_> = f.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["MA-3", "MA-5"]);
        let a = exp.assignments.iter().find(|a| a.goal == A).unwrap();
        assert_eq!(a.entries.len(), 1);
        let e = exp.assignments.iter().find(|a| a.goal == E).unwrap();
        assert_eq!(e.entries[0].id, "MA-5");
    }

    #[test]
    fn explain_empty_and_unknown() {
        let m = matrix_of(&["MA-1"], &RNS_GOALS);
        let exp = explain_cover(&[], &m, default_kb()).unwrap();
        assert!(exp.assignments.is_empty());
        assert_eq!(
            explain_cover(&["MS-9".to_owned()], &m, default_kb()),
            Err(CoverError::UnknownRow("MS-9".into()))
        );
    }
}
