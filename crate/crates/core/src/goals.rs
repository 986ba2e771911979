//! From applicable regulations to required legal explanatory goals.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{GoalId, KnowledgeBase, RegulationId, Scope, Stage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalRequirement {
    pub goal: GoalId,
    /// Applicable regulations demanding this goal; never empty.
    pub required_by: BTreeSet<RegulationId>,
    pub addressable: bool,
    pub description: String,
    pub scope: Scope,
    pub stage: Stage,
    /// Article citations of every regulation in `required_by`.
    pub citations: Vec<String>,
}

/// Goals required by at least one applicable regulation, sorted by goal id.
pub fn derive_goals(applicable: &BTreeSet<RegulationId>, kb: &KnowledgeBase) -> Vec<GoalRequirement> {
    let mut out: Vec<GoalRequirement> = kb
        .goals()
        .iter()
        .filter_map(|goal| {
            let required_by: BTreeSet<RegulationId> =
                goal.regulations.intersection(applicable).copied().collect();
            if required_by.is_empty() {
                return None;
            }
            let citations = required_by
                .iter()
                .flat_map(|r| kb.regulation(*r).citations())
                .collect();
            Some(GoalRequirement {
                goal: goal.id,
                required_by,
                addressable: goal.xai_addressable,
                description: goal.description.clone(),
                scope: goal.scope,
                stage: goal.stage,
                citations,
            })
        })
        .collect();
    out.sort_by_key(|r| r.goal);
    out
}

/// Split required goals into XAI-addressable and manual-only sets.
pub fn partition(requirements: &[GoalRequirement]) -> (BTreeSet<GoalId>, BTreeSet<GoalId>) {
    let (addressable, manual): (Vec<_>, Vec<_>) =
        requirements.iter().partition(|r| r.addressable);
    (
        addressable.into_iter().map(|r| r.goal).collect(),
        manual.into_iter().map(|r| r.goal).collect(),
    )
}
