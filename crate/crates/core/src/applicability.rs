//! Which regulations' explanation duties apply to a device.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{DeviceProfile, KnowledgeBase, LoopType, RegulationId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerFlag {
    pub name: String,
    pub value: String,
}

impl TriggerFlag {
    fn new(name: &str, value: impl ToString) -> Self {
        Self {
            name: name.to_owned(),
            value: value.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicabilityFinding {
    pub regulation: RegulationId,
    pub applies: bool,
    pub justification: String,
    /// The profile fields consulted to reach this finding.
    pub trigger_flags: Vec<TriggerFlag>,
}

/// One finding per regulation, in the order MDR, AIA, GDPR.
pub fn assess(profile: &DeviceProfile, kb: &KnowledgeBase) -> Vec<ApplicabilityFinding> {
    vec![assess_mdr(profile, kb), assess_aia(profile, kb), assess_gdpr(profile, kb)]
}

pub fn applicable_regulations(findings: &[ApplicabilityFinding]) -> BTreeSet<RegulationId> {
    findings
        .iter()
        .filter(|f| f.applies)
        .map(|f| f.regulation)
        .collect()
}

fn cited(kb: &KnowledgeBase, id: RegulationId) -> String {
    kb.regulation(id).citations().collect::<Vec<_>>().join(", ")
}

fn assess_mdr(p: &DeviceProfile, kb: &KnowledgeBase) -> ApplicabilityFinding {
    let applies = p.is_medical_device;
    let justification = if applies {
        format!(
            "Applicable (medical device): instructions for use must explain the device to its users ({}).",
            cited(kb, RegulationId::Mdr)
        )
    } else {
        "Not applicable: the device is not a medical device.".to_owned()
    };
    ApplicabilityFinding {
        regulation: RegulationId::Mdr,
        applies,
        justification,
        trigger_flags: vec![TriggerFlag::new("is_medical_device", p.is_medical_device)],
    }
}

fn assess_aia(p: &DeviceProfile, kb: &KnowledgeBase) -> ApplicabilityFinding {
    let via_conformity = p.is_medical_device && p.requires_third_party_conformity;
    let applies = via_conformity || p.listed_annex_iii;
    let justification = if applies {
        let route = match (via_conformity, p.listed_annex_iii) {
            (true, true) => {
                "medical device under third-party conformity assessment (Annex I) and listed in Annex III"
            }
            (true, false) => "medical device under third-party conformity assessment (Annex I)",
            _ => "listed in Annex III",
        };
        format!(
            "Applicable (high-risk AI system, {route}): transparency and human-oversight duties apply ({}).",
            cited(kb, RegulationId::Aia)
        )
    } else if p.is_medical_device {
        "Not applicable: not a high-risk AI system (no third-party conformity assessment under the MDR and not listed in Annex III).".to_owned()
    } else {
        "Not applicable: not a high-risk AI system (not a medical device and not listed in Annex III).".to_owned()
    };
    ApplicabilityFinding {
        regulation: RegulationId::Aia,
        applies,
        justification,
        trigger_flags: vec![
            TriggerFlag::new("is_medical_device", p.is_medical_device),
            TriggerFlag::new("requires_third_party_conformity", p.requires_third_party_conformity),
            TriggerFlag::new("listed_annex_iii", p.listed_annex_iii),
        ],
    }
}

// Closed loop is what makes a decision solely automated.
fn assess_gdpr(p: &DeviceProfile, kb: &KnowledgeBase) -> ApplicabilityFinding {
    let automated = p.loop_type == LoopType::Closed;
    let applies = automated && p.processes_personal_data && p.high_stakes_effects;
    let justification = if applies {
        format!(
            "Applicable: closed-loop, fully automated, high-stakes decision based on personal data ({}).",
            cited(kb, RegulationId::Gdpr)
        )
    } else if !automated {
        let kind = match p.loop_type {
            LoopType::Open => "an open-loop device only informs a human decision",
            _ => "a semi-closed-loop device leaves the final action to a human",
        };
        format!("Not applicable (no fully-automated decision): {kind}.")
    } else if !p.processes_personal_data {
        "Not applicable: the automated decision does not rely on personal data.".to_owned()
    } else {
        "Not applicable (no high-stakes decision): the automated decision has no legal or similarly significant effects.".to_owned()
    };
    ApplicabilityFinding {
        regulation: RegulationId::Gdpr,
        applies,
        justification,
        trigger_flags: vec![
            TriggerFlag::new("loop_type", p.loop_type),
            TriggerFlag::new("processes_personal_data", p.processes_personal_data),
            TriggerFlag::new("high_stakes_effects", p.high_stakes_effects),
        ],
    }
}
