//! JSON Schema of the profile document, mirrored by clients for pre-validation.

use serde_json::{json, Value};
use xca_core::{Audience, InputModality, LoopType, ModelType};

fn literals<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|i| i.to_string()).collect()
}

pub fn profile_schema() -> Value {
    let flag = json!({ "type": "boolean" });
    let audiences = literals([Audience::HealthcareProfessional, Audience::Patient, Audience::Layperson]);
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "Device profile document",
        "type": "object",
        "additionalProperties": false,
        "required": ["device"],
        "properties": {
            "device": {
                "type": "object",
                "additionalProperties": false,
                "required": [
                    "name", "loop_type", "is_medical_device", "requires_third_party_conformity",
                    "listed_annex_iii", "processes_personal_data", "high_stakes_effects",
                    "model_types", "input_modalities", "audience"
                ],
                "properties": {
                    "name": { "type": "string" },
                    "loop_type": { "enum": literals(LoopType::ALL) },
                    "is_medical_device": flag,
                    "requires_third_party_conformity": flag,
                    "listed_annex_iii": flag,
                    "processes_personal_data": flag,
                    "high_stakes_effects": flag,
                    "model_types": {
                        "type": "array", "minItems": 1, "uniqueItems": true,
                        "items": { "enum": literals(ModelType::ALL) }
                    },
                    "input_modalities": {
                        "type": "array", "minItems": 1, "uniqueItems": true,
                        "items": { "enum": literals(InputModality::ALL) }
                    },
                    "audience": { "enum": audiences }
                },
                "if": { "properties": { "is_medical_device": { "const": false } } },
                "then": { "properties": { "requires_third_party_conformity": { "const": false } } }
            }
        }
    })
}
