//! Fixed-width tables for `xca list`.

use xca_core::{GoalId, KnowledgeBase};

fn table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                out.push_str(cell);
            } else {
                out.push_str(&format!("{cell:<w$}  "));
            }
        }
        out.trim_end().to_owned() + "\n"
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect()));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

fn joined<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn goals(kb: &KnowledgeBase) -> String {
    let mut goals: Vec<_> = kb.goals().iter().collect();
    goals.sort_by_key(|g| g.id);
    let rows = goals
        .into_iter()
        .map(|g| {
            vec![
                g.id.to_string(),
                g.description.clone(),
                joined(&g.regulations, ", "),
                g.scope.to_string(),
                g.stage.to_string(),
                if g.xai_addressable { "yes" } else { "no" }.to_owned(),
            ]
        })
        .collect();
    table(&["ID", "DESCRIPTION", "REGULATIONS", "SCOPE", "STAGE", "ADDRESSABLE"], rows)
}

fn goal_list(ids: &std::collections::BTreeSet<GoalId>) -> String {
    joined(ids, ",")
}

pub fn methods(kb: &KnowledgeBase) -> String {
    let mut entries: Vec<_> = kb.catalog().iter().collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let rows = entries
        .into_iter()
        .map(|e| {
            let models = if e.is_model_agnostic() { "any".to_owned() } else { joined(&e.model_types, ",") };
            let inputs = if e.input_modalities.is_empty() { "any".to_owned() } else { joined(&e.input_modalities, ",") };
            vec![
                e.id.clone(),
                e.family.to_string(),
                e.scope.to_string(),
                models,
                inputs,
                goal_list(&e.goal_ids),
                e.question.clone(),
            ]
        })
        .collect();
    table(&["ID", "FAMILY", "SCOPE", "MODEL TYPES", "INPUTS", "GOALS", "QUESTION"], rows)
}

pub fn regulations(kb: &KnowledgeBase) -> String {
    let mut regs: Vec<_> = kb.regulations().iter().collect();
    regs.sort_by_key(|r| r.id);
    let rows = regs
        .into_iter()
        .map(|r| vec![r.id.to_string(), r.full_name.clone(), r.explanation_articles.join("; ")])
        .collect();
    table(&["ID", "NAME", "ARTICLES"], rows)
}
