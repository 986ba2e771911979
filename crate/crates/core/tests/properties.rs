use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::subsequence;
use xca_core::{
    applicable_regulations, assess, build_matrix, default_kb, derive_goals, eligible_entries, minimal_covers,
    irredundant_covers, partition, Audience, CoverageMatrix, DeviceProfile, GoalId, InputModality, LoopType,
    ModelType, RegulationId, Scope,
};

mod oracle {
    /// Every minimum-size cover of the coverable columns, by brute force over
    /// subsets of increasing size. Rows are given as (name, column set).
    pub fn min_covers(rows: &[(String, Vec<bool>)], cols: usize) -> Vec<Vec<String>> {
        let coverable: Vec<usize> = (0..cols).filter(|&c| rows.iter().any(|r| r.1[c])).collect();
        if coverable.is_empty() {
            return if cols == 0 { vec![vec![]] } else { vec![] };
        }
        let mut sorted: Vec<&(String, Vec<bool>)> = rows.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for size in 1..=sorted.len() {
            let mut found = Vec::new();
            let n = sorted.len();
            for subset in 0u32..(1 << n) {
                if subset.count_ones() as usize != size {
                    continue;
                }
                let members: Vec<usize> = (0..n).filter(|i| subset & (1 << i) != 0).collect();
                if coverable.iter().all(|&c| members.iter().any(|&i| sorted[i].1[c])) {
                    found.push(members.iter().map(|&i| sorted[i].0.clone()).collect::<Vec<_>>());
                }
            }
            if !found.is_empty() {
                found.sort();
                return found;
            }
        }
        unreachable!("the full row set covers every coverable column")
    }
}

fn to_matrix(rows: &[(String, Vec<bool>)], cols: usize) -> CoverageMatrix {
    CoverageMatrix {
        rows: rows.iter().map(|r| r.0.clone()).collect(),
        columns: GoalId::ALL[..cols].to_vec(),
        cells: rows.iter().map(|r| r.1.clone()).collect(),
        row_scopes: vec![Scope::Any; rows.len()],
    }
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (Vec<(String, Vec<bool>)>, usize)> {
    (0..=max_cols).prop_flat_map(move |cols| {
        let row = prop::collection::vec(any::<bool>(), cols);
        (prop::collection::vec(row, 0..=max_rows), Just(cols)).prop_map(|(cells, cols)| {
            // Shuffle names against row order so the solver's own sorting is exercised.
            let rows = cells
                .into_iter()
                .enumerate()
                .map(|(i, c)| (format!("R{:02}", (i * 13 + 5) % 23), c))
                .collect();
            (rows, cols)
        })
    })
}

fn profile_strategy() -> impl Strategy<Value = DeviceProfile> {
    (
        prop::sample::select(LoopType::ALL.to_vec()),
        any::<[bool; 5]>(),
        subsequence(ModelType::ALL.to_vec(), 1..=ModelType::ALL.len()),
        subsequence(InputModality::ALL.to_vec(), 1..=InputModality::ALL.len()),
        prop::sample::select(vec![
            Audience::HealthcareProfessional,
            Audience::Patient,
            Audience::Layperson,
        ]),
    )
        .prop_map(|(loop_type, flags, models, modalities, audience)| DeviceProfile {
            name: "generated".into(),
            loop_type,
            is_medical_device: flags[0],
            requires_third_party_conformity: flags[0] && flags[1],
            listed_annex_iii: flags[2],
            processes_personal_data: flags[3],
            high_stakes_effects: flags[4],
            model_types: models.into_iter().collect(),
            input_modalities: modalities.into_iter().collect(),
            audience,
        })
}

fn set_flag(p: &mut DeviceProfile, i: usize) {
    match i {
        0 => p.is_medical_device = true,
        1 => p.requires_third_party_conformity = true,
        2 => p.listed_annex_iii = true,
        3 => p.processes_personal_data = true,
        _ => p.high_stakes_effects = true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn assess_monotone_in_triggers(p in profile_strategy(), flag in 0usize..5) {
        let kb = default_kb();
        let before = assess(&p, kb);
        let mut q = p.clone();
        set_flag(&mut q, flag);
        let after = assess(&q, kb);
        prop_assert_eq!(after.len(), 3);
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(!b.applies || a.applies, "{} switched off", b.regulation);
        }
        let gdpr = after.iter().find(|f| f.regulation == RegulationId::Gdpr).unwrap();
        prop_assert!(!gdpr.applies || q.loop_type == LoopType::Closed);
    }

    #[test]
    fn derive_goals_monotone(a in subsequence(RegulationId::ALL.to_vec(), 0..=3), extra in subsequence(RegulationId::ALL.to_vec(), 0..=3)) {
        let kb = default_kb();
        let small: BTreeSet<_> = a.iter().copied().collect();
        let big: BTreeSet<_> = a.into_iter().chain(extra).collect();
        let g_small: BTreeSet<_> = derive_goals(&small, kb).into_iter().map(|r| r.goal).collect();
        let reqs = derive_goals(&big, kb);
        prop_assert!(reqs.iter().all(|r| !r.required_by.is_empty() && r.required_by.is_subset(&big)));
        let g_big: BTreeSet<_> = reqs.iter().map(|r| r.goal).collect();
        prop_assert!(g_small.is_subset(&g_big));
        let (_, manual) = partition(&reqs);
        prop_assert!(manual.iter().all(|g| matches!(g, GoalId::C | GoalId::J)));
    }

    #[test]
    fn eligible_entries_monotone(p in profile_strategy(), m in prop::sample::select(ModelType::ALL.to_vec()), i in prop::sample::select(InputModality::ALL.to_vec())) {
        let kb = default_kb();
        let before: BTreeSet<String> = eligible_entries(&p, kb).into_iter().map(|e| e.entry.id.clone()).collect();
        let mut q = p.clone();
        q.model_types.insert(m);
        q.input_modalities.insert(i);
        let after: BTreeSet<String> = eligible_entries(&q, kb).into_iter().map(|e| e.entry.id.clone()).collect();
        prop_assert!(before.is_subset(&after));
        for e in kb.catalog().iter().filter(|e| e.is_model_agnostic()) {
            prop_assert!(before.contains(&e.id));
        }
    }

    #[test]
    fn global_columns_never_hit_by_local_rows(p in profile_strategy()) {
        let kb = default_kb();
        let regs = applicable_regulations(&assess(&p, kb));
        let (addressable, _) = partition(&derive_goals(&regs, kb));
        let m = build_matrix(&eligible_entries(&p, kb), &addressable);
        for (c, g) in m.columns.iter().enumerate() {
            if kb.goal(*g).scope == Scope::Global {
                for r in 0..m.rows.len() {
                    prop_assert!(!(m.row_scopes[r] == Scope::Local && m.cell(r, c)));
                }
            }
        }
    }

    #[test]
    fn adding_a_row_never_worsens_the_cover(
        (rows, cols) in matrix_strategy(12, 9),
        extra in prop::collection::vec(any::<bool>(), 9),
    ) {
        let before = minimal_covers(&to_matrix(&rows, cols), 10);
        let mut grown = rows.clone();
        grown.push(("ZZ-new".into(), extra[..cols].to_vec()));
        let after = minimal_covers(&to_matrix(&grown, cols), 10);
        prop_assert!(after.uncovered_goals.is_subset(&before.uncovered_goals));
        if after.uncovered_goals == before.uncovered_goals {
            prop_assert!(after.min_size() <= before.min_size());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn minimal_covers_agree_with_oracle((rows, cols) in matrix_strategy(20, 11)) {
        let m = to_matrix(&rows, cols);
        let expected = oracle::min_covers(&rows, cols);
        let all = minimal_covers(&m, usize::MAX - 1);
        prop_assert!(all.exhaustive);
        prop_assert_eq!(&all.covers, &expected);
        let capped = minimal_covers(&m, 10);
        prop_assert_eq!(capped.exhaustive, expected.len() <= 10);
        prop_assert_eq!(&capped.covers[..], &expected[..expected.len().min(10)]);
    }

    #[test]
    fn returned_covers_are_irredundant((rows, cols) in matrix_strategy(14, 9)) {
        let m = to_matrix(&rows, cols);
        let coverable: BTreeSet<usize> = (0..cols).filter(|&c| rows.iter().any(|r| r.1[c])).collect();
        let covers_all = |ids: &[&String]| {
            coverable.iter().all(|&c| ids.iter().any(|id| m.cell(m.row_index(id).unwrap(), c)))
        };
        let rec = minimal_covers(&m, 10);
        let alt = irredundant_covers(&m, 3, 50);
        for cover in rec.covers.iter().chain(&alt.covers) {
            let ids: Vec<&String> = cover.iter().collect();
            prop_assert!(covers_all(&ids));
            for skip in 0..ids.len() {
                let fewer: Vec<&String> = ids.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, id)| *id).collect();
                prop_assert!(!covers_all(&fewer), "{:?} is redundant", cover);
            }
        }
    }
}
