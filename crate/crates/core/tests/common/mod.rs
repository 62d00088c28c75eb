//! Shared helpers for the integration suites: a by-definition rough-set
//! oracle (pairwise indiscernibility, no hashing, no refinement) and a tiny
//! deterministic record-file builder.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsids_core::table::DecisionTable;

/// A random decision table with attribute ids 1..=width.
pub fn random_table(rng: &mut ChaCha8Rng, max_objects: usize, max_attrs: usize) -> DecisionTable {
    let m = rng.gen_range(1..=max_objects);
    let width = rng.gen_range(1..=max_attrs);
    let columns: Vec<Vec<u32>> = (0..width)
        .map(|_| (0..m).map(|_| rng.gen_range(0..3)).collect())
        .collect();
    let decisions: Vec<u8> = (0..m).map(|_| rng.gen_range(0..2)).collect();
    DecisionTable::new((1..=width as u16).collect(), columns, decisions).unwrap()
}

/// All subsets of the table's attributes.
pub fn all_subsets(table: &DecisionTable) -> Vec<Vec<u16>> {
    let attrs = table.attributes();
    (0..(1usize << attrs.len()))
        .map(|bits| {
            attrs
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &a)| a)
                .collect()
        })
        .collect()
}

/// Objects indiscernible from `obj` under `attrs`, straight from the
/// definition: equal value on every attribute, checked pairwise.
fn oracle_class(table: &DecisionTable, attrs: &[u16], obj: usize) -> Vec<usize> {
    (0..table.object_count())
        .filter(|&other| {
            attrs.iter().all(|&a| {
                let col = table.column(a).unwrap();
                col[other] == col[obj]
            })
        })
        .collect()
}

/// Lower and upper approximations of `target` by enumeration.
pub fn oracle_approximations(
    table: &DecisionTable,
    attrs: &[u16],
    target: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let m = table.object_count();
    let mut in_target = vec![false; m];
    for &t in target {
        in_target[t] = true;
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for obj in 0..m {
        let class = oracle_class(table, attrs, obj);
        if class.iter().all(|&o| in_target[o]) {
            lower.push(obj);
        }
        if class.iter().any(|&o| in_target[o]) {
            upper.push(obj);
        }
    }
    (lower, upper)
}

/// Positive region by enumeration: union of the lower approximations of the
/// two decision classes.
pub fn oracle_positive_region(table: &DecisionTable, attrs: &[u16]) -> Vec<usize> {
    let decisions = table.decisions();
    let class_of = |d: u8| -> Vec<usize> {
        (0..table.object_count())
            .filter(|&o| decisions[o] == d)
            .collect()
    };
    let (lower0, _) = oracle_approximations(table, attrs, &class_of(0));
    let (lower1, _) = oracle_approximations(table, attrs, &class_of(1));
    let mut pos: Vec<usize> = lower0.into_iter().chain(lower1).collect();
    pos.sort_unstable();
    pos
}

pub fn oracle_dependency(table: &DecisionTable, attrs: &[u16]) -> f64 {
    oracle_positive_region(table, attrs).len() as f64 / table.object_count() as f64
}

/// One KDD-format line with all 41 fields; `overrides` are (1-based field,
/// token) pairs applied over an all-zero tcp/http/SF template.
pub fn kdd_line(overrides: &[(usize, &str)], label: &str) -> String {
    let mut fields: Vec<String> = vec!["0".to_string(); 41];
    fields[1] = "tcp".into();
    fields[2] = "http".into();
    fields[3] = "SF".into();
    for &(idx, token) in overrides {
        fields[idx - 1] = token.to_string();
    }
    format!("{},{label}.", fields.join(","))
}

/// A well-separated toy corpus: quiet web traffic vs SYN-flood shapes.
pub fn toy_corpus(records: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(records);
    for i in 0..records {
        if i % 2 == 0 {
            let src = rng.gen_range(120..900).to_string();
            let dst = rng.gen_range(300..4000).to_string();
            let count = rng.gen_range(1..9).to_string();
            lines.push(kdd_line(
                &[(5, &src), (6, &dst), (12, "1"), (23, &count), (29, "1.00")],
                "normal",
            ));
        } else {
            let count = rng.gen_range(400..511).to_string();
            lines.push(kdd_line(
                &[
                    (4, "S0"),
                    (23, &count),
                    (25, "1.00"),
                    (26, "1.00"),
                    (38, "1.00"),
                ],
                "neptune",
            ));
        }
    }
    lines.join("\n") + "\n"
}
