//! Rough-set machinery over a [`DecisionTable`]: indiscernibility partitions,
//! lower/upper approximations with the boundary region and definability
//! classification, positive-region dependency, and a greedy reduct search.
//!
//! Partitions are computed by hashing value tuples (no pairwise object
//! comparison), so grouping is O(m * |B|). The greedy search refines a label
//! vector incrementally and compares integer positive-region counts, never
//! floats, so "dependency preserved" holds to exact rational equality.

use std::collections::HashMap;

use thiserror::Error;

use crate::exec::map_indexed;
use crate::mask::{FeatureMask, MaskError, Provenance};
use crate::table::DecisionTable;

#[derive(Debug, Error)]
pub enum RoughSetError {
    #[error("attribute {0} is not in the table")]
    UnknownAttribute(u16),
    #[error("object id {0} is outside the universe")]
    UnknownObject(usize),
    #[error("the universe is empty")]
    EmptyUniverse,
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// How well a target set can be characterized by an attribute subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definability {
    /// Lower and upper approximations coincide.
    Definable,
    /// Lower non-empty and upper short of the universe.
    RoughlyDefinable,
    /// Lower non-empty but upper covers the universe.
    ExternallyIndefinable,
    /// Lower empty while upper stays short of the universe.
    InternallyIndefinable,
    /// Lower empty and upper covers the universe.
    TotallyIndefinable,
}

impl Definability {
    pub fn as_str(self) -> &'static str {
        match self {
            Definability::Definable => "definable",
            Definability::RoughlyDefinable => "roughly definable",
            Definability::ExternallyIndefinable => "externally indefinable",
            Definability::InternallyIndefinable => "internally indefinable",
            Definability::TotallyIndefinable => "totally indefinable",
        }
    }
}

/// Equivalence classes of the indiscernibility relation over an attribute
/// subset. Classes and their members are sorted for deterministic output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub attributes: Vec<u16>,
    pub classes: Vec<Vec<usize>>,
}

/// Lower/upper approximations of a target set, the boundary between them,
/// and the definability classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproximationResult {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub boundary: Vec<usize>,
    pub definability: Definability,
}

fn check_attributes(table: &DecisionTable, attrs: &[u16]) -> Result<(), RoughSetError> {
    for &a in attrs {
        if table.column(a).is_none() {
            return Err(RoughSetError::UnknownAttribute(a));
        }
    }
    Ok(())
}

/// Class label per object under the subset `attrs` (empty subset: one class).
fn labels_for(table: &DecisionTable, attrs: &[u16]) -> Vec<u32> {
    let mut labels = vec![0u32; table.object_count()];
    for &a in attrs {
        let column = table.column(a).expect("attribute checked");
        labels = refine(&labels, column);
    }
    labels
}

/// Splits every label class by the codes of one more column. New labels are
/// assigned in first-appearance order, so the result is deterministic.
fn refine(labels: &[u32], column: &[u32]) -> Vec<u32> {
    let mut next = 0u32;
    let mut seen: HashMap<(u32, u32), u32> = HashMap::with_capacity(labels.len());
    labels
        .iter()
        .zip(column)
        .map(|(&l, &c)| {
            *seen.entry((l, c)).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Size of the positive region given a label vector: objects whose class is
/// pure in the decision.
fn positive_count_of(labels: &[u32], decisions: &[u8]) -> usize {
    // per label: (count, decision of first member, still pure)
    let mut stats: HashMap<u32, (usize, u8, bool)> = HashMap::new();
    for (&l, &d) in labels.iter().zip(decisions) {
        let entry = stats.entry(l).or_insert((0, d, true));
        entry.0 += 1;
        if entry.1 != d {
            entry.2 = false;
        }
    }
    stats
        .values()
        .filter(|(_, _, pure)| *pure)
        .map(|(n, _, _)| n)
        .sum()
}

fn positive_count(table: &DecisionTable, attrs: &[u16]) -> Result<usize, RoughSetError> {
    check_attributes(table, attrs)?;
    Ok(positive_count_of(
        &labels_for(table, attrs),
        table.decisions(),
    ))
}

/// Groups the universe by equal value tuples over `attrs`.
pub fn partition(table: &DecisionTable, attrs: &[u16]) -> Result<Partition, RoughSetError> {
    check_attributes(table, attrs)?;
    let labels = labels_for(table, attrs);
    let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
    for (obj, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(obj);
    }
    let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
    classes.sort_by_key(|class| class[0]);
    Ok(Partition {
        attributes: attrs.to_vec(),
        classes,
    })
}

/// Lower/upper approximations of `target` under `attrs`.
///
/// The lower approximation unions the classes wholly inside the target, the
/// upper unions the classes that intersect it, and the boundary is their
/// difference. Definability follows the lower-empty / upper-covers-universe
/// tests, with a coinciding pair reported as definable.
pub fn approximate(
    table: &DecisionTable,
    attrs: &[u16],
    target: &[usize],
) -> Result<ApproximationResult, RoughSetError> {
    let m = table.object_count();
    let mut in_target = vec![false; m];
    for &obj in target {
        if obj >= m {
            return Err(RoughSetError::UnknownObject(obj));
        }
        in_target[obj] = true;
    }
    let parts = partition(table, attrs)?;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for class in &parts.classes {
        let hits = class.iter().filter(|&&obj| in_target[obj]).count();
        if hits == class.len() {
            lower.extend_from_slice(class);
        }
        if hits > 0 {
            upper.extend_from_slice(class);
        }
    }
    lower.sort_unstable();
    upper.sort_unstable();
    let boundary: Vec<usize> = upper
        .iter()
        .copied()
        .filter(|obj| lower.binary_search(obj).is_err())
        .collect();
    let definability = if boundary.is_empty() {
        Definability::Definable
    } else {
        match (!lower.is_empty(), upper.len() != m) {
            (true, true) => Definability::RoughlyDefinable,
            (true, false) => Definability::ExternallyIndefinable,
            (false, true) => Definability::InternallyIndefinable,
            (false, false) => Definability::TotallyIndefinable,
        }
    };
    Ok(ApproximationResult {
        lower,
        upper,
        boundary,
        definability,
    })
}

/// Union of the lower approximations of both decision classes: the objects
/// whose class under `attrs` is decision-pure.
pub fn positive_region(table: &DecisionTable, attrs: &[u16]) -> Result<Vec<usize>, RoughSetError> {
    check_attributes(table, attrs)?;
    let labels = labels_for(table, attrs);
    let decisions = table.decisions();
    let mut purity: HashMap<u32, (u8, bool)> = HashMap::new();
    for (&l, &d) in labels.iter().zip(decisions) {
        let entry = purity.entry(l).or_insert((d, true));
        if entry.0 != d {
            entry.1 = false;
        }
    }
    Ok((0..labels.len())
        .filter(|&obj| purity[&labels[obj]].1)
        .collect())
}

/// Dependency degree |POS_B(d)| / |U|.
pub fn dependency(table: &DecisionTable, attrs: &[u16]) -> Result<f64, RoughSetError> {
    if table.object_count() == 0 {
        return Err(RoughSetError::EmptyUniverse);
    }
    Ok(positive_count(table, attrs)? as f64 / table.object_count() as f64)
}

/// Positive-region sizes of `base + candidate` for every candidate, in
/// candidate order. This is the inner scan of one greedy round.
pub fn candidate_positive_counts(
    table: &DecisionTable,
    base: &[u16],
    candidates: &[u16],
) -> Result<Vec<usize>, RoughSetError> {
    check_attributes(table, base)?;
    check_attributes(table, candidates)?;
    let labels = labels_for(table, base);
    Ok(candidates
        .iter()
        .map(|&c| scan_candidate(table, &labels, c))
        .collect())
}

/// Parallel twin of [`candidate_positive_counts`]; identical output.
#[cfg(feature = "parallel")]
pub fn par_candidate_positive_counts(
    table: &DecisionTable,
    base: &[u16],
    candidates: &[u16],
) -> Result<Vec<usize>, RoughSetError> {
    check_attributes(table, base)?;
    check_attributes(table, candidates)?;
    let labels = labels_for(table, base);
    Ok(map_indexed(candidates.len(), |i| {
        scan_candidate(table, &labels, candidates[i])
    }))
}

fn scan_candidate(table: &DecisionTable, base_labels: &[u32], candidate: u16) -> usize {
    let refined = refine(
        base_labels,
        table.column(candidate).expect("attribute checked"),
    );
    positive_count_of(&refined, table.decisions())
}

fn round_counts(
    table: &DecisionTable,
    base: &[u16],
    candidates: &[u16],
) -> Result<Vec<usize>, RoughSetError> {
    #[cfg(feature = "parallel")]
    {
        par_candidate_positive_counts(table, base, candidates)
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidate_positive_counts(table, base, candidates)
    }
}

/// Greedy forward selection of attributes by positive-region gain (ties to
/// the lowest feature index), followed by a backward pass that drops any
/// attribute whose removal keeps the full-set dependency. The result always
/// satisfies `dependency(mask) == dependency(all attributes)` exactly.
pub fn greedy_reduct(table: &DecisionTable) -> Result<FeatureMask, RoughSetError> {
    if table.object_count() == 0 {
        return Err(RoughSetError::EmptyUniverse);
    }
    let mut all: Vec<u16> = table.attributes().to_vec();
    all.sort_unstable();
    let full = positive_count(table, &all)?;

    let mut selected: Vec<u16> = Vec::new();
    let mut labels = vec![0u32; table.object_count()];
    let mut current = positive_count_of(&labels, table.decisions());
    while current < full {
        let candidates: Vec<u16> = all
            .iter()
            .copied()
            .filter(|a| !selected.contains(a))
            .collect();
        let counts = round_counts(table, &selected, &candidates)?;
        let (best_pos, &best_attr) = candidates
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| counts[*i].cmp(&counts[*j]).then(b.cmp(a)))
            .map(|(i, a)| (counts[i], a))
            .expect("candidates non-empty while below full dependency");
        selected.push(best_attr);
        labels = refine(&labels, table.column(best_attr).expect("attribute checked"));
        current = best_pos;
    }

    // backward pass, ascending feature index
    selected.sort_unstable();
    let mut keep = selected;
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        if positive_count(table, &trial)? == full {
            keep = trial;
        } else {
            i += 1;
        }
    }

    Ok(FeatureMask::new(
        keep.iter().map(|&a| a as usize).collect(),
        Provenance::Reduct,
    )?)
}

/// The shipped 29-feature reference subset, by 1-based feature index.
pub fn reference_mask() -> FeatureMask {
    FeatureMask::new(
        vec![
            1, 2, 5, 6, 8, 11, 12, 13, 14, 16, 17, 18, 19, 23, 25, 27, 29, 30, 31, 32, 33, 34, 35,
            36, 37, 38, 39, 40, 41,
        ],
        Provenance::Reference,
    )
    .expect("reference indices are valid")
}
