//! Information-gain feature ranking against the binary decision.
//!
//! Gains are measured in bits (base-2 logs) over a discretized
//! [`DecisionTable`]; the top-k features form the entropy selection arm.

use std::collections::HashMap;

use thiserror::Error;

use crate::exec::map_indexed;
use crate::mask::{FeatureMask, MaskError, Provenance};
use crate::table::DecisionTable;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("no data")]
    EmptyData,
    #[error("attribute {0} is not in the table")]
    UnknownAttribute(u16),
    #[error("k={k} is outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Gain and rank of one feature (rank 1 = highest gain).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScore {
    pub feature: u16,
    pub gain: f64,
    pub rank: usize,
}

/// Shannon entropy of a discrete vector, in bits, with 0*log(0) := 0.
pub fn decision_entropy(values: &[u8]) -> Result<f64, EntropyError> {
    if values.is_empty() {
        return Err(EntropyError::EmptyData);
    }
    let mut counts: HashMap<u8, usize> = HashMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let n = values.len() as f64;
    Ok(counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// H(d) - sum over codes v of |U_v|/|U| * H(d | feature = v).
pub fn information_gain(table: &DecisionTable, feature: u16) -> Result<f64, EntropyError> {
    let column = table
        .column(feature)
        .ok_or(EntropyError::UnknownAttribute(feature))?;
    let decisions = table.decisions();
    if decisions.is_empty() {
        return Err(EntropyError::EmptyData);
    }
    let base = decision_entropy(decisions)?;
    // per code: (total, attacks)
    let mut per_code: HashMap<u32, (usize, usize)> = HashMap::new();
    for (&code, &d) in column.iter().zip(decisions) {
        let entry = per_code.entry(code).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += usize::from(d);
    }
    let n = decisions.len() as f64;
    let conditional: f64 = per_code
        .values()
        .map(|&(total, attacks)| total as f64 / n * binary_entropy(attacks, total - attacks))
        .sum();
    Ok((base - conditional).max(0.0))
}

fn binary_entropy(a: usize, b: usize) -> f64 {
    let n = (a + b) as f64;
    let term = |c: usize| {
        if c == 0 {
            0.0
        } else {
            let p = c as f64 / n;
            -p * p.log2()
        }
    };
    term(a) + term(b)
}

/// Gain per attribute, in table attribute order.
pub fn feature_gains(table: &DecisionTable) -> Result<Vec<f64>, EntropyError> {
    table
        .attributes()
        .iter()
        .map(|&a| information_gain(table, a))
        .collect()
}

/// Parallel twin of [`feature_gains`]; identical output.
#[cfg(feature = "parallel")]
pub fn par_feature_gains(table: &DecisionTable) -> Result<Vec<f64>, EntropyError> {
    if table.decisions().is_empty() {
        return Err(EntropyError::EmptyData);
    }
    let attrs = table.attributes();
    Ok(map_indexed(attrs.len(), |i| {
        information_gain(table, attrs[i]).expect("attribute comes from the table")
    }))
}

fn gains_dispatch(table: &DecisionTable) -> Result<Vec<f64>, EntropyError> {
    #[cfg(feature = "parallel")]
    {
        par_feature_gains(table)
    }
    #[cfg(not(feature = "parallel"))]
    {
        feature_gains(table)
    }
}

/// All features scored and sorted by descending gain, ties to the lower
/// feature index.
pub fn rank_features(table: &DecisionTable) -> Result<Vec<FeatureScore>, EntropyError> {
    let gains = gains_dispatch(table)?;
    let mut order: Vec<usize> = (0..gains.len()).collect();
    let attrs = table.attributes();
    order.sort_by(|&i, &j| {
        gains[j]
            .partial_cmp(&gains[i])
            .expect("gains are finite")
            .then(attrs[i].cmp(&attrs[j]))
    });
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| FeatureScore {
            feature: attrs[i],
            gain: gains[i],
            rank: rank + 1,
        })
        .collect())
}

/// Top-k features by gain as a [`FeatureMask`].
pub fn entropy_mask(table: &DecisionTable, k: usize) -> Result<FeatureMask, EntropyError> {
    let scores = rank_features(table)?;
    if k == 0 || k > scores.len() {
        return Err(EntropyError::KOutOfRange {
            k,
            max: scores.len(),
        });
    }
    let indices = scores[..k].iter().map(|s| s.feature as usize).collect();
    Ok(FeatureMask::new(indices, Provenance::Entropy)?)
}

/// Two-column report (feature, gain) in rank order.
pub fn scores_report(scores: &[FeatureScore]) -> String {
    let mut out = String::from("# feature\tgain_bits\n");
    for s in scores {
        out.push_str(&format!("{}\t{:.6}\n", s.feature, s.gain));
    }
    out
}
