//! Equal-frequency discretization of continuous features.
//!
//! Codes are assigned by counting cut points strictly below a value, so
//! discretization is monotone per feature and out-of-range values clamp to
//! the edge bins. Cut points sit at midpoints between distinct training
//! values; a run of equal values is never split across bins. Features with at
//! most `bin_count` distinct values keep one code per distinct value.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::exec::map_indexed;
use crate::kdd::NumericInstance;
use crate::mask::FeatureMask;
use crate::table::{DecisionTable, TableError};

#[derive(Debug, Error)]
pub enum DiscretizeError {
    #[error("no training data")]
    EmptyData,
    #[error("bin count must be at least 2, got {0}")]
    BadBinCount(usize),
    #[error("row has {found} features, model expects {expected}")]
    MaskMismatch { expected: usize, found: usize },
    #[error("malformed model text: {0}")]
    Format(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-feature cut points fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningModel {
    mask: FeatureMask,
    bin_count: usize,
    cuts: Vec<Vec<f64>>,
}

/// Fits equal-frequency cut points for every masked feature.
pub fn fit_bins(
    data: &[NumericInstance],
    mask: &FeatureMask,
    bin_count: usize,
) -> Result<BinningModel, DiscretizeError> {
    if data.is_empty() {
        return Err(DiscretizeError::EmptyData);
    }
    if bin_count < 2 {
        return Err(DiscretizeError::BadBinCount(bin_count));
    }
    let cuts = map_indexed(mask.len(), |pos| {
        let feature = mask.indices()[pos];
        let mut values: Vec<f64> = data.iter().map(|inst| inst.features[feature - 1]).collect();
        values.sort_by(f64::total_cmp);
        cut_points(&values, bin_count)
    });
    Ok(BinningModel {
        mask: mask.clone(),
        bin_count,
        cuts,
    })
}

/// Cut points for one sorted value column.
pub fn cut_points(sorted: &[f64], bin_count: usize) -> Vec<f64> {
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let mut distinct = 0usize;
    for i in 0..n {
        if i == 0 || sorted[i] > sorted[i - 1] {
            distinct += 1;
        }
    }
    let mut cuts = Vec::new();
    if distinct <= bin_count {
        // identity binning: one code per distinct value
        for i in 1..n {
            if sorted[i] > sorted[i - 1] {
                cuts.push(midpoint(sorted[i - 1], sorted[i]));
            }
        }
        return cuts;
    }
    for k in 1..bin_count {
        let target = k as f64 * n as f64 / bin_count as f64;
        if let Some(p) = nearest_boundary(sorted, target) {
            let cut = midpoint(sorted[p - 1], sorted[p]);
            if cuts.last() != Some(&cut) {
                cuts.push(cut);
            }
        }
    }
    cuts
}

/// Nearest position `p` in 1..n to `target` with `sorted[p-1] < sorted[p]`,
/// i.e. a boundary that does not split a run of equal values. Interior-less
/// columns return `None`; equidistant candidates resolve to the smaller `p`.
fn nearest_boundary(sorted: &[f64], target: f64) -> Option<usize> {
    let n = sorted.len();
    let start = (target.round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut best: Option<(f64, usize)> = None;
    fn consider(best: &mut Option<(f64, usize)>, sorted: &[f64], target: f64, p: usize) {
        if p >= 1 && p < sorted.len() && sorted[p - 1] < sorted[p] {
            let dist = (p as f64 - target).abs();
            match *best {
                Some((d, bp)) if d < dist || (d == dist && bp < p) => {}
                _ => *best = Some((dist, p)),
            }
        }
    }
    for offset in 0..n {
        consider(&mut best, sorted, target, start.saturating_sub(offset));
        consider(&mut best, sorted, target, start + offset);
        // a valid boundary within `offset` of the start can no longer be beaten
        if let Some((d, _)) = best {
            if d <= offset as f64 {
                break;
            }
        }
    }
    best.map(|(_, p)| p)
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) / 2.0
}

impl BinningModel {
    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn cuts(&self, position: usize) -> &[f64] {
        &self.cuts[position]
    }

    /// Number of codes the masked feature at `position` can take.
    pub fn bins(&self, position: usize) -> usize {
        self.cuts[position].len() + 1
    }

    /// Code for a value of the masked feature at `position`: the number of
    /// cut points strictly below it.
    pub fn code(&self, position: usize, value: f64) -> u32 {
        self.cuts[position].partition_point(|&c| c < value) as u32
    }

    /// Discrete codes for a full 41-feature instance, in mask order.
    pub fn apply(&self, instance: &NumericInstance) -> Vec<u32> {
        self.mask
            .indices()
            .iter()
            .enumerate()
            .map(|(pos, &feature)| self.code(pos, instance.features[feature - 1]))
            .collect()
    }

    /// [`apply`](Self::apply) for a bare masked row (must match the mask
    /// length).
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<u32>, DiscretizeError> {
        if row.len() != self.mask.len() {
            return Err(DiscretizeError::MaskMismatch {
                expected: self.mask.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(pos, &v)| self.code(pos, v))
            .collect())
    }

    /// Discretizes a dataset into a [`DecisionTable`] over the model's mask.
    pub fn build_table(&self, data: &[NumericInstance]) -> Result<DecisionTable, DiscretizeError> {
        let rows = map_indexed(data.len(), |i| self.apply(&data[i]));
        let decisions: Vec<u8> = data.iter().map(NumericInstance::decision).collect();
        let attributes: Vec<u16> = self.mask.indices().iter().map(|&i| i as u16).collect();
        Ok(DecisionTable::from_rows(attributes, &rows, decisions)?)
    }

    /// Line-oriented text form: a header, then one comma-separated cut list
    /// per masked feature (possibly empty).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# bins={} mask={}\n",
            self.bin_count,
            self.mask
                .indices()
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        for cuts in &self.cuts {
            let line: Vec<String> = cuts.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DiscretizeError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| DiscretizeError::Format("empty".into()))?;
        let header = header
            .strip_prefix("# bins=")
            .ok_or_else(|| DiscretizeError::Format("missing header".into()))?;
        let (bins, mask_part) = header
            .split_once(" mask=")
            .ok_or_else(|| DiscretizeError::Format("missing mask".into()))?;
        let bin_count: usize = bins
            .parse()
            .map_err(|_| DiscretizeError::Format("bad bin count".into()))?;
        let indices: Result<Vec<usize>, _> =
            mask_part.split(',').map(|t| t.trim().parse()).collect();
        let indices = indices.map_err(|_| DiscretizeError::Format("bad mask index".into()))?;
        let mask = FeatureMask::new(indices, crate::mask::Provenance::Full)
            .map_err(|e| DiscretizeError::Format(e.to_string()))?;
        let mut cuts = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                cuts.push(Vec::new());
                continue;
            }
            let parsed: Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            cuts.push(parsed.map_err(|_| DiscretizeError::Format("bad cut value".into()))?);
        }
        if cuts.len() != mask.len() {
            return Err(DiscretizeError::Format(format!(
                "expected {} cut lines, found {}",
                mask.len(),
                cuts.len()
            )));
        }
        Ok(BinningModel {
            mask,
            bin_count,
            cuts,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), DiscretizeError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DiscretizeError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdd::AttackClass;
    use crate::mask::Provenance;
    use proptest::prelude::*;

    fn instances(columns: &[Vec<f64>]) -> Vec<NumericInstance> {
        let rows = columns[0].len();
        (0..rows)
            .map(|r| {
                let mut features = [0.0; 41];
                for (c, col) in columns.iter().enumerate() {
                    features[c] = col[r];
                }
                NumericInstance {
                    features,
                    class: AttackClass::Normal,
                }
            })
            .collect()
    }

    fn single_feature_model(values: Vec<f64>, bins: usize) -> BinningModel {
        let data = instances(&[values]);
        let mask = FeatureMask::new(vec![1], Provenance::Full).unwrap();
        fit_bins(&data, &mask, bins).unwrap()
    }

    #[test]
    fn three_zeros_one_one_splits_between_them() {
        let model = single_feature_model(vec![0.0, 0.0, 0.0, 1.0], 2);
        assert_eq!(model.cuts(0), &[0.5]);
        let codes: Vec<u32> = [0.0, 0.0, 0.0, 1.0]
            .iter()
            .map(|&v| model.code(0, v))
            .collect();
        assert_eq!(codes, vec![0, 0, 0, 1]);
    }

    #[test]
    fn constant_feature_has_no_cuts() {
        let model = single_feature_model(vec![7.0; 10], 4);
        assert!(model.cuts(0).is_empty());
        assert_eq!(model.code(0, 7.0), 0);
        assert_eq!(model.code(0, 100.0), 0);
    }

    #[test]
    fn few_distinct_values_get_identity_binning() {
        let model = single_feature_model(vec![1.0, 2.0, 2.0, 3.0, 3.0, 3.0], 4);
        assert_eq!(model.cuts(0).len(), 2);
        assert_eq!(model.code(0, 1.0), 0);
        assert_eq!(model.code(0, 2.0), 1);
        assert_eq!(model.code(0, 3.0), 2);
    }

    #[test]
    fn codes_count_cuts_strictly_below() {
        let model = single_feature_model((0..100).map(f64::from).collect(), 2);
        // one median cut
        assert_eq!(model.cuts(0).len(), 1);
        let cut = model.cuts(0)[0];
        assert_eq!(model.code(0, cut - 1.0), 0);
        assert_eq!(model.code(0, cut + 1.0), 1);
        // clamp below minimum and above maximum
        assert_eq!(model.code(0, -5.0), 0);
        assert_eq!(model.code(0, 1e9), 1);
    }

    #[test]
    fn equal_frequency_on_uniform_data_uses_all_bins() {
        let model = single_feature_model((0..1000).map(f64::from).collect(), 10);
        assert_eq!(model.bins(0), 10);
    }

    #[test]
    fn heavy_run_is_not_split() {
        // 90 zeros then 10 distinct values; 10 requested bins
        let mut values: Vec<f64> = vec![0.0; 90];
        values.extend((1..=10).map(f64::from));
        let model = single_feature_model(values, 10);
        // every cut is above the zero run
        assert!(model.cuts(0).iter().all(|&c| c > 0.0));
        assert_eq!(model.code(0, 0.0), 0);
    }

    #[test]
    fn build_table_uses_mask_and_decisions() {
        let mut data = instances(&[vec![0.0, 5.0, 9.0], vec![1.0, 1.0, 2.0]]);
        data[2].class = AttackClass::DoS;
        let mask = FeatureMask::new(vec![1, 2], Provenance::Full).unwrap();
        let model = fit_bins(&data, &mask, 3).unwrap();
        let table = model.build_table(&data).unwrap();
        assert_eq!(table.attributes(), &[1, 2]);
        assert_eq!(table.decisions(), &[0, 0, 1]);
    }

    #[test]
    fn empty_data_and_bad_bin_count_are_rejected() {
        let mask = FeatureMask::new(vec![1], Provenance::Full).unwrap();
        assert!(matches!(
            fit_bins(&[], &mask, 4),
            Err(DiscretizeError::EmptyData)
        ));
        let data = instances(&[vec![1.0]]);
        assert!(matches!(
            fit_bins(&data, &mask, 1),
            Err(DiscretizeError::BadBinCount(1))
        ));
    }

    #[test]
    fn reference_mask_model_emits_29_codes_per_instance() {
        let mut data = Vec::new();
        for i in 0..20 {
            let mut features = [0.0; 41];
            for (f, slot) in features.iter_mut().enumerate() {
                *slot = (i * 7 + f) as f64;
            }
            data.push(NumericInstance {
                features,
                class: AttackClass::Normal,
            });
        }
        let mask = crate::rough_set::reference_mask();
        let model = fit_bins(&data, &mask, 10).unwrap();
        let codes = model.apply(&data[0]);
        assert_eq!(codes.len(), 29);
    }

    #[test]
    fn apply_row_checks_width() {
        let model = single_feature_model(vec![0.0, 1.0], 2);
        assert!(matches!(
            model.apply_row(&[1.0, 2.0]),
            Err(DiscretizeError::MaskMismatch {
                expected: 1,
                found: 2
            })
        ));
        assert_eq!(model.apply_row(&[1.0]).unwrap(), vec![1]);
    }

    #[test]
    fn text_round_trip() {
        let data = instances(&[(0..50).map(f64::from).collect(), vec![3.0; 50]]);
        let mask = FeatureMask::new(vec![1, 7], Provenance::Full).unwrap();
        let model = fit_bins(&data, &mask, 5).unwrap();
        let back = BinningModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
    }

    proptest! {
        #[test]
        fn codes_are_monotone_and_in_range(
            mut values in proptest::collection::vec(0.0f64..1000.0, 2..60),
            bins in 2usize..8,
            probe_a in 0.0f64..1000.0,
            probe_b in 0.0f64..1000.0,
        ) {
            let model = single_feature_model(values.clone(), bins);
            let (lo, hi) = if probe_a <= probe_b { (probe_a, probe_b) } else { (probe_b, probe_a) };
            prop_assert!(model.code(0, lo) <= model.code(0, hi));
            values.sort_by(f64::total_cmp);
            for v in values {
                let code = model.code(0, v) as usize;
                prop_assert!(code < model.bins(0));
                prop_assert!(model.bins(0) <= bins);
            }
        }
    }
}
