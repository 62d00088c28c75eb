//! Min-max feature scaling to [0, 1], fitted on training rows only.

use super::SvmError;

/// Per-feature (min, max) bounds. Values outside the training range clamp to
/// the edges; a constant feature scales to 0 everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingModel {
    bounds: Vec<(f64, f64)>,
}

/// Fits bounds over masked feature rows (all the same width).
pub fn fit_scaling(rows: &[Vec<f64>]) -> Result<ScalingModel, SvmError> {
    let first = rows.first().ok_or(SvmError::EmptyData)?;
    let width = first.len();
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); width];
    for row in rows {
        if row.len() != width {
            return Err(SvmError::DimensionMismatch {
                expected: width,
                found: row.len(),
            });
        }
        for (b, &v) in bounds.iter_mut().zip(row) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    Ok(ScalingModel { bounds })
}

impl ScalingModel {
    pub fn from_bounds(bounds: Vec<(f64, f64)>) -> Result<Self, SvmError> {
        if bounds
            .iter()
            .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            return Err(SvmError::BadConfig(
                "scaling bounds must be finite with min <= max".into(),
            ));
        }
        Ok(ScalingModel { bounds })
    }

    pub fn width(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn scale_value(&self, position: usize, value: f64) -> f64 {
        let (lo, hi) = self.bounds[position];
        if lo == hi {
            return 0.0;
        }
        ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn scale_row(&self, row: &[f64]) -> Result<Vec<f64>, SvmError> {
        if row.len() != self.width() {
            return Err(SvmError::DimensionMismatch {
                expected: self.width(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(i, &v)| self.scale_value(i, v))
            .collect())
    }

    pub fn scale_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SvmError> {
        rows.iter().map(|r| self.scale_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_scales_to_half() {
        let model = fit_scaling(&[vec![0.0], vec![10.0]]).unwrap();
        assert_eq!(model.scale_value(0, 5.0), 0.5);
        assert_eq!(model.scale_value(0, 0.0), 0.0);
        assert_eq!(model.scale_value(0, 10.0), 1.0);
    }

    #[test]
    fn constant_feature_scales_to_zero() {
        let model = fit_scaling(&[vec![4.0], vec![4.0]]).unwrap();
        assert_eq!(model.scale_value(0, 4.0), 0.0);
        assert_eq!(model.scale_value(0, 123.0), 0.0);
    }

    #[test]
    fn out_of_range_values_clamp() {
        let model = fit_scaling(&[vec![0.0], vec![10.0]]).unwrap();
        assert_eq!(model.scale_value(0, 20.0), 1.0);
        assert_eq!(model.scale_value(0, -3.0), 0.0);
    }

    #[test]
    fn empty_and_ragged_inputs_are_rejected() {
        assert!(matches!(fit_scaling(&[]), Err(SvmError::EmptyData)));
        assert!(matches!(
            fit_scaling(&[vec![1.0, 2.0], vec![1.0]]),
            Err(SvmError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn scaled_values_stay_in_unit_interval(
            train in proptest::collection::vec(-1e6f64..1e6, 2..40),
            probe in -2e6f64..2e6,
        ) {
            let rows: Vec<Vec<f64>> = train.iter().map(|&v| vec![v]).collect();
            let model = fit_scaling(&rows).unwrap();
            let s = model.scale_value(0, probe);
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
