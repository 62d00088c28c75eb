//! Binary soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization over min-max scaled feature rows.
//!
//! Output labels are +1 (attack) and -1 (normal); a decision value of exactly
//! zero alarms (+1).

mod kernel;
mod model_io;
mod scale;
mod smo;
mod sparse;

pub use kernel::rbf_kernel;
pub use model_io::{load_model, model_from_text, model_to_text, save_model};
pub use scale::{fit_scaling, ScalingModel};
pub use smo::SmoStep;
pub use sparse::{export_sparse, sparse_line};

use thiserror::Error;

use crate::exec::map_indexed;
use crate::kdd::NumericInstance;
use crate::mask::FeatureMask;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("no training data")]
    EmptyData,
    #[error("expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("labels must be +1 or -1, found {0}")]
    BadLabel(i8),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("a model needs at least one support vector")]
    NoSupportVectors,
    #[error("unsupported or corrupt model file: {0}")]
    FormatVersion(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Soft-margin penalty.
    pub c: f64,
    /// RBF kernel width.
    pub gamma: f64,
    /// KKT slack for convergence checks.
    pub tolerance: f64,
    /// Consecutive violation-free sweeps required to converge.
    pub max_passes: usize,
    /// Seed for the working-pair selection order.
    pub seed: u64,
    /// Per-class penalty multipliers (both 1 keeps C uniform).
    pub positive_weight: f64,
    pub negative_weight: f64,
}

impl TrainConfig {
    /// Defaults with gamma = 1 / feature count.
    pub fn for_feature_count(features: usize) -> Self {
        TrainConfig {
            c: 1.0,
            gamma: 1.0 / features.max(1) as f64,
            tolerance: 1e-3,
            max_passes: 10,
            seed: 0,
            positive_weight: 1.0,
            negative_weight: 1.0,
        }
    }

    fn validate(&self) -> Result<(), SvmError> {
        let positive = [
            ("c", self.c),
            ("gamma", self.gamma),
            ("tolerance", self.tolerance),
            ("positive_weight", self.positive_weight),
            ("negative_weight", self.negative_weight),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(SvmError::BadConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_passes == 0 {
            return Err(SvmError::BadConfig("max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained classifier: support vectors with signed coefficients, the bias,
/// and the preprocessing (mask + scaling) needed to score raw instances.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support_vectors: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    bias: f64,
    gamma: f64,
    scaling: ScalingModel,
    mask: FeatureMask,
}

/// Sign and raw decision value for one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: i8,
    pub value: f64,
}

impl Prediction {
    fn from_value(value: f64) -> Self {
        // ties alarm
        Prediction {
            label: if value >= 0.0 { 1 } else { -1 },
            value,
        }
    }
}

/// Outcome counters of one training run, including the final dual
/// coefficients for diagnostics.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub converged: bool,
    pub sweeps: usize,
    pub updates: u64,
    pub remaining_violations: usize,
    pub alphas: Vec<f64>,
}

/// Trains on masked, scaled rows. `mask` and `scaling` describe how the rows
/// were produced and are stored in the model for later instance prediction.
///
/// Non-convergence is not an error: the summary flags it and the model is
/// still returned.
pub fn train(
    rows: &[Vec<f64>],
    labels: &[i8],
    cfg: &TrainConfig,
    mask: FeatureMask,
    scaling: ScalingModel,
) -> Result<(SvmModel, TrainSummary), SvmError> {
    train_with_observer(rows, labels, cfg, mask, scaling, |_| {})
}

/// [`train`] with a callback invoked after every pair update; used for
/// objective-trace diagnostics.
pub fn train_with_observer(
    rows: &[Vec<f64>],
    labels: &[i8],
    cfg: &TrainConfig,
    mask: FeatureMask,
    scaling: ScalingModel,
    observer: impl FnMut(&SmoStep),
) -> Result<(SvmModel, TrainSummary), SvmError> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(SvmError::EmptyData);
    }
    if rows.len() != labels.len() {
        return Err(SvmError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let width = rows[0].len();
    if width != mask.len() || scaling.width() != width {
        return Err(SvmError::DimensionMismatch {
            expected: mask.len(),
            found: width,
        });
    }
    for row in rows {
        if row.len() != width {
            return Err(SvmError::DimensionMismatch {
                expected: width,
                found: row.len(),
            });
        }
    }
    if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(SvmError::BadLabel(bad));
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Err(SvmError::SingleClass);
    }

    let outcome = smo::Solver::new(rows, labels, cfg).solve(cfg.max_passes, observer);

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &alpha) in outcome.alphas.iter().enumerate() {
        if smo::keep_alpha(alpha) {
            support_vectors.push(rows[i].clone());
            coefficients.push(alpha * f64::from(labels[i]));
        }
    }
    // with no support vectors the decision value degrades to the bias;
    // fall back to the label mean so the majority class wins and ties alarm
    let bias = if support_vectors.is_empty() {
        labels.iter().map(|&y| f64::from(y)).sum::<f64>() / labels.len() as f64
    } else {
        outcome.bias
    };
    let model = SvmModel {
        support_vectors,
        coefficients,
        bias,
        gamma: cfg.gamma,
        scaling,
        mask,
    };
    let summary = TrainSummary {
        converged: outcome.converged,
        sweeps: outcome.sweeps,
        updates: outcome.updates,
        remaining_violations: outcome.remaining_violations,
        alphas: outcome.alphas,
    };
    Ok((model, summary))
}

/// Masks, scales, and trains on full instances in one step; the scaling is
/// fitted on these rows only.
pub fn train_instances(
    data: &[NumericInstance],
    mask: &FeatureMask,
    cfg: &TrainConfig,
) -> Result<(SvmModel, TrainSummary), SvmError> {
    let raw: Vec<Vec<f64>> = data
        .iter()
        .map(|inst| mask.project(&inst.features))
        .collect();
    let scaling = fit_scaling(&raw)?;
    let rows = scaling.scale_rows(&raw)?;
    let labels: Vec<i8> = data.iter().map(NumericInstance::signed_label).collect();
    train(&rows, &labels, cfg, mask.clone(), scaling)
}

/// Exact dual objective W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j
/// y_i y_j K(x_i, x_j), recomputed from scratch.
pub fn dual_objective(rows: &[Vec<f64>], labels: &[i8], alphas: &[f64], gamma: f64) -> f64 {
    let n = rows.len();
    let linear: f64 = alphas.iter().sum();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alphas[j] == 0.0 {
                continue;
            }
            quad += alphas[i]
                * alphas[j]
                * f64::from(labels[i])
                * f64::from(labels[j])
                * kernel::rbf_unchecked(&rows[i], &rows[j], gamma);
        }
    }
    linear - 0.5 * quad
}

impl SvmModel {
    pub(crate) fn from_parts(
        support_vectors: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        bias: f64,
        gamma: f64,
        scaling: ScalingModel,
        mask: FeatureMask,
    ) -> Result<Self, SvmError> {
        if support_vectors.is_empty() {
            return Err(SvmError::NoSupportVectors);
        }
        if support_vectors.len() != coefficients.len() {
            return Err(SvmError::LengthMismatch {
                rows: support_vectors.len(),
                labels: coefficients.len(),
            });
        }
        let width = mask.len();
        if scaling.width() != width || support_vectors.iter().any(|sv| sv.len() != width) {
            return Err(SvmError::DimensionMismatch {
                expected: width,
                found: scaling.width(),
            });
        }
        Ok(SvmModel {
            support_vectors,
            coefficients,
            bias,
            gamma,
            scaling,
            mask,
        })
    }

    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn scaling(&self) -> &ScalingModel {
        &self.scaling
    }

    /// f(x) over an already masked and scaled row.
    pub fn decision_value(&self, scaled: &[f64]) -> Result<f64, SvmError> {
        if scaled.len() != self.mask.len() {
            return Err(SvmError::DimensionMismatch {
                expected: self.mask.len(),
                found: scaled.len(),
            });
        }
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, &c)| c * kernel::rbf_unchecked(sv, scaled, self.gamma))
            .sum();
        Ok(sum + self.bias)
    }

    /// Masks, scales, and scores a full 41-feature instance.
    pub fn predict(&self, instance: &NumericInstance) -> Prediction {
        let raw = self.mask.project(&instance.features);
        let scaled = self
            .scaling
            .scale_row(&raw)
            .expect("projection matches mask width");
        Prediction::from_value(self.decision_value(&scaled).expect("widths match"))
    }

    /// Scores masked, unscaled rows (width must match the mask).
    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>, SvmError> {
        rows.iter()
            .map(|row| {
                let scaled = self.scaling.scale_row(row)?;
                Ok(Prediction::from_value(self.decision_value(&scaled)?))
            })
            .collect()
    }

    /// Sequential batch prediction over instances.
    pub fn predict_batch(&self, data: &[NumericInstance]) -> Vec<Prediction> {
        data.iter().map(|inst| self.predict(inst)).collect()
    }

    /// Parallel twin of [`predict_batch`](Self::predict_batch); identical
    /// output.
    #[cfg(feature = "parallel")]
    pub fn par_predict_batch(&self, data: &[NumericInstance]) -> Vec<Prediction> {
        map_indexed(data.len(), |i| self.predict(&data[i]))
    }

    /// Batch prediction using the parallel path when compiled in.
    pub fn predict_all(&self, data: &[NumericInstance]) -> Vec<Prediction> {
        #[cfg(feature = "parallel")]
        {
            self.par_predict_batch(data)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.predict_batch(data)
        }
    }
}

#[cfg(test)]
mod tests;
