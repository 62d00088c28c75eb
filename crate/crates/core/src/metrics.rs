//! Confusion-matrix accounting and the detector quality metrics.
//!
//! Positive means "alarm raised" and truth means "attack occurred": tp counts
//! alarmed attacks, fp alarmed normals, tn quiet normals, fn missed attacks.
//! Ratios with a zero denominator are reported as not-applicable rather than
//! NaN.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{predictions} predictions but {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("no observations")]
    Empty,
    #[error("malformed report text: {0}")]
    Format(String),
}

/// TP/FP/TN/FN counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_count: u64) -> Self {
        ConfusionMatrix {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_count,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    pub fn attacks(&self) -> u64 {
        self.true_positives + self.false_negatives
    }

    pub fn normals(&self) -> u64 {
        self.false_positives + self.true_negatives
    }
}

/// Counts prediction/truth agreement. Predictions are +1/-1, truths are the
/// binary decision (1 = attack).
pub fn tally(predictions: &[i8], truths: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&pred, &truth) in predictions.iter().zip(truths) {
        match (pred > 0, truth == 1) {
            (true, true) => cm.true_positives += 1,
            (true, false) => cm.false_positives += 1,
            (false, false) => cm.true_negatives += 1,
            (false, true) => cm.false_negatives += 1,
        }
    }
    Ok(cm)
}

/// The seven ratios plus their source counts. `None` marks a ratio whose
/// denominator was zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub matrix: ConfusionMatrix,
    pub total_processes: u64,
    pub total_attacks: u64,
    pub total_normals: u64,
    /// tp / (tp + fp)
    pub precision: Option<f64>,
    /// tp / (tp + fn)
    pub recall: Option<f64>,
    /// (tp + tn) / total
    pub overall: Option<f64>,
    /// (fp + fn) / total
    pub false_alarm: Option<f64>,
    /// detected attacks over attacks; equals recall
    pub attack_detection_rate: Option<f64>,
    /// fp / (fp + tn): misclassified normals over normals
    pub false_positive_rate: Option<f64>,
    /// fn / (tp + fn): the complement of the detection rate
    pub miss_rate: Option<f64>,
    /// (tp + tn) / total
    pub accuracy: Option<f64>,
}

/// Computes every ratio from the counts.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport, MetricsError> {
    if cm.total() == 0 {
        return Err(MetricsError::Empty);
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let correct = cm.true_positives + cm.true_negatives;
    let wrong = cm.false_positives + cm.false_negatives;
    Ok(MetricsReport {
        matrix: *cm,
        total_processes: cm.total(),
        total_attacks: cm.attacks(),
        total_normals: cm.normals(),
        precision: ratio(cm.true_positives, cm.true_positives + cm.false_positives),
        recall: ratio(cm.true_positives, cm.attacks()),
        overall: ratio(correct, cm.total()),
        false_alarm: ratio(wrong, cm.total()),
        attack_detection_rate: ratio(cm.true_positives, cm.attacks()),
        false_positive_rate: ratio(cm.false_positives, cm.normals()),
        miss_rate: ratio(cm.false_negatives, cm.attacks()),
        accuracy: ratio(correct, cm.total()),
    })
}

/// Which value fills the false-positive column of the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FprConvention {
    /// fp / (fp + tn)
    #[default]
    Standard,
    /// 1 - attack detection rate (the miss rate)
    Complement,
}

impl FromStr for FprConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(FprConvention::Standard),
            "complement" => Ok(FprConvention::Complement),
            other => Err(format!(
                "unknown convention `{other}` (standard|complement)"
            )),
        }
    }
}

impl FprConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            FprConvention::Standard => "standard",
            FprConvention::Complement => "complement",
        }
    }
}

fn percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "n/a".to_string(),
    }
}

/// Renders one row per named report: detection rate, false-positive column
/// (per the convention), accuracy, as two-decimal percentages.
pub fn comparison_table(reports: &[(String, MetricsReport)], convention: FprConvention) -> String {
    let mut out = String::from("method | attack detection rate | false positive rate | accuracy\n");
    for (name, report) in reports {
        let fpr_column = match convention {
            FprConvention::Standard => report.false_positive_rate,
            FprConvention::Complement => report.miss_rate,
        };
        let _ = writeln!(
            out,
            "{} | {} | {} | {}",
            name,
            percent(report.attack_detection_rate),
            percent(fpr_column),
            percent(report.accuracy),
        );
    }
    out
}

impl MetricsReport {
    /// Flat key=value block; `n/a` marks undefined ratios.
    pub fn to_key_value(&self) -> String {
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.6}"),
            None => "n/a".to_string(),
        };
        let mut out = String::new();
        let _ = writeln!(out, "tp={}", self.matrix.true_positives);
        let _ = writeln!(out, "fp={}", self.matrix.false_positives);
        let _ = writeln!(out, "tn={}", self.matrix.true_negatives);
        let _ = writeln!(out, "fn={}", self.matrix.false_negatives);
        let _ = writeln!(out, "total_processes={}", self.total_processes);
        let _ = writeln!(out, "total_attacks={}", self.total_attacks);
        let _ = writeln!(out, "total_normals={}", self.total_normals);
        let _ = writeln!(out, "precision={}", fmt(self.precision));
        let _ = writeln!(out, "recall={}", fmt(self.recall));
        let _ = writeln!(out, "overall={}", fmt(self.overall));
        let _ = writeln!(out, "false_alarm={}", fmt(self.false_alarm));
        let _ = writeln!(
            out,
            "attack_detection_rate={}",
            fmt(self.attack_detection_rate)
        );
        let _ = writeln!(out, "false_positive_rate={}", fmt(self.false_positive_rate));
        let _ = writeln!(out, "miss_rate={}", fmt(self.miss_rate));
        let _ = writeln!(out, "accuracy={}", fmt(self.accuracy));
        out
    }

    /// Rebuilds a report from its key=value block (comment lines ignored).
    /// The ratios are recomputed from the stored counts.
    pub fn from_key_value(text: &str) -> Result<Self, MetricsError> {
        let mut cm = ConfusionMatrix::default();
        let mut seen = 0;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| MetricsError::Format(format!("bad line `{line}`")))?;
            let slot = match key {
                "tp" => &mut cm.true_positives,
                "fp" => &mut cm.false_positives,
                "tn" => &mut cm.true_negatives,
                "fn" => &mut cm.false_negatives,
                _ => continue,
            };
            *slot = value
                .parse()
                .map_err(|_| MetricsError::Format(format!("bad count `{value}`")))?;
            seen += 1;
        }
        if seen != 4 {
            return Err(MetricsError::Format("missing tp/fp/tn/fn counts".into()));
        }
        compute_metrics(&cm)
    }
}
