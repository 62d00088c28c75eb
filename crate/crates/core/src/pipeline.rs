//! Experiment orchestration: ingest, sample, select features per arm, train,
//! evaluate, and persist a diff-friendly bundle of text artifacts.
//!
//! Every artifact embeds the config hash and seed, no artifact carries a
//! timestamp, and all fitting (bins, masks, scaling, SVM) uses the training
//! split only, so a config and its inputs fully determine every output byte.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::discretize::{fit_bins, BinningModel, DiscretizeError};
use crate::entropy::{self, EntropyError};
use crate::kdd::{
    self, ClassRatios, IngestError, IngestReport, NumericInstance, SampleError, SymbolMapError,
    SymbolMaps,
};
use crate::mask::{FeatureMask, MaskError, FEATURE_COUNT};
use crate::metrics::{
    comparison_table, compute_metrics, tally, FprConvention, MetricsError, MetricsReport,
};
use crate::rough_set::{self, RoughSetError};
use crate::svm::{self, SvmError, TrainConfig};
use crate::table::{DecisionTable, TableError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Maps(#[from] SymbolMapError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    RoughSet(#[from] RoughSetError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// The four feature-selection arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Full,
    Entropy,
    RoughSet,
    Reference,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Full => "full",
            Arm::Entropy => "entropy",
            Arm::RoughSet => "roughset",
            Arm::Reference => "reference",
        }
    }

    fn needs_table(self) -> bool {
        matches!(self, Arm::Entropy | Arm::RoughSet)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(Arm::Full),
            "entropy" => Ok(Arm::Entropy),
            "roughset" => Ok(Arm::RoughSet),
            "reference" => Ok(Arm::Reference),
            other => Err(format!(
                "unknown arm `{other}` (full|entropy|roughset|reference)"
            )),
        }
    }
}

/// Stratified-sampling request for one split.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub total: usize,
    pub ratios: ClassRatios,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    #[serde(default)]
    pub train: Option<SampleSpec>,
    #[serde(default)]
    pub test: Option<SampleSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscretizeSettings {
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    10
}

impl Default for DiscretizeSettings {
    fn default() -> Self {
        DiscretizeSettings {
            bins: default_bins(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EntropySettings {
    #[serde(default = "default_entropy_k")]
    pub k: usize,
}

fn default_entropy_k() -> usize {
    29
}

impl Default for EntropySettings {
    fn default() -> Self {
        EntropySettings {
            k: default_entropy_k(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SvmSettings {
    #[serde(default = "default_c")]
    pub c: f64,
    /// 0 means automatic: 1 / selected feature count.
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_passes")]
    pub max_passes: usize,
}

fn default_c() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_max_passes() -> usize {
    10
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            c: default_c(),
            gamma: 0.0,
            tolerance: default_tolerance(),
            max_passes: default_max_passes(),
        }
    }
}

fn default_arms() -> Vec<Arm> {
    vec![Arm::Full, Arm::Entropy, Arm::RoughSet, Arm::Reference]
}

/// Everything one experiment run needs. Serializes to/from a TOML document;
/// every CLI flag corresponds to one of these keys.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub output: PathBuf,
    #[serde(default = "default_arms")]
    pub arms: Vec<Arm>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub fpr_convention: FprConvention,
    /// 0 means one worker per arm.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub maps: Option<PathBuf>,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub discretize: DiscretizeSettings,
    #[serde(default)]
    pub entropy: EntropySettings,
    #[serde(default)]
    pub svm: SvmSettings,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML form; the config hash is taken over these bytes.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 12 hex chars of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if self.arms.is_empty() {
            return fail("at least one arm is required".into());
        }
        for (i, arm) in self.arms.iter().enumerate() {
            if self.arms[..i].contains(arm) {
                return fail(format!("arm `{arm}` listed twice"));
            }
        }
        for (name, path) in [("train", &self.train), ("test", &self.test)] {
            if !path.is_file() {
                return fail(format!("{name} file `{}` does not exist", path.display()));
            }
        }
        if let Some(maps) = &self.maps {
            if !maps.is_file() {
                return fail(format!("maps file `{}` does not exist", maps.display()));
            }
        }
        if self.discretize.bins < 2 {
            return fail("discretize.bins must be at least 2".into());
        }
        if self.entropy.k == 0 || self.entropy.k > FEATURE_COUNT {
            return fail(format!("entropy.k must be in 1..={FEATURE_COUNT}"));
        }
        if self.svm.c.is_nan() || self.svm.c <= 0.0 {
            return fail("svm.c must be positive".into());
        }
        if self.svm.gamma < 0.0 {
            return fail("svm.gamma must be zero (auto) or positive".into());
        }
        if self.svm.tolerance.is_nan() || self.svm.tolerance <= 0.0 {
            return fail("svm.tolerance must be positive".into());
        }
        if self.svm.max_passes == 0 {
            return fail("svm.max_passes must be at least 1".into());
        }
        Ok(())
    }

    /// Resolves the SVM settings against a mask width (automatic gamma is
    /// 1 / width).
    pub fn train_config(&self, mask_len: usize) -> TrainConfig {
        TrainConfig {
            c: self.svm.c,
            gamma: if self.svm.gamma > 0.0 {
                self.svm.gamma
            } else {
                1.0 / mask_len.max(1) as f64
            },
            tolerance: self.svm.tolerance,
            max_passes: self.svm.max_passes,
            seed: self.seed,
            positive_weight: 1.0,
            negative_weight: 1.0,
        }
    }
}

/// Per-arm result retained in the run summary.
#[derive(Debug, Clone)]
pub struct ArmStats {
    pub mask_len: usize,
    pub accuracy: Option<f64>,
    pub converged: bool,
    pub sweeps: usize,
    pub support_vectors: usize,
}

#[derive(Debug, Clone)]
pub struct ArmResult {
    pub arm: Arm,
    pub outcome: Result<ArmStats, String>,
}

/// What a run produced: the bundle location, per-arm outcomes, the rendered
/// comparison table, and any warnings.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output: PathBuf,
    pub config_hash: String,
    pub arm_results: Vec<ArmResult>,
    pub comparison: String,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn failed_arms(&self) -> Vec<(Arm, &str)> {
        self.arm_results
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.arm, e.as_str())))
            .collect()
    }

    pub fn all_succeeded(&self) -> bool {
        self.arm_results.iter().all(|r| r.outcome.is_ok())
    }
}

fn artifact_header(hash: &str, seed: u64) -> String {
    format!("# config={hash} seed={seed}\n")
}

struct ArmOutput {
    stats: ArmStats,
    report: MetricsReport,
    warning: Option<String>,
    files: Vec<(PathBuf, String)>,
}

/// Runs the configured arms: ingest and optional sampling once, then per arm
/// mask resolution, scaling, SMO training, evaluation, and artifact writes.
/// One arm's failure is recorded and does not abort the others.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    let hash = cfg.hash();
    let header = artifact_header(&hash, cfg.seed);

    let maps = match &cfg.maps {
        Some(path) => SymbolMaps::load(path)?,
        None => SymbolMaps::default(),
    };

    let (train_data, train_ingest) = load_split(&cfg.train, &maps, cfg.strict)?;
    let (test_data, test_ingest) = load_split(&cfg.test, &maps, cfg.strict)?;
    let (train_data, train_sample_note) =
        apply_sample(train_data, cfg.sample.train.as_ref(), cfg.seed)?;
    let (test_data, test_sample_note) = apply_sample(
        test_data,
        cfg.sample.test.as_ref(),
        cfg.seed.wrapping_add(1),
    )?;
    if train_data.is_empty() {
        return Err(PipelineError::Config("training split is empty".into()));
    }

    fs::create_dir_all(&cfg.output).map_err(io_err(&cfg.output))?;
    write_text(&cfg.output.join("config.toml"), &cfg.to_toml_string())?;
    write_text(
        &cfg.output.join("ingest_train.txt"),
        &format!("{header}{train_ingest}{train_sample_note}"),
    )?;
    write_text(
        &cfg.output.join("ingest_test.txt"),
        &format!("{header}{test_ingest}{test_sample_note}"),
    )?;

    // shared discretization, fitted on the training split only
    let table = if cfg.arms.iter().any(|a| a.needs_table()) {
        let bins = fit_bins(&train_data, &FeatureMask::full(), cfg.discretize.bins)?;
        write_text(
            &cfg.output.join("bins.txt"),
            &format!("{header}{}", bins.to_text()),
        )?;
        Some(build_table(&bins, &train_data)?)
    } else {
        None
    };

    let shared = ArmShared {
        cfg,
        header: &header,
        train: &train_data,
        test: &test_data,
        table: table.as_ref(),
    };
    let outcomes = run_arms(&shared, &cfg.arms);

    let mut arm_results = Vec::new();
    let mut warnings = Vec::new();
    let mut table_rows = Vec::new();
    for (arm, outcome) in cfg.arms.iter().zip(outcomes) {
        match outcome {
            Ok(output) => {
                for (path, text) in &output.files {
                    write_text(path, text)?;
                }
                if let Some(w) = output.warning {
                    warnings.push(w);
                }
                table_rows.push((arm.to_string(), output.report));
                arm_results.push(ArmResult {
                    arm: *arm,
                    outcome: Ok(output.stats),
                });
            }
            Err(err) => {
                arm_results.push(ArmResult {
                    arm: *arm,
                    outcome: Err(format!("arm {arm}: {err}")),
                });
            }
        }
    }

    let comparison = format!(
        "{header}{}",
        comparison_table(&table_rows, cfg.fpr_convention)
    );
    write_text(&cfg.output.join("comparison.txt"), &comparison)?;

    Ok(RunSummary {
        output: cfg.output.clone(),
        config_hash: hash,
        arm_results,
        comparison,
        warnings,
    })
}

struct ArmShared<'a> {
    cfg: &'a ExperimentConfig,
    header: &'a str,
    train: &'a [NumericInstance],
    test: &'a [NumericInstance],
    table: Option<&'a DecisionTable>,
}

fn run_arms(shared: &ArmShared<'_>, arms: &[Arm]) -> Vec<Result<ArmOutput, PipelineError>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let workers = if shared.cfg.workers == 0 {
            arms.len()
        } else {
            shared.cfg.workers
        };
        if workers > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.min(arms.len()))
                .build()
            {
                return pool.install(|| arms.par_iter().map(|arm| run_arm(shared, *arm)).collect());
            }
        }
    }
    arms.iter().map(|arm| run_arm(shared, *arm)).collect()
}

fn run_arm(shared: &ArmShared<'_>, arm: Arm) -> Result<ArmOutput, PipelineError> {
    let cfg = shared.cfg;
    let arm_dir = cfg.output.join("arms").join(arm.as_str());
    fs::create_dir_all(&arm_dir).map_err(io_err(&arm_dir))?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();

    let mask = match arm {
        Arm::Full => FeatureMask::full(),
        Arm::Reference => rough_set::reference_mask(),
        Arm::Entropy => {
            let table = shared.table.expect("table built for entropy arm");
            let scores = entropy::rank_features(table)?;
            files.push((
                arm_dir.join("scores.txt"),
                format!("{}{}", shared.header, entropy::scores_report(&scores)),
            ));
            entropy::entropy_mask(table, cfg.entropy.k)?
        }
        Arm::RoughSet => {
            let table = shared.table.expect("table built for roughset arm");
            let mask = rough_set::greedy_reduct(table)?;
            files.push((
                arm_dir.join("reduct_diff.txt"),
                format!(
                    "{}{}\n",
                    shared.header,
                    mask.diff(&rough_set::reference_mask())
                ),
            ));
            mask
        }
    };
    if mask.is_empty() {
        return Err(PipelineError::Config(format!(
            "arm {arm} selected no features"
        )));
    }
    files.push((
        arm_dir.join("mask.txt"),
        format!("{}{}", shared.header, mask.to_text()),
    ));

    let train_cfg = cfg.train_config(mask.len());
    let (model, summary) = svm::train_instances(shared.train, &mask, &train_cfg)?;
    let warning = (!summary.converged).then(|| {
        format!(
            "arm {arm}: training did not converge after {} sweeps ({} violations remain)",
            summary.sweeps, summary.remaining_violations
        )
    });
    files.push((
        arm_dir.join("model.txt"),
        format!("{}{}", shared.header, svm::model_to_text(&model)?),
    ));

    let predictions = model.predict_all(shared.test);
    let labels: Vec<i8> = predictions.iter().map(|p| p.label).collect();
    let truths: Vec<u8> = shared.test.iter().map(NumericInstance::decision).collect();
    let cm = tally(&labels, &truths)?;
    let report = compute_metrics(&cm)?;

    let mut metrics_text = String::new();
    metrics_text.push_str(shared.header);
    metrics_text.push_str(&format!("# arm={arm} mask_len={}\n", mask.len()));
    if let Some(w) = &warning {
        metrics_text.push_str(&format!("# warning={w}\n"));
    }
    metrics_text.push_str(&report.to_key_value());
    files.push((arm_dir.join("metrics.txt"), metrics_text));

    Ok(ArmOutput {
        stats: ArmStats {
            mask_len: mask.len(),
            accuracy: report.accuracy,
            converged: summary.converged,
            sweeps: summary.sweeps,
            support_vectors: model.support_vector_count(),
        },
        report,
        warning,
        files,
    })
}

fn load_split(
    path: &Path,
    maps: &SymbolMaps,
    strict: bool,
) -> Result<(Vec<NumericInstance>, IngestReport), PipelineError> {
    Ok(kdd::load_dataset(path, maps, strict)?)
}

fn apply_sample(
    data: Vec<NumericInstance>,
    spec: Option<&SampleSpec>,
    seed: u64,
) -> Result<(Vec<NumericInstance>, String), PipelineError> {
    match spec {
        None => Ok((data, String::new())),
        Some(spec) => {
            let (sampled, report) =
                kdd::stratified_sample(&data, &spec.ratios, spec.total, seed, false)?;
            let mut note = format!(
                "sampled {} of {} requested (seed {seed})\n",
                report.total_taken(),
                spec.total
            );
            if report.has_shortfall() {
                note.push_str(&format!(
                    "shortfall per class: {:?}\n",
                    kdd::AttackClass::ALL
                        .iter()
                        .map(|&c| (c.name(), report.shortfall(c)))
                        .filter(|(_, s)| *s > 0)
                        .collect::<Vec<_>>()
                ));
            }
            Ok((sampled, note))
        }
    }
}

fn build_table(
    bins: &BinningModel,
    data: &[NumericInstance],
) -> Result<DecisionTable, PipelineError> {
    Ok(bins.build_table(data)?)
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Re-renders the comparison table of a stored bundle from its metrics
/// artifacts, without recomputation. Byte-identical to the stored
/// `comparison.txt`.
pub fn render_bundle_report(dir: &Path) -> Result<String, PipelineError> {
    let config_path = dir.join("config.toml");
    if !config_path.is_file() {
        return Err(PipelineError::MissingArtifact(format!(
            "{} (run the experiment first)",
            config_path.display()
        )));
    }
    let text = fs::read_to_string(&config_path).map_err(io_err(&config_path))?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    let hash = cfg.hash();
    let mut rows = Vec::new();
    for arm in &cfg.arms {
        let metrics_path = dir.join("arms").join(arm.as_str()).join("metrics.txt");
        if !metrics_path.is_file() {
            continue; // failed arms leave no metrics
        }
        let metrics_text = fs::read_to_string(&metrics_path).map_err(io_err(&metrics_path))?;
        rows.push((
            arm.to_string(),
            MetricsReport::from_key_value(&metrics_text)?,
        ));
    }
    if rows.is_empty() {
        return Err(PipelineError::MissingArtifact(format!(
            "no arm metrics under {}",
            dir.join("arms").display()
        )));
    }
    Ok(format!(
        "{}{}",
        artifact_header(&hash, cfg.seed),
        comparison_table(&rows, cfg.fpr_convention)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig {
            train: "train.csv".into(),
            test: "test.csv".into(),
            output: "out".into(),
            arms: vec![Arm::Full, Arm::Reference],
            seed: 42,
            strict: false,
            fpr_convention: FprConvention::Standard,
            workers: 0,
            maps: None,
            sample: SampleSection::default(),
            discretize: DiscretizeSettings::default(),
            entropy: EntropySettings::default(),
            svm: SvmSettings::default(),
        };
        let text = cfg.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let cfg = ExperimentConfig::from_toml_str("train = \"a\"\ntest = \"b\"\noutput = \"c\"\n")
            .unwrap();
        assert_eq!(cfg.arms, default_arms());
        assert_eq!(cfg.discretize.bins, 10);
        assert_eq!(cfg.entropy.k, 29);
        assert_eq!(cfg.svm.c, 1.0);
        assert_eq!(cfg.svm.gamma, 0.0);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml_str(
            "train = \"a\"\ntest = \"b\"\noutput = \"c\"\nbogus = 1\n",
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::Config(_)));
    }

    #[test]
    fn validation_needs_existing_files_and_sane_ranges() {
        let cfg = ExperimentConfig::from_toml_str(
            "train = \"/nonexistent/a\"\ntest = \"/nonexistent/b\"\noutput = \"c\"\n",
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(PipelineError::Config(_))));
    }

    #[test]
    fn report_on_missing_bundle_is_a_missing_artifact_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            render_bundle_report(dir.path()),
            Err(PipelineError::MissingArtifact(_))
        ));
    }

    #[test]
    fn gamma_auto_resolves_from_mask_length() {
        let cfg = ExperimentConfig::from_toml_str("train = \"a\"\ntest = \"b\"\noutput = \"c\"\n")
            .unwrap();
        assert_eq!(cfg.train_config(29).gamma, 1.0 / 29.0);
        let explicit = ExperimentConfig::from_toml_str(
            "train = \"a\"\ntest = \"b\"\noutput = \"c\"\n[svm]\ngamma = 0.5\n",
        )
        .unwrap();
        assert_eq!(explicit.train_config(29).gamma, 0.5);
    }
}
