//! `rsids` command line: ingest/sample KDD-format records, compute feature
//! masks, train and test the RBF-SVM detector, and orchestrate the full
//! multi-arm experiment.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 partial arm failure.

mod synth;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use rsids_core::discretize::fit_bins;
use rsids_core::entropy;
use rsids_core::kdd::{
    self, parse_line, stratified_indices, AttackClass, ClassRatios, NumericInstance, SymbolMaps,
};
use rsids_core::mask::{feature_name, FeatureMask};
use rsids_core::metrics::{compute_metrics, tally, FprConvention};
use rsids_core::pipeline::{
    render_bundle_report, run_experiment, Arm, ExperimentConfig, SampleSection,
};
use rsids_core::rough_set::{greedy_reduct, reference_mask};
use rsids_core::svm::{self, TrainConfig};
use rsids_core::table::DecisionTable;

#[derive(Parser)]
#[command(
    name = "rsids",
    version,
    about = "Rough-set and SVM intrusion detection over KDD-format connection records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IngestOpts {
    /// Record file to read.
    #[arg(long)]
    input: PathBuf,
    /// Symbol-map file replacing the built-in default.
    #[arg(long)]
    maps: Option<PathBuf>,
    /// Abort on the first malformed record instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a record file and print the per-class ingest report.
    Ingest {
        #[command(flatten)]
        opts: IngestOpts,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw a seeded stratified sample of raw records by attack class.
    Sample {
        #[command(flatten)]
        opts: IngestOpts,
        /// Where to write the sampled records.
        #[arg(long)]
        output: PathBuf,
        /// Sample size.
        #[arg(long)]
        total: usize,
        /// Class mix, e.g. normal=0.5,probe=0.1,dos=0.3,u2r=0.02,r2l=0.08.
        #[arg(long)]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fail when a requested class has no records at all.
        #[arg(long)]
        strict_classes: bool,
    },
    /// Discretize, run the greedy rough-set reduct, and diff it against the
    /// 29-feature reference subset.
    Reduce {
        #[command(flatten)]
        opts: IngestOpts,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Write the reduct mask here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the discretized decision table in row-per-object form.
        #[arg(long)]
        dump_table: Option<PathBuf>,
        /// Read a previously dumped decision table instead of raw records.
        #[arg(long, conflicts_with = "dump_table")]
        from_dump: Option<PathBuf>,
    },
    /// Rank features by information gain and emit a top-k mask.
    Entropy {
        #[command(flatten)]
        opts: IngestOpts,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// How many features to keep.
        #[arg(short, long, default_value_t = 29)]
        k: usize,
        /// Write the mask here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the full two-column score report here.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Train an RBF-SVM on a record file under a feature mask.
    Train {
        #[command(flatten)]
        opts: IngestOpts,
        /// `full`, `reference`, or a mask file path.
        #[arg(long, default_value = "full")]
        mask: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// 0 means automatic (1 / selected feature count).
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, default_value_t = 10)]
        max_passes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the model.
        #[arg(long)]
        output: PathBuf,
        /// Also dump the masked, scaled training set as sparse
        /// `label index:value` rows.
        #[arg(long)]
        export_sparse: Option<PathBuf>,
    },
    /// Score a record file with a trained model and print the metrics.
    Test {
        #[command(flatten)]
        opts: IngestOpts,
        #[arg(long)]
        model: PathBuf,
        /// Also write the metrics block here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the multi-arm experiment described by a config file and/or flags.
    Run(Box<RunOpts>),
    /// Re-render the comparison table of a stored experiment bundle.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Generate a deterministic synthetic KDD-format corpus.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 5000)]
        train_total: usize,
        #[arg(long, default_value_t = 3000)]
        test_total: usize,
        /// Training-split class mix.
        #[arg(
            long,
            default_value = "normal=0.1969,probe=0.0083,dos=0.7924,u2r=0.0001,r2l=0.0023"
        )]
        train_ratios: String,
        /// Test-split class mix.
        #[arg(
            long,
            default_value = "normal=0.1948,probe=0.0134,dos=0.7391,u2r=0.0007,r2l=0.0520"
        )]
        test_ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Config file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training record file.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test record file.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Bundle output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated subset of full,entropy,roughset,reference.
    #[arg(long)]
    arms: Option<String>,
    /// Experiment seed, recorded in every artifact.
    #[arg(long)]
    seed: Option<u64>,
    /// Abort ingest on the first malformed record.
    #[arg(long)]
    strict: bool,
    /// standard (fp over normals) or complement (1 - detection rate).
    #[arg(long)]
    fpr_convention: Option<String>,
    /// Arm worker threads; 0 means one per arm.
    #[arg(long)]
    workers: Option<usize>,
    /// Symbol-map file replacing the built-in default.
    #[arg(long)]
    maps: Option<PathBuf>,
    /// Equal-frequency bin count for discretization.
    #[arg(long)]
    bins: Option<usize>,
    /// Features kept by the entropy arm.
    #[arg(long)]
    entropy_k: Option<usize>,
    /// Soft-margin penalty.
    #[arg(long)]
    c: Option<f64>,
    /// RBF width; 0 means 1 / selected feature count.
    #[arg(long)]
    gamma: Option<f64>,
    /// KKT slack for convergence.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Consecutive clean sweeps required to converge.
    #[arg(long)]
    max_passes: Option<usize>,
}

enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(err) => write!(f, "{err:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(err: E) -> Self {
        CliError::Data(err.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    // die quietly when a downstream pager closes the pipe
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_maps(path: &Option<PathBuf>) -> Result<SymbolMaps, CliError> {
    Ok(match path {
        Some(p) => SymbolMaps::load(p).with_context(|| format!("loading maps {}", p.display()))?,
        None => SymbolMaps::default(),
    })
}

fn load_data(opts: &IngestOpts) -> Result<(Vec<NumericInstance>, kdd::IngestReport), CliError> {
    let maps = load_maps(&opts.maps)?;
    Ok(kdd::load_dataset(&opts.input, &maps, opts.strict)?)
}

fn parse_ratios(text: &str) -> Result<ClassRatios, CliError> {
    let mut ratios = ClassRatios {
        normal: 0.0,
        probe: 0.0,
        dos: 0.0,
        u2r: 0.0,
        r2l: 0.0,
    };
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("ratio `{part}` is not class=fraction")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad fraction `{value}`")))?;
        match key.trim().to_ascii_lowercase().as_str() {
            "normal" => ratios.normal = value,
            "probe" => ratios.probe = value,
            "dos" => ratios.dos = value,
            "u2r" => ratios.u2r = value,
            "r2l" => ratios.r2l = value,
            other => return Err(usage(format!("unknown class `{other}`"))),
        }
    }
    Ok(ratios)
}

fn build_discretized_table(opts: &IngestOpts, bins: usize) -> Result<DecisionTable, CliError> {
    let (data, report) = load_data(opts)?;
    if data.is_empty() {
        return Err(anyhow!("{}: no usable records", opts.input.display()).into());
    }
    eprintln!(
        "loaded {} records from {}",
        report.accepted,
        opts.input.display()
    );
    let model = fit_bins(&data, &FeatureMask::full(), bins)?;
    Ok(model.build_table(&data)?)
}

fn named_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|&i| format!("{i}:{}", feature_name(i).unwrap_or("?")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Ingest { opts, report } => {
            let (_, ingest) = load_data(&opts)?;
            let text = ingest.to_string();
            if let Some(path) = report {
                fs::write(&path, &text).with_context(|| path.display().to_string())?;
            }
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Sample {
            opts,
            output,
            total,
            ratios,
            seed,
            strict_classes,
        } => {
            let ratios = parse_ratios(&ratios)?;
            let maps = load_maps(&opts.maps)?;
            let text = fs::read_to_string(&opts.input)
                .with_context(|| opts.input.display().to_string())?;
            // classify raw lines so the sample preserves original bytes
            let mut lines = Vec::new();
            let mut classes = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match parse_line(line, idx + 1)
                    .and_then(|rec| kdd::transform(&rec, &maps, opts.strict))
                {
                    Ok(inst) => {
                        lines.push(line);
                        classes.push(inst.class);
                    }
                    Err(err) if opts.strict => return Err(err.into()),
                    Err(_) => {}
                }
            }
            let (picked, report) =
                stratified_indices(&classes, &ratios, total, seed, strict_classes)?;
            let mut out = String::new();
            for &i in &picked {
                out.push_str(lines[i]);
                out.push('\n');
            }
            fs::write(&output, out).with_context(|| output.display().to_string())?;
            println!(
                "sampled {} of {} requested into {}",
                report.total_taken(),
                total,
                output.display()
            );
            for class in AttackClass::ALL {
                if report.shortfall(class) > 0 {
                    println!("  shortfall {}: {}", class.name(), report.shortfall(class));
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Reduce {
            opts,
            bins,
            output,
            dump_table,
            from_dump,
        } => {
            let table = match &from_dump {
                Some(path) => DecisionTable::load_dump(path)?,
                None => build_discretized_table(&opts, bins)?,
            };
            if let Some(path) = dump_table {
                table.save_dump(&path)?;
                println!("decision table dumped to {}", path.display());
            }
            let mask = greedy_reduct(&table)?;
            println!(
                "reduct ({} features): {}",
                mask.len(),
                named_indices(mask.indices())
            );
            let diff = mask.diff(&reference_mask());
            println!("against the reference subset:\n{diff}");
            if let Some(path) = output {
                mask.save(&path)?;
                println!("mask written to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Entropy {
            opts,
            bins,
            k,
            output,
            scores,
        } => {
            let table = build_discretized_table(&opts, bins)?;
            let ranked = entropy::rank_features(&table)?;
            let report = entropy::scores_report(&ranked);
            if let Some(path) = scores {
                fs::write(&path, &report).with_context(|| path.display().to_string())?;
            } else {
                print!("{report}");
            }
            let mask = entropy::entropy_mask(&table, k)?;
            println!("top-{k}: {}", named_indices(mask.indices()));
            if let Some(path) = output {
                mask.save(&path)?;
                println!("mask written to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Train {
            opts,
            mask,
            c,
            gamma,
            tolerance,
            max_passes,
            seed,
            output,
            export_sparse,
        } => {
            let mask = match mask.as_str() {
                "full" => FeatureMask::full(),
                "reference" => reference_mask(),
                path => FeatureMask::load(Path::new(path))?,
            };
            let (data, _) = load_data(&opts)?;
            if data.is_empty() {
                return Err(anyhow!("{}: no usable records", opts.input.display()).into());
            }
            let cfg = TrainConfig {
                c,
                gamma: if gamma > 0.0 {
                    gamma
                } else {
                    1.0 / mask.len().max(1) as f64
                },
                tolerance,
                max_passes,
                seed,
                positive_weight: 1.0,
                negative_weight: 1.0,
            };
            let (model, summary) = svm::train_instances(&data, &mask, &cfg)?;
            if let Some(path) = export_sparse {
                let raw: Vec<Vec<f64>> = data
                    .iter()
                    .map(|inst| mask.project(&inst.features))
                    .collect();
                let rows = model.scaling().scale_rows(&raw)?;
                let labels: Vec<i8> = data.iter().map(NumericInstance::signed_label).collect();
                fs::write(&path, svm::export_sparse(&rows, &labels)?)
                    .with_context(|| path.display().to_string())?;
                println!("sparse training set written to {}", path.display());
            }
            if !summary.converged {
                eprintln!(
                    "warning: training did not converge after {} sweeps ({} violations remain)",
                    summary.sweeps, summary.remaining_violations
                );
            }
            svm::save_model(&model, &output)?;
            println!(
                "model with {} support vectors written to {} (sweeps {}, updates {})",
                model.support_vector_count(),
                output.display(),
                summary.sweeps,
                summary.updates
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Test {
            opts,
            model,
            report,
        } => {
            let model = svm::load_model(&model)?;
            let (data, _) = load_data(&opts)?;
            if data.is_empty() {
                return Err(anyhow!("{}: no usable records", opts.input.display()).into());
            }
            let predictions = model.predict_all(&data);
            let labels: Vec<i8> = predictions.iter().map(|p| p.label).collect();
            let truths: Vec<u8> = data.iter().map(NumericInstance::decision).collect();
            let metrics = compute_metrics(&tally(&labels, &truths)?)?;
            let text = metrics.to_key_value();
            if let Some(path) = report {
                fs::write(&path, &text).with_context(|| path.display().to_string())?;
            }
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Run(opts) => run_cmd(*opts),

        Command::Report { dir } => {
            print!("{}", render_bundle_report(&dir)?);
            Ok(ExitCode::SUCCESS)
        }

        Command::Synth {
            out_dir,
            train_total,
            test_total,
            train_ratios,
            test_ratios,
            seed,
        } => {
            fs::create_dir_all(&out_dir).with_context(|| out_dir.display().to_string())?;
            let train = synth::generate(train_total, &parse_ratios(&train_ratios)?, seed)?;
            let test = synth::generate(test_total, &parse_ratios(&test_ratios)?, seed + 1)?;
            let train_path = out_dir.join("train_sample.csv");
            let test_path = out_dir.join("test_sample.csv");
            fs::write(&train_path, train).with_context(|| train_path.display().to_string())?;
            fs::write(&test_path, test).with_context(|| test_path.display().to_string())?;
            println!(
                "wrote {} train and {} test records under {}",
                train_total,
                test_total,
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_cmd(opts: RunOpts) -> Result<ExitCode, CliError> {
    let mut cfg = match &opts.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let missing = |flag: &str| usage(format!("--{flag} is required without --config"));
            ExperimentConfig {
                train: opts.train.clone().ok_or_else(|| missing("train"))?,
                test: opts.test.clone().ok_or_else(|| missing("test"))?,
                output: opts.output.clone().ok_or_else(|| missing("output"))?,
                arms: Vec::new(), // replaced below
                seed: 0,
                strict: false,
                fpr_convention: FprConvention::default(),
                workers: 0,
                maps: None,
                sample: SampleSection::default(),
                discretize: Default::default(),
                entropy: Default::default(),
                svm: Default::default(),
            }
        }
    };
    if opts.config.is_none() && opts.arms.is_none() {
        cfg.arms = vec![Arm::Full, Arm::Entropy, Arm::RoughSet, Arm::Reference];
    }
    if let Some(train) = opts.train {
        cfg.train = train;
    }
    if let Some(test) = opts.test {
        cfg.test = test;
    }
    if let Some(output) = opts.output {
        cfg.output = output;
    }
    if let Some(arms) = opts.arms {
        cfg.arms = arms
            .split(',')
            .map(|a| a.trim().parse::<Arm>().map_err(usage))
            .collect::<Result<_, _>>()?;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.strict {
        cfg.strict = true;
    }
    if let Some(conv) = opts.fpr_convention {
        cfg.fpr_convention = conv.parse::<FprConvention>().map_err(usage)?;
    }
    if let Some(workers) = opts.workers {
        cfg.workers = workers;
    }
    if let Some(maps) = opts.maps {
        cfg.maps = Some(maps);
    }
    if let Some(bins) = opts.bins {
        cfg.discretize.bins = bins;
    }
    if let Some(k) = opts.entropy_k {
        cfg.entropy.k = k;
    }
    if let Some(c) = opts.c {
        cfg.svm.c = c;
    }
    if let Some(gamma) = opts.gamma {
        cfg.svm.gamma = gamma;
    }
    if let Some(tolerance) = opts.tolerance {
        cfg.svm.tolerance = tolerance;
    }
    if let Some(max_passes) = opts.max_passes {
        cfg.svm.max_passes = max_passes;
    }

    let summary = run_experiment(&cfg)?;
    for warning in &summary.warnings {
        eprintln!("warning: {warning}");
    }
    for result in &summary.arm_results {
        match &result.outcome {
            Ok(stats) => println!(
                "arm {}: {} features, accuracy {}",
                result.arm,
                stats.mask_len,
                stats
                    .accuracy
                    .map(|a| format!("{:.2}%", a * 100.0))
                    .unwrap_or_else(|| "n/a".into())
            ),
            Err(err) => eprintln!("failed {err}"),
        }
    }
    print!("{}", summary.comparison);
    println!("bundle written to {}", summary.output.display());
    if summary.all_succeeded() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}
