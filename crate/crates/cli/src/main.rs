mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use trajmine::corpus::{load_corpus, CitationMode, Corpus, IngestOptions};
use trajmine::learn::{
    evaluate, extract_features, fit_two_stage, EvalConfig, KernelKind, ModelBundle, ModelConfig, RegressorKind,
    SvmConfig, TargetKind,
};
use trajmine::series::{build_series, write_series_csv, MaMode, SeriesConfig};
use trajmine::stats::{compute_stats, StatsConfig};
use trajmine::synth::{generate, generate_stratified_targets, SynthSpec, TargetMap, TargetSpec};
use trajmine::trajectory::{
    classify_corpus, write_classes_csv, ClassifyConfig, PeakClock, PeakParams, TrajectoryClass,
};

use output::{open_input, write_with};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "trajmine", version, about = "Author success-trajectory mining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus, write it back normalized and report what was dropped.
    Ingest(IngestArgs),
    /// Per-author success series as CSV.
    Series(SeriesArgs),
    /// Trajectory class of every eligible author as CSV.
    Classify(ClassifyArgs),
    /// Class profiles, self-citation migration and decay attribution as JSON.
    Stats(StatsArgs),
    /// Cross-validate the two-stage model against the baseline.
    Evaluate(EvaluateArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Generate a labelled synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Io {
    /// Corpus in JSON lines; `-` or absent reads standard input.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Destination; `-` or absent writes standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesFlags {
    #[arg(long, default_value_t = 3)]
    buffer: usize,
    #[arg(long, default_value_t = 5)]
    ma_window: usize,
    /// centered | trailing
    #[arg(long, default_value = "centered")]
    ma_mode: MaMode,
    /// all | exclude_self
    #[arg(long, default_value = "all")]
    citation_mode: CitationMode,
    /// Minimum observation span in years.
    #[arg(long, default_value_t = 10)]
    min_span: usize,
}

#[derive(Args)]
struct ClassFlags {
    #[command(flatten)]
    series: SeriesFlags,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.75)]
    peak_height: f64,
    #[arg(long, default_value_t = 2)]
    peak_sep: usize,
    /// Last year that still counts as an early peak.
    #[arg(long, default_value_t = 5)]
    early_until: usize,
    /// logical | career
    #[arg(long, default_value = "logical")]
    peak_clock: PeakClock,
}

impl SeriesFlags {
    fn validate(&self) -> Result<()> {
        if self.ma_window.is_multiple_of(2) {
            bail!(usage("--ma-window must be odd"));
        }
        Ok(())
    }

    fn config(&self) -> SeriesConfig {
        SeriesConfig {
            buffer: self.buffer,
            ma_window: self.ma_window,
            ma_mode: self.ma_mode,
        }
    }
}

impl ClassFlags {
    fn config(&self) -> Result<ClassifyConfig> {
        if self.epsilon.is_nan() || self.epsilon < 0.0 || !(0.0..1.0).contains(&self.delta) {
            bail!(usage("--epsilon must be >= 0 and --delta in [0, 1)"));
        }
        if !(self.peak_height > 0.0 && self.peak_height <= 1.0) {
            bail!(usage("--peak-height must lie in (0, 1]"));
        }
        self.series.validate()?;
        Ok(ClassifyConfig {
            series: self.series.config(),
            peaks: PeakParams {
                height_fraction: self.peak_height,
                min_separation: self.peak_sep,
            },
            epsilon: self.epsilon,
            delta: self.delta,
            early_until: self.early_until,
            clock: self.peak_clock,
            min_span: self.series.min_span,
            citation_mode: self.series.citation_mode,
        })
    }
}

#[derive(Args)]
struct LearnFlags {
    /// rbf | linear
    #[arg(long, default_value = "rbf")]
    kernel: KernelKind,
    #[arg(long, default_value_t = 1.0)]
    cost: f64,
    #[arg(long, default_value_t = 0.1)]
    svr_epsilon: f64,
    /// RBF width; defaults to 1 / feature dimension.
    #[arg(long)]
    gamma: Option<f64>,
    /// KKT tolerance.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    max_passes: usize,
    /// svr | ridge
    #[arg(long, default_value = "svr")]
    regressor: String,
    #[arg(long, default_value_t = 1.0)]
    ridge_lambda: f64,
    /// success | cum_citations
    #[arg(long, default_value = "success")]
    target: TargetKind,
    #[arg(long, default_value_t = 10)]
    horizon: usize,
    #[arg(long, default_value_t = 20)]
    min_stratum_size: usize,
}

impl LearnFlags {
    fn config(&self, classify: ClassifyConfig) -> Result<ModelConfig> {
        let regressor = match self.regressor.as_str() {
            "svr" => RegressorKind::Svr,
            "ridge" => RegressorKind::Ridge {
                lambda: self.ridge_lambda,
            },
            other => bail!(usage(format!("unknown regressor `{other}` (expected svr|ridge)"))),
        };
        Ok(ModelConfig {
            svm: SvmConfig {
                kernel: self.kernel,
                cost: self.cost,
                svr_epsilon: self.svr_epsilon,
                gamma: self.gamma,
                tolerance: self.tolerance,
                max_passes: self.max_passes,
            },
            regressor,
            min_stratum_size: self.min_stratum_size,
            horizon: self.horizon,
            target: self.target,
            classify,
        })
    }
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    io: Io,
    /// Where to write the ingest report as JSON; defaults to standard error.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Fail on a repeated paper id instead of skipping it.
    #[arg(long)]
    fail_on_duplicate: bool,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    series: SeriesFlags,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    class: ClassFlags,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    class: ClassFlags,
    /// Post-peak publication rate must reach this multiple of the pre-peak rate.
    #[arg(long, default_value_t = 1.0)]
    decay_multiplier: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    class: ClassFlags,
    #[command(flatten)]
    learn: LearnFlags,
    #[arg(long, default_value_t = 3)]
    t_min: usize,
    #[arg(long, default_value_t = 6)]
    t_max: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also train on all authors and save the models here.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    io: Io,
    /// Model file written by `evaluate --save-model`.
    #[arg(long)]
    model: PathBuf,
    /// Only use the model for this early window.
    #[arg(long)]
    t: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Corpus destination; `-` or absent writes standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 600)]
    authors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Class weights, e.g. `SR=1,ER=1`; all six equally by default.
    #[arg(long)]
    mix: Option<String>,
    #[arg(long, default_value_t = 15)]
    career_length: usize,
    /// Sigma of the multiplicative log-normal noise on the success template.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.1)]
    self_citation_rate: f64,
    #[arg(long, default_value_t = 3)]
    coauthor_pool: usize,
    #[arg(long, default_value_t = 2000)]
    start_year: i32,
    /// Where to write `author_id,class`.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Per-class target maps `CLASS=SLOPE:INTERCEPT`, e.g. `SR=2:0,ER=0.5:0`.
    #[arg(long, requires = "targets")]
    target_map: Option<String>,
    /// Where to write `author_id,target` (requires --target-map).
    #[arg(long, requires = "target_map")]
    targets: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    target_horizon: usize,
}

/// Error caused by the invocation rather than the data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

#[derive(Serialize)]
struct Echo<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    input: Option<&'a Path>,
    #[serde(flatten)]
    config: C,
}

fn echo<'a, C: Serialize>(command: &'static str, input: Option<&'a Path>, config: C) -> Echo<'a, C> {
    Echo {
        tool: "trajmine",
        version: VERSION,
        command,
        input,
        config,
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn read_corpus(path: Option<&Path>, options: IngestOptions) -> Result<Corpus> {
    Ok(read_corpus_with_report(path, options)?.0)
}

fn read_corpus_with_report(path: Option<&Path>, options: IngestOptions) -> Result<(Corpus, trajmine::IngestReport)> {
    let name = path.map_or_else(|| "<stdin>".to_string(), |p| p.display().to_string());
    let reader = open_input(path)?;
    load_corpus(reader, options).with_context(|| format!("reading corpus {name}"))
}

fn ingest(args: IngestArgs) -> Result<()> {
    let options = IngestOptions {
        fail_on_duplicate: args.fail_on_duplicate,
    };
    let (corpus, report) = read_corpus_with_report(args.io.input.as_deref(), options)?;
    write_with(args.io.output.as_deref(), |w| Ok(corpus.write_jsonl(w)?))?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: Echo<'a, IngestOptions>,
        report: trajmine::IngestReport,
    }
    let out = Out {
        config: echo("ingest", args.io.input.as_deref(), options),
        report,
    };
    match &args.report {
        Some(p) => write_json(Some(p), &out)?,
        None => eprintln!("{}", serde_json::to_string_pretty(&out)?),
    }
    Ok(())
}

fn series(args: SeriesArgs) -> Result<()> {
    args.series.validate()?;
    let corpus = read_corpus(args.io.input.as_deref(), IngestOptions::default())?;
    let config = args.series.config();
    let mut all = Vec::new();
    for a in corpus.eligible_authors(args.series.min_span) {
        let timeline = corpus.author_timeline(&a, args.series.citation_mode)?;
        match build_series(&timeline, &config) {
            Ok(s) => all.push(s),
            Err(trajmine::Error::TooShort { .. }) => eprintln!("skipping {a}: career too short for a series"),
            Err(e) => return Err(e.into()),
        }
    }
    write_with(args.io.output.as_deref(), |w| Ok(write_series_csv(w, &all)?))
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let config = args.class.config()?;
    let corpus = read_corpus(args.io.input.as_deref(), IngestOptions::default())?;
    let run = classify_corpus(&corpus, &config);
    for (a, e) in &run.errors {
        eprintln!("skipping {a}: {e}");
    }
    write_with(args.io.output.as_deref(), |w| Ok(write_classes_csv(w, &run)?))
}

fn stats(args: StatsArgs) -> Result<()> {
    let config = StatsConfig {
        classify: args.class.config()?,
        decay_multiplier: args.decay_multiplier,
    };
    let corpus = read_corpus(args.io.input.as_deref(), IngestOptions::default())?;
    let report = compute_stats(&corpus, &config)?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: Echo<'a, StatsConfig>,
        stats: trajmine::stats::StatsReport,
    }
    let out = Out {
        config: echo("stats", args.io.input.as_deref(), config),
        stats: report,
    };
    write_json(args.io.output.as_deref(), &out)
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let model = args.learn.config(args.class.config()?)?;
    let config = EvalConfig {
        t_min: args.t_min,
        t_max: args.t_max,
        folds: args.folds,
        seed: args.seed,
        model,
    };
    config.validate()?;
    let corpus = read_corpus(args.io.input.as_deref(), IngestOptions::default())?;
    let report = evaluate(&corpus, &config)?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: Echo<'a, EvalConfig>,
        report: trajmine::learn::EvalReport,
    }
    let out = Out {
        config: echo("evaluate", args.io.input.as_deref(), config),
        report,
    };
    write_json(args.io.output.as_deref(), &out)?;
    if let Some(path) = &args.save_model {
        let models = (config.t_min..=config.t_max)
            .map(|t| fit_two_stage(&corpus, t, &config.model))
            .collect::<trajmine::Result<Vec<_>>>()?;
        for m in &models {
            for w in &m.warnings {
                eprintln!("t = {}: {w}", m.t);
            }
        }
        write_json(Some(path), &ModelBundle::new(config.model, models))?;
    }
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let text =
        std::fs::read_to_string(&args.model).with_context(|| format!("cannot read model {}", args.model.display()))?;
    let bundle = ModelBundle::from_json(&text).with_context(|| format!("loading model {}", args.model.display()))?;
    let models: Vec<_> = bundle
        .models
        .iter()
        .map(|b| &b.model)
        .filter(|m| args.t.is_none_or(|t| t == m.t))
        .collect();
    if models.is_empty() {
        bail!(usage(format!(
            "model file has no model for t = {}",
            args.t.unwrap_or(0)
        )));
    }
    let corpus = read_corpus(args.io.input.as_deref(), IngestOptions::default())?;
    let authors: Vec<&str> = corpus.authors().collect();
    write_with(args.io.output.as_deref(), |w| {
        writeln!(w, "author_id,t,stratum,prediction,baseline,fallback")?;
        for m in &models {
            for a in &authors {
                let features = match extract_features(&corpus, a, m.t, m.t) {
                    Ok(f) => f,
                    Err(trajmine::Error::Ineligible { .. }) => continue,
                    Err(e) => return Err(e.into()),
                };
                let p = m.predict(&features)?;
                let b = m.predict_baseline(&features)?;
                writeln!(w, "{a},{},{},{:.6},{b:.6},{}", m.t, p.stratum, p.value, p.fallback)?;
            }
        }
        Ok(())
    })
}

fn parse_pairs(text: &str, flag: &str) -> Result<Vec<(TrajectoryClass, String)>> {
    text.split(',')
        .map(|item| {
            let (class, value) = item
                .split_once('=')
                .ok_or_else(|| usage(format!("{flag}: expected CLASS=VALUE, got `{item}`")))?;
            let class: TrajectoryClass = class.trim().parse().map_err(|e| usage(format!("{flag}: {e}")))?;
            Ok((class, value.trim().to_string()))
        })
        .collect()
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut spec = SynthSpec {
        n_authors: args.authors,
        career_length: args.career_length,
        noise_sigma: args.noise,
        self_citation_rate: args.self_citation_rate,
        coauthor_pool: args.coauthor_pool,
        seed: args.seed,
        start_year: args.start_year,
        ..Default::default()
    };
    if let Some(mix) = &args.mix {
        spec.class_mix = BTreeMap::new();
        for (class, w) in parse_pairs(mix, "--mix")? {
            let w: f64 = w.parse().map_err(|_| usage(format!("--mix: bad weight `{w}`")))?;
            spec.class_mix.insert(class, w);
        }
    }
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let labelled = match &args.target_map {
        None => generate(&spec)?,
        Some(text) => {
            let mut maps = BTreeMap::new();
            for (class, v) in parse_pairs(text, "--target-map")? {
                let bad = || usage(format!("--target-map: expected SLOPE:INTERCEPT, got `{v}`"));
                let (s, i) = v.split_once(':').ok_or_else(bad)?;
                let slope = s.parse().map_err(|_| bad())?;
                let intercept = i.parse().map_err(|_| bad())?;
                maps.insert(class, TargetMap { slope, intercept });
            }
            let targets = TargetSpec {
                horizon: args.target_horizon,
                ..TargetSpec::new(maps)
            };
            generate_stratified_targets(&spec, &targets).map_err(|e| usage(e.to_string()))?
        }
    };
    write_with(args.output.as_deref(), |w| Ok(labelled.corpus.write_jsonl(w)?))?;
    if let Some(p) = &args.labels {
        write_with(Some(p), |w| Ok(labelled.write_labels_csv(w)?))?;
    }
    if let Some(p) = &args.targets {
        write_with(Some(p), |w| Ok(labelled.write_targets_csv(w)?))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Series(a) => series(a),
        Command::Classify(a) => classify(a),
        Command::Stats(a) => stats(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Predict(a) => predict(a),
        Command::Synth(a) => synth(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match err.downcast_ref::<trajmine::Error>() {
        Some(trajmine::Error::InvalidArgument(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
