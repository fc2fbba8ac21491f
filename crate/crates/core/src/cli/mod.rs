//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 bad input data or files,
//! 3 bad configuration. Every failure prints one line starting `error:`.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use self::config::{ConfigFile, Overrides, ReportFormat, RunConfig};
use crate::boost::{load_model, save_model, ObjectiveSpec, Trainer};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::experiment::Evaluator;
use crate::parallel::{with_threads, Parallelism};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "boostray",
    version,
    about = "Gradient tree boosting harness for CNN feature matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a feature file and save it.
    Train(CommonArgs),
    /// Predict classes and probabilities for every row of a feature file.
    Predict(CommonArgs),
    /// Stratified k-fold cross-validation.
    Cv(CommonArgs),
    /// Stratified train/test holdout evaluation.
    Holdout(CommonArgs),
    /// Summarise a saved model.
    Inspect(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Feature file (.fmx with .classes companion, or label,f0,... CSV) [default: none]
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model file to read (predict, inspect) [default: none]
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output path: model for train, report or predictions otherwise [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format [default: text]
    #[arg(long, value_enum)]
    pub report_format: Option<ReportFormat>,
    /// Seed for fold and holdout assignment [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results are identical for any value [default: all cores]
    #[arg(long, env = "BOOSTRAY_THREADS")]
    pub threads: Option<usize>,
    /// Optional key=value config file; flags override its values [default: none]
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of boosting rounds [default: 100]
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Learning rate, in (0, 1] [default: 0.44]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Minimum loss reduction per added leaf [default: 0]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// L2 regularisation of leaf weights [default: 1]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Maximum tree depth [default: 6]
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Minimum hessian sum per child [default: 1]
    #[arg(long)]
    pub min_child_weight: Option<f64>,
    /// Number of cross-validation folds (cv) [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,
    /// Fraction of each class held out for testing (holdout) [default: 0.2]
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Positive class name for two-class metrics [default: first class containing "covid", else class 1]
    #[arg(long)]
    pub positive: Option<String>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p).map_err(|e| match e {
                Error::Io { path, source } => {
                    Error::Config(format!("cannot read config {}: {source}", path.display()))
                }
                e => e,
            })?,
            None => ConfigFile::default(),
        };
        let flags = Overrides {
            data: self.data.clone(),
            model: self.model.clone(),
            out: self.out.clone(),
            report_format: self.report_format,
            seed: self.seed,
            threads: self.threads,
            rounds: self.rounds,
            eta: self.eta,
            gamma: self.gamma,
            lambda: self.lambda,
            max_depth: self.max_depth,
            min_child_weight: self.min_child_weight,
            folds: self.folds,
            test_fraction: self.test_fraction,
            positive: self.positive.clone(),
        };
        RunConfig::resolve(flags, &file)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Domain(_) => EXIT_INTERNAL,
        Error::Io { .. }
        | Error::Format { .. }
        | Error::Value { .. }
        | Error::Length(_)
        | Error::Consistency(_)
        | Error::Stratification { .. }
        | Error::Shape { .. }
        | Error::Input(_) => EXIT_INPUT,
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: {first}");
            return EXIT_CONFIG;
        }
    };
    let outcome = std::panic::catch_unwind(|| dispatch(&cli.command));
    match outcome {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            exit_code(&e)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            EXIT_INTERNAL
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(&a.resolve()?),
        Command::Predict(a) => cmd_predict(&a.resolve()?),
        Command::Cv(a) => cmd_cv(&a.resolve()?),
        Command::Holdout(a) => cmd_holdout(&a.resolve()?),
        Command::Inspect(a) => cmd_inspect(&a.resolve()?),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn parallelism(cfg: &RunConfig) -> Parallelism {
    match cfg.threads {
        Some(n) => Parallelism::for_threads(n),
        None => Parallelism::default(),
    }
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    Dataset::load(cfg.require_data()?)
}

fn positive_index(cfg: &RunConfig, dataset: &Dataset) -> Result<Option<usize>> {
    match &cfg.positive {
        None => Ok(None),
        Some(name) => dataset.class_index(name).map(Some).ok_or_else(|| {
            Error::Config(format!(
                "positive class '{name}' not among [{}]",
                dataset.class_names().join(", ")
            ))
        }),
    }
}

pub fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let out = cfg
        .out
        .as_deref()
        .or(cfg.model.as_deref())
        .ok_or_else(|| Error::Config("train needs --out for the model file".into()))?;
    let dataset = load_dataset(cfg)?;
    let objective = ObjectiveSpec::for_classes(dataset.n_classes())?;
    let trainer = Trainer::new(cfg.params, objective).with_parallelism(parallelism(cfg));
    let fit = with_threads(cfg.threads, || trainer.fit(&dataset))?;
    save_model(&fit.model, out)?;
    println!(
        "trained {} rounds, {} trees, final training objective {:.6}",
        fit.model.trees.len(),
        fit.model.n_trees(),
        fit.final_objective()
    );
    Ok(())
}

pub fn cmd_predict(cfg: &RunConfig) -> Result<()> {
    let model = load_model(cfg.require_model()?)?;
    let dataset = load_dataset(cfg)?;
    let proba = with_threads(cfg.threads, || model.predict_proba(dataset.features()))?;
    let classes = crate::boost::argmax_rows(&proba);

    let mut text = String::from("row_index,predicted_class_name");
    for k in 0..proba.n_cols {
        text.push_str(&format!(",p_class{k}"));
    }
    text.push('\n');
    for (i, (row, &c)) in proba.rows().zip(&classes).enumerate() {
        text.push_str(&format!("{i},{}", model.class_names[c as usize]));
        for p in row {
            text.push_str(&format!(",{p}"));
        }
        text.push('\n');
    }
    emit(cfg.out.as_deref(), &text)
}

fn evaluator(cfg: &RunConfig, dataset: &Dataset) -> Result<Evaluator> {
    let objective = ObjectiveSpec::for_classes(dataset.n_classes())?;
    Ok(Evaluator::new(cfg.params, objective)
        .with_positive(positive_index(cfg, dataset)?)
        .with_parallelism(parallelism(cfg)))
}

pub fn cmd_cv(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let ev = evaluator(cfg, &dataset)?;
    let result = with_threads(cfg.threads, || ev.cv(&dataset, cfg.folds, cfg.seed))?;
    emit(
        cfg.out.as_deref(),
        &report::cv_report(&result, cfg.report_format),
    )
}

pub fn cmd_holdout(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let ev = evaluator(cfg, &dataset)?;
    let result = with_threads(cfg.threads, || {
        ev.holdout(&dataset, cfg.test_fraction, cfg.seed)
    })?;
    emit(
        cfg.out.as_deref(),
        &report::holdout_report(&result, cfg.report_format),
    )
}

pub fn cmd_inspect(cfg: &RunConfig) -> Result<()> {
    let model = load_model(cfg.require_model()?)?;
    emit(
        cfg.out.as_deref(),
        &report::inspect_report(&model, cfg.report_format),
    )
}
