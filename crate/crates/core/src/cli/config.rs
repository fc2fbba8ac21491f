//! Flat `key=value` configuration files and resolution of the effective run
//! configuration (flags over file over defaults).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::boost::HyperParams;
use crate::data::DEFAULT_SEED;
use crate::error::{Error, Result};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

const KEYS: &[&str] = &[
    "data",
    "model",
    "out",
    "report-format",
    "seed",
    "threads",
    "rounds",
    "eta",
    "gamma",
    "lambda",
    "max-depth",
    "min-child-weight",
    "folds",
    "test-fraction",
    "positive",
];

/// Parsed config file. Keys use the long flag names; `_` and `-` are
/// interchangeable. Blank lines and lines starting with `#` are skipped.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected key=value", i + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "config line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key '{key}': invalid value '{raw}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report_format: ReportFormat,
    pub seed: u64,
    pub threads: Option<usize>,
    pub params: HyperParams,
    pub folds: usize,
    pub test_fraction: f64,
    pub positive: Option<String>,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report_format: Option<ReportFormat>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub rounds: Option<usize>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub max_depth: Option<usize>,
    pub min_child_weight: Option<f64>,
    pub folds: Option<usize>,
    pub test_fraction: Option<f64>,
    pub positive: Option<String>,
}

impl RunConfig {
    pub fn resolve(flags: Overrides, file: &ConfigFile) -> Result<Self> {
        macro_rules! pick {
            ($field:ident, $key:literal) => {
                match flags.$field {
                    Some(v) => Some(v),
                    None => file.get($key)?,
                }
            };
        }
        let defaults = HyperParams::default();
        let params = HyperParams {
            num_rounds: pick!(rounds, "rounds").unwrap_or(defaults.num_rounds),
            eta: pick!(eta, "eta").unwrap_or(defaults.eta),
            gamma: pick!(gamma, "gamma").unwrap_or(defaults.gamma),
            lambda: pick!(lambda, "lambda").unwrap_or(defaults.lambda),
            max_depth: pick!(max_depth, "max-depth").unwrap_or(defaults.max_depth),
            min_child_weight: pick!(min_child_weight, "min-child-weight")
                .unwrap_or(defaults.min_child_weight),
            ..defaults
        };
        params.validate()?;

        let config = RunConfig {
            data: pick!(data, "data"),
            model: pick!(model, "model"),
            out: pick!(out, "out"),
            report_format: pick!(report_format, "report-format").unwrap_or_default(),
            seed: pick!(seed, "seed").unwrap_or(DEFAULT_SEED),
            threads: pick!(threads, "threads"),
            params,
            folds: pick!(folds, "folds").unwrap_or(DEFAULT_FOLDS),
            test_fraction: pick!(test_fraction, "test-fraction").unwrap_or(DEFAULT_TEST_FRACTION),
            positive: pick!(positive, "positive"),
        };
        if config.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be >= 2, got {}",
                config.folds
            )));
        }
        if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test-fraction must lie in (0, 1), got {}",
                config.test_fraction
            )));
        }
        if config.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        Ok(config)
    }

    pub fn require_data(&self) -> Result<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| Error::Config("--data is required".into()))
    }

    pub fn require_model(&self) -> Result<&Path> {
        self.model
            .as_deref()
            .ok_or_else(|| Error::Config("--model is required".into()))
    }
}
