//! Pipeline settings resolution: built-in defaults, then key=value config
//! file entries, then command-line flags, later layers winning.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use narlab::bench::RunSettings;
use narlab::data::{DivisionMethod, NormalizationPolicy};
use narlab::model::InitScheme;

use crate::CliError;

/// Settings flags shared by `run` and `bench`. Every field is optional so
/// config-file values can fill the gaps.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SettingsArgs {
    /// key=value config file applied below the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Hidden units (default 10)
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Input lags (default 2)
    #[arg(long)]
    pub lags: Option<usize>,
    /// Division method: random | block
    #[arg(long)]
    pub division: Option<String>,
    /// Normalizer fit: full-series | train-only
    #[arg(long)]
    pub normalization: Option<String>,
    /// Weight init: nguyen-widrow | uniform-small
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub max_val_fail: Option<usize>,
    #[arg(long)]
    pub min_gradient: Option<f64>,
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long)]
    pub mu_inc: Option<f64>,
    #[arg(long)]
    pub mu_dec: Option<f64>,
    #[arg(long)]
    pub mu_max: Option<f64>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Keep validation stopping active for the Bayesian trainer
    #[arg(long)]
    pub br_validation_stop: Option<bool>,
}

fn parse_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config '{}': {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "config '{}' line {}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "hidden",
    "lags",
    "division",
    "normalization",
    "init",
    "max_epochs",
    "max_val_fail",
    "min_gradient",
    "mu0",
    "mu_inc",
    "mu_dec",
    "mu_max",
    "sigma0",
    "lambda0",
    "br_validation_stop",
];

pub fn parse_division(s: &str) -> Result<DivisionMethod, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "random" | "random-interleaved" => Ok(DivisionMethod::RandomInterleaved),
        "block" | "contiguous-block" => Ok(DivisionMethod::ContiguousBlock),
        other => Err(CliError::usage(format!(
            "unknown division method '{other}' (expected random or block)"
        ))),
    }
}

pub fn parse_normalization(s: &str) -> Result<NormalizationPolicy, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "full-series" | "full" => Ok(NormalizationPolicy::FullSeries),
        "train-only" | "train" => Ok(NormalizationPolicy::TrainOnly),
        other => Err(CliError::usage(format!(
            "unknown normalization policy '{other}' (expected full-series or train-only)"
        ))),
    }
}

pub fn parse_init(s: &str) -> Result<InitScheme, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "nguyen-widrow" | "nw" => Ok(InitScheme::NguyenWidrow),
        "uniform-small" | "uniform" => Ok(InitScheme::UniformSmall),
        other => Err(CliError::usage(format!(
            "unknown init scheme '{other}' (expected nguyen-widrow or uniform-small)"
        ))),
    }
}

/// Builds the effective [`RunSettings`] from defaults, the optional config
/// file, and the flags.
pub fn resolve_settings(args: &SettingsArgs) -> Result<RunSettings, CliError> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    for key in file.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(format!("unknown config key '{key}'")));
        }
    }

    fn pick<T: Clone + std::str::FromStr>(
        flag: &Option<T>,
        file: &HashMap<String, String>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match file.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::usage(format!("config key '{key}': cannot parse '{raw}'"))
            }),
            None => Ok(None),
        }
    }

    let mut settings = RunSettings::default();
    if let Some(v) = pick(&args.hidden, &file, "hidden")? {
        settings.hidden = v;
    }
    if let Some(v) = pick(&args.lags, &file, "lags")? {
        settings.lags = v;
    }
    if let Some(v) = pick(&args.division, &file, "division")? {
        settings.division = parse_division(&v)?;
    }
    if let Some(v) = pick(&args.normalization, &file, "normalization")? {
        settings.normalization = parse_normalization(&v)?;
    }
    if let Some(v) = pick(&args.init, &file, "init")? {
        settings.init = parse_init(&v)?;
    }
    if let Some(v) = pick(&args.max_epochs, &file, "max_epochs")? {
        settings.train.max_epochs = v;
    }
    if let Some(v) = pick(&args.max_val_fail, &file, "max_val_fail")? {
        settings.train.max_val_fail = v;
    }
    if let Some(v) = pick(&args.min_gradient, &file, "min_gradient")? {
        settings.train.min_gradient = v;
    }
    if let Some(v) = pick(&args.mu0, &file, "mu0")? {
        settings.train.mu0 = v;
    }
    if let Some(v) = pick(&args.mu_inc, &file, "mu_inc")? {
        settings.train.mu_inc = v;
    }
    if let Some(v) = pick(&args.mu_dec, &file, "mu_dec")? {
        settings.train.mu_dec = v;
    }
    if let Some(v) = pick(&args.mu_max, &file, "mu_max")? {
        settings.train.mu_max = v;
    }
    if let Some(v) = pick(&args.sigma0, &file, "sigma0")? {
        settings.train.sigma0 = v;
    }
    if let Some(v) = pick(&args.lambda0, &file, "lambda0")? {
        settings.train.lambda0 = v;
    }
    if let Some(v) = pick(&args.br_validation_stop, &file, "br_validation_stop")? {
        settings.train.br_validation_stop = v;
    }
    Ok(settings)
}
