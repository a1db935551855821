//! Experiment configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment. Grids are
//! comma-separated. Example:
//!
//! ```text
//! m = 1000
//! dbar = 3.5
//! mode = fixed
//! c_grid = 0.94,0.95,0.96,0.97
//! trials = 10000
//! seed = 42
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use leftmatch::montecarlo::{ExperimentConfig, ExperimentMode, Sweep};
use leftmatch::SamplingMode;

const KEYS: &[&str] = &["m", "dbar", "mode", "c_grid", "alpha_grid", "c", "trials", "seed", "sampling"];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue { line: usize, key: String, value: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_value<T: FromStr>(key: &str, entry: &Entry) -> Result<T, ConfigError> {
    entry.value.parse().map_err(|_| ConfigError::InvalidValue {
        line: entry.line,
        key: key.to_string(),
        value: entry.value.clone(),
    })
}

fn parse_list(key: &str, entry: &Entry) -> Result<Vec<f64>, ConfigError> {
    entry
        .value
        .split(',')
        .map(|item| {
            item.trim().parse().map_err(|_| ConfigError::InvalidValue {
                line: entry.line,
                key: key.to_string(),
                value: item.trim().to_string(),
            })
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        };
        if entries.contains_key(known) {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
        }
        entries.insert(known, Entry { line, value: value.trim().to_string() });
    }

    let get = |key: &'static str| entries.get(key).ok_or(ConfigError::Missing(key));
    let m: usize = parse_value("m", get("m")?)?;
    let dbar: f64 = parse_value("dbar", get("dbar")?)?;
    let trials: u64 = parse_value("trials", get("trials")?)?;
    let base_seed: u64 = parse_value("seed", get("seed")?)?;
    let mode = match entries.get("mode") {
        None => ExperimentMode::Fixed,
        Some(e) => match e.value.as_str() {
            "fixed" => ExperimentMode::Fixed,
            "binomial" => ExperimentMode::Binomial,
            _ => return Err(ConfigError::InvalidValue { line: e.line, key: "mode".into(), value: e.value.clone() }),
        },
    };
    let sampling = match entries.get("sampling") {
        None => SamplingMode::default(),
        Some(e) => parse_value("sampling", e)?,
    };
    let sweep = match (entries.get("c_grid"), entries.get("alpha_grid")) {
        (Some(_), Some(e)) => {
            return Err(ConfigError::Parse { line: e.line, message: "give either c_grid or alpha_grid, not both".into() })
        }
        (Some(e), None) => {
            if let Some(c) = entries.get("c") {
                return Err(ConfigError::Parse { line: c.line, message: "`c` only applies to alpha_grid".into() });
            }
            Sweep::CGrid(parse_list("c_grid", e)?)
        }
        (None, Some(e)) => Sweep::AlphaGrid { alphas: parse_list("alpha_grid", e)?, c: parse_value("c", get("c")?)? },
        (None, None) => return Err(ConfigError::Missing("c_grid")),
    };
    let cfg = ExperimentConfig { m, dbar, mode, sweep, trials, base_seed, sampling };
    cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text)
}
