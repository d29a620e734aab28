//! `key = value` configuration files. Command-line flags take precedence
//! over file values.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Table,
}

/// Settings a config file may provide.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub threshold: Option<f64>,
    pub c: Option<f64>,
    pub epochs: Option<u32>,
    pub temperature: Option<f64>,
    pub kernel: Option<String>,
    pub region: Option<String>,
    pub noise: Option<f64>,
    pub participants: Option<u32>,
    pub sessions: Option<u32>,
    pub model: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

pub const KEYS: [&str; 15] = [
    "format",
    "seed",
    "tolerance",
    "threshold",
    "c",
    "epochs",
    "temperature",
    "kernel",
    "region",
    "noise",
    "participants",
    "sessions",
    "model",
    "reports",
    "out_dir",
];

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map(Some)
        .map_err(|e| CliError::usage(format!("config line {line}: invalid value for `{key}`: {e}")))
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<FileConfig> {
        let mut cfg = FileConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {n}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "format" => {
                    cfg.format = Some(
                        Format::from_str(value, true)
                            .map_err(|e| CliError::usage(format!("config line {n}: {e}")))?,
                    )
                }
                "seed" => cfg.seed = parse(n, key, value)?,
                "tolerance" => cfg.tolerance = parse(n, key, value)?,
                "threshold" => cfg.threshold = parse(n, key, value)?,
                "c" => cfg.c = parse(n, key, value)?,
                "epochs" => cfg.epochs = parse(n, key, value)?,
                "temperature" => cfg.temperature = parse(n, key, value)?,
                "kernel" => cfg.kernel = Some(value.to_string()),
                "region" => cfg.region = Some(value.to_string()),
                "noise" => cfg.noise = parse(n, key, value)?,
                "participants" => cfg.participants = parse(n, key, value)?,
                "sessions" => cfg.sessions = parse(n, key, value)?,
                "model" => cfg.model = Some(value.into()),
                "reports" => cfg.reports = Some(value.into()),
                "out_dir" => cfg.out_dir = Some(value.into()),
                other => {
                    return Err(CliError::usage(format!(
                        "config line {n}: unknown key `{other}` (known: {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<FileConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        FileConfig::parse(&text).map_err(|e| e.context(path.display()))
    }
}
