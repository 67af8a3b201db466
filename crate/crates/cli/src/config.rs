//! Flag, config-file and default resolution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;

pub const DEFAULT_CAP: u64 = 10_000_000;
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismName {
    Vcg,
    TwoBidder,
    HighIfPossible,
    Hypergrid,
    RandomHypergrid,
}

impl MechanismName {
    pub fn parse(text: &str) -> Result<Self> {
        match <Self as ValueEnum>::from_str(&text.replace('_', "-"), true) {
            Ok(m) => Ok(m),
            Err(_) => bail!("unknown mechanism `{text}`"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MechanismName::Vcg => "vcg",
            MechanismName::TwoBidder => "two-bidder",
            MechanismName::HighIfPossible => "high-if-possible",
            MechanismName::Hypergrid => "hypergrid",
            MechanismName::RandomHypergrid => "random-hypergrid",
        }
    }
}

/// Defaults read from `--config`. Every key mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub instance: Option<String>,
    pub mechanism: Option<String>,
    pub prior: Option<String>,
    pub pi: Option<Vec<usize>>,
    pub profile: Option<Vec<usize>>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub cap: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub d: Option<f64>,
    pub p: Option<f64>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Parses `key=value` pairs into generator parameters.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for pair in pairs.iter().filter(|p| !p.is_empty()) {
        let Some((k, v)) = pair.split_once('=') else {
            bail!("parameter `{pair}` is not of the form key=value");
        };
        let x: f64 = v.trim().parse().with_context(|| format!("parameter `{k}` is not a number"))?;
        out.insert(k.trim().to_string(), x);
    }
    Ok(out)
}
