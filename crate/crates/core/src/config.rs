//! TOML experiment descriptions for the command-line front end.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::DmaxRule;
use crate::coding::{calibrate_noise, message_rates, BinningCode, LoadTarget, SimConfig};
use crate::error::{Error, Result};
use crate::model::{toml_key, ChannelParams, ChannelParamsFile, SourceModel, SourceModelFile};
use crate::subset::Subset;
use crate::units::LogBase;

/// Key named by a TOML error, falling back to the key on the offending line.
fn error_key(text: &str, e: &toml::de::Error) -> String {
    let key = toml_key(e);
    if key != "<document>" {
        return key;
    }
    if let Some(span) = e.span() {
        let line_start = text[..span.start.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
        let line = text[line_start..].lines().next().unwrap_or("");
        if let Some((k, _)) = line.split_once('=') {
            let k = k.trim();
            if !k.is_empty() {
                return k.to_string();
            }
        }
    }
    key
}

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::config(error_key(text, &e), e.message().trim().to_string()))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Channel given inline as `[channel]` or by `channel_file`, relative to the config file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParamsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_file: Option<PathBuf>,
}

fn resolve_channel(
    channel: &Option<ChannelParamsFile>,
    file: &Option<PathBuf>,
    base_dir: &Path,
) -> Result<ChannelParams> {
    match (channel, file) {
        (Some(_), Some(_)) => Err(Error::config(
            "channel_file",
            "give either [channel] or channel_file, not both",
        )),
        (Some(c), None) => c.clone().try_into(),
        (None, Some(f)) => {
            let path = base_dir.join(f);
            let text = read_text(&path).map_err(|e| Error::config("channel_file", e.to_string()))?;
            let file: ChannelParamsFile = parse_toml(&text)?;
            file.try_into()
        }
        (None, None) => Err(Error::config("channel", "missing [channel] table or channel_file")),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBaseName {
    #[default]
    Bits,
    Nats,
}

impl From<LogBaseName> for LogBase {
    fn from(b: LogBaseName) -> Self {
        match b {
            LogBaseName::Bits => LogBase::Bits,
            LogBaseName::Nats => LogBase::Nats,
        }
    }
}

/// `region` subcommand input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfigFile {
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default)]
    pub log_base: LogBaseName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParamsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_file: Option<PathBuf>,
    pub source: SourceModelFile,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug)]
pub struct RegionConfig {
    pub kappa: f64,
    pub channel: ChannelParams,
    pub source: SourceModel,
}

impl RegionConfigFile {
    pub fn resolve(&self, base_dir: &Path) -> Result<RegionConfig> {
        let channel = resolve_channel(&self.channel, &self.channel_file, base_dir)?;
        let source = SourceModel::try_from(self.source.clone())?.with_log_base(self.log_base.into());
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::config("kappa", "must be finite and > 0"));
        }
        if source.k() != channel.k() {
            return Err(Error::config(
                "source",
                format!("{} components for K = {}", source.k(), channel.k()),
            ));
        }
        Ok(RegionConfig {
            kappa: self.kappa,
            channel,
            source,
        })
    }
}

/// `d_max` rule as written in config files: `"sqrt"`, `"zero"`, `"fixed:8"`, `"fraction:0.1"`.
pub fn parse_dmax_rule(s: &str) -> Result<DmaxRule> {
    let bad = || Error::config("d_max_rule", format!("unrecognized rule `{s}`"));
    match s.split_once(':') {
        None if s == "sqrt" => Ok(DmaxRule::Sqrt),
        None if s == "zero" => Ok(DmaxRule::Zero),
        Some(("fixed", v)) => v.trim().parse().map(DmaxRule::Fixed).map_err(|_| bad()),
        Some(("fraction", v)) => v.trim().parse().map(DmaxRule::Fraction).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharFnTable {
    pub n: usize,
    pub d_max: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverseSweep {
    pub n_list: Vec<usize>,
    #[serde(default = "sqrt_rule")]
    pub d_max_rule: String,
}

fn sqrt_rule() -> String {
    "sqrt".into()
}

/// `bounds` subcommand input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfigFile {
    pub n_list: Vec<usize>,
    #[serde(default = "sqrt_rule")]
    pub d_max_rule: String,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// 1-based terminal indices; all terminals when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    #[serde(default)]
    pub log_base: LogBaseName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charfn: Option<CharFnTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converse: Option<ConverseSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParamsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_file: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct BoundsConfig {
    pub channel: ChannelParams,
    pub n_list: Vec<usize>,
    pub d_max_rule: DmaxRule,
    pub trials: usize,
    pub seed: u64,
    pub subset: Option<Subset>,
    pub base: LogBase,
    pub charfn: Option<CharFnTable>,
    pub converse: Option<(Vec<usize>, DmaxRule)>,
}

impl BoundsConfigFile {
    pub fn resolve(&self, base_dir: &Path) -> Result<BoundsConfig> {
        let channel = resolve_channel(&self.channel, &self.channel_file, base_dir)?;
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::config("n_list", "need at least one positive block length"));
        }
        let subset = match &self.subset {
            None => None,
            Some(v) => {
                if v.iter().any(|&l| l == 0 || l > channel.terminals()) {
                    return Err(Error::config(
                        "subset",
                        format!("indices must lie in 1..={}", channel.terminals()),
                    ));
                }
                Some(Subset::from_indices(v.iter().copied()))
            }
        };
        let converse = match &self.converse {
            None => None,
            Some(c) => Some((c.n_list.clone(), parse_dmax_rule(&c.d_max_rule)?)),
        };
        Ok(BoundsConfig {
            channel,
            n_list: self.n_list.clone(),
            d_max_rule: parse_dmax_rule(&self.d_max_rule)?,
            trials: self.trials,
            seed: self.seed,
            subset,
            base: self.log_base.into(),
            charfn: self.charfn.clone(),
            converse,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadConstraint {
    Every,
    Sum,
}

/// Sets the noise power so that the message rates load the chosen constraints to `target`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub target: f64,
    pub constraint: LoadConstraint,
}

/// `simulate` subcommand input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfigFile {
    pub n: usize,
    pub blocks: usize,
    pub d_max: usize,
    pub trials: usize,
    #[serde(default)]
    pub delay_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub noise: bool,
    pub m: usize,
    pub source_rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<LoadSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParamsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_file: Option<PathBuf>,
    pub source: SourceModelFile,
}

fn yes() -> bool {
    true
}

impl SimConfigFile {
    pub fn resolve(&self, base_dir: &Path) -> Result<SimConfig> {
        let mut channel = resolve_channel(&self.channel, &self.channel_file, base_dir)?;
        let source = SourceModel::try_from(self.source.clone())?;
        if let Some(load) = &self.load {
            let bins = BinningCode::new(source.alphabets(), self.m, &self.source_rates, 0)?;
            let rates = message_rates(bins.counts(), self.n);
            let target = match load.constraint {
                LoadConstraint::Every => LoadTarget::Every,
                LoadConstraint::Sum => LoadTarget::Sum,
            };
            channel = calibrate_noise(&channel, &rates, load.target, target)?;
        }
        if self.d_max > self.n {
            return Err(Error::config("d_max", "must not exceed n"));
        }
        Ok(SimConfig {
            channel,
            source,
            m: self.m,
            source_rates: self.source_rates.clone(),
            channel_rates: self.channel_rates.clone(),
            n: self.n,
            blocks: self.blocks,
            d_max: self.d_max,
            trials: self.trials,
            delay_samples: self.delay_samples,
            seed: self.seed,
            noise: self.noise,
        })
    }
}

/// `ic` subcommand input; `gij` is the gain from transmitter `i` to receiver `j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcConfigFile {
    pub g11: [f64; 2],
    pub g12: [f64; 2],
    pub g21: [f64; 2],
    pub g22: [f64; 2],
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    pub noise_power: f64,
}

impl IcConfigFile {
    pub fn gains(&self) -> [Complex64; 4] {
        [self.g11, self.g12, self.g21, self.g22].map(|[re, im]| Complex64::new(re, im))
    }
}
