//! Run configuration: a TOML file with global keys and one table per
//! subcommand. Unknown keys are rejected and physical parameters are
//! range-checked when the file is parsed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ediqkd_core::adversary::HolevoModel;
use ediqkd_core::classical::Method;
use ediqkd_core::keyrate::{CorrectionLog, FiniteKeyParams, DEFAULT_TARGET_RATE};
use ediqkd_core::photonic::{NoClick, PhotonicParams, DEFAULT_DARK_COUNT, DEFAULT_RATE_THRESHOLD, REFERENCE_ROUNDS};
use ediqkd_core::protocol::{ChannelSpec, ChannelSwitch, SessionConfig, SettingsMode};
use ediqkd_core::tomography::MeasurementFrame;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

fn config_err(msg: impl Into<String>) -> AppError {
    AppError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameName {
    #[default]
    Rotated,
    Aligned,
}

impl FrameName {
    pub fn frame(self) -> MeasurementFrame {
        match self {
            FrameName::Rotated => MeasurementFrame::rotated(),
            FrameName::Aligned => MeasurementFrame::aligned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Enumerate,
    Refine,
    #[default]
    Both,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Enumerate => Method::Enumerate,
            MethodName::Refine => Method::Refine,
            MethodName::Both => Method::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HolevoName {
    NumericMixture,
    ClosedForm,
    #[default]
    AverageState,
}

impl From<HolevoName> for HolevoModel {
    fn from(h: HolevoName) -> Self {
        match h {
            HolevoName::NumericMixture => HolevoModel::NumericMixture,
            HolevoName::ClosedForm => HolevoModel::ClosedForm,
            HolevoName::AverageState => HolevoModel::AverageStateBound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LogName {
    #[default]
    Binary,
    Decimal,
}

impl From<LogName> for CorrectionLog {
    fn from(l: LogName) -> Self {
        match l {
            LogName::Binary => CorrectionLog::Binary,
            LogName::Decimal => CorrectionLog::Decimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NoClickName {
    #[default]
    Minus,
    Random,
    Discard,
}

impl From<NoClickName> for NoClick {
    fn from(n: NoClickName) -> Self {
        match n {
            NoClickName::Minus => NoClick::Minus,
            NoClickName::Random => NoClick::Random,
            NoClickName::Discard => NoClick::Discard,
        }
    }
}

/// Security parameters and test fraction of the finite-size analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyConfig {
    pub gamma: f64,
    pub eps_s: f64,
    pub eps_ec: f64,
    pub eps_ec_prime: f64,
    pub eps_pa: f64,
    pub log: LogName,
}

impl Default for KeyConfig {
    fn default() -> Self {
        let p = FiniteKeyParams::default();
        Self {
            gamma: p.gamma,
            eps_s: p.eps_s,
            eps_ec: p.eps_ec,
            eps_ec_prime: p.eps_ec_prime,
            eps_pa: p.eps_pa,
            log: LogName::Binary,
        }
    }
}

impl KeyConfig {
    pub fn params(&self) -> AppResult<FiniteKeyParams> {
        let p = FiniteKeyParams {
            gamma: self.gamma,
            eps_s: self.eps_s,
            eps_ec: self.eps_ec,
            eps_ec_prime: self.eps_ec_prime,
            eps_pa: self.eps_pa,
            log: self.log.into(),
            ..FiniteKeyParams::default()
        };
        p.validate().map_err(|e| config_err(format!("key: {e}")))?;
        Ok(p)
    }
}

/// Evenly spaced grid including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64)
            .collect()
    }

    fn check(&self, name: &str, lo: f64, hi: f64) -> AppResult<()> {
        let ok = self.points >= 1
            && self.min.is_finite()
            && self.max.is_finite()
            && lo <= self.min
            && self.min <= self.max
            && self.max <= hi;
        if ok {
            Ok(())
        } else {
            Err(config_err(format!(
                "{name}: grid [{}, {}] with {} points must lie in [{lo}, {hi}] with at least one point",
                self.min, self.max, self.points
            )))
        }
    }
}

fn check_in(name: &str, v: f64, lo: f64, hi: f64) -> AppResult<()> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(config_err(format!("{name} = {v} is outside [{lo}, {hi}]")))
    }
}

fn check_all(name: &str, vs: &[f64], lo: f64, hi: f64) -> AppResult<()> {
    if vs.is_empty() {
        return Err(config_err(format!("{name} must not be empty")));
    }
    vs.iter().try_for_each(|&v| check_in(name, v, lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConfig {
    pub frame: FrameName,
    pub method: MethodName,
    /// Read and write the on-disk cache.
    pub cache: bool,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            frame: FrameName::default(),
            method: MethodName::default(),
            cache: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    pub qber: Grid,
    pub holevo: HolevoName,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            qber: Grid::new(0.0, 0.1, 201),
            holevo: HolevoName::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiniteConfig {
    pub qbers: Vec<f64>,
    /// Grid of `log10 n`.
    pub log10_n: Grid,
    pub key: KeyConfig,
}

impl Default for FiniteConfig {
    fn default() -> Self {
        Self {
            qbers: vec![0.005, 0.025, 0.05],
            log10_n: Grid::new(2.0, 12.0, 201),
            key: KeyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfactorConfig {
    pub qbers: Vec<f64>,
    /// Smallest rate that counts as a key.
    pub target: f64,
    pub key: KeyConfig,
}

impl Default for EfactorConfig {
    fn default() -> Self {
        Self {
            qbers: vec![0.055, 0.06, 0.065, 0.066, 0.067],
            target: DEFAULT_TARGET_RATE,
            key: KeyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SecrecyConfig {
    pub qber: Grid,
}

impl Default for SecrecyConfig {
    fn default() -> Self {
        Self {
            qber: Grid::new(0.0, 0.15, 50),
        }
    }
}

/// Source and detector parameters shared by the photonic commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    pub p_dc: f64,
    pub mu: f64,
    pub alpha_deg: f64,
    pub no_click: NoClickName,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            p_dc: DEFAULT_DARK_COUNT,
            mu: 0.01,
            alpha_deg: 45.0,
            no_click: NoClickName::default(),
        }
    }
}

impl SourceConfig {
    pub fn params(&self, eta: f64, f_source: f64) -> AppResult<PhotonicParams> {
        let p = PhotonicParams {
            eta,
            p_dc: self.p_dc,
            mu: self.mu,
            f_source,
            alpha: self.alpha_deg.to_radians(),
            p_post: 0.0,
            p_noise: 0.0,
            no_click: self.no_click.into(),
        };
        p.validate().map_err(|e| config_err(format!("photonic: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhotonicConfig {
    pub eta: Grid,
    /// One curve per source fidelity and preprocessing flag.
    pub f_sources: Vec<f64>,
    pub preprocessing: Vec<bool>,
    /// Optimise `α` and `μ` (and preprocessing); otherwise use `source` as given.
    pub optimize: bool,
    /// Also locate the smallest efficiency that reaches `threshold`.
    pub find_threshold: bool,
    pub threshold: f64,
    pub total_rounds: f64,
    pub frame: FrameName,
    pub source: SourceConfig,
    pub key: KeyConfig,
}

impl Default for PhotonicConfig {
    fn default() -> Self {
        Self {
            eta: Grid::new(0.8, 1.0, 41),
            f_sources: vec![0.9952],
            preprocessing: vec![false],
            optimize: true,
            find_threshold: true,
            threshold: DEFAULT_RATE_THRESHOLD,
            total_rounds: REFERENCE_ROUNDS,
            frame: FrameName::default(),
            source: SourceConfig::default(),
            key: KeyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfactorEtaConfig {
    pub etas: Vec<f64>,
    pub f_source: f64,
    pub target: f64,
    pub frame: FrameName,
    pub source: SourceConfig,
    pub key: KeyConfig,
}

impl Default for EfactorEtaConfig {
    fn default() -> Self {
        Self {
            etas: vec![1.0, 0.95, 0.92, 0.9, 0.8973, 0.889, 0.888],
            f_source: 0.998,
            target: DEFAULT_TARGET_RATE,
            frame: FrameName::default(),
            source: SourceConfig::default(),
            key: KeyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    pub eta: Grid,
    pub log10_n: Grid,
    pub f_source: f64,
    pub frame: FrameName,
    pub source: SourceConfig,
    pub key: KeyConfig,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            eta: Grid::new(0.88, 1.0, 25),
            log10_n: Grid::new(3.0, 12.0, 37),
            f_source: 0.998,
            frame: FrameName::default(),
            source: SourceConfig::default(),
            key: KeyConfig::default(),
        }
    }
}

/// Channel between preparation and measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelConfig {
    #[default]
    Ideal,
    Flip {
        q: f64,
    },
    Uqcm {
        p: f64,
    },
    Depolarizing {
        q: f64,
    },
    Photonic {
        eta: f64,
        #[serde(default = "one")]
        f_source: f64,
        #[serde(default)]
        source: SourceConfig,
    },
}

fn one() -> f64 {
    1.0
}

impl ChannelConfig {
    pub fn spec(&self) -> AppResult<ChannelSpec> {
        let spec = match *self {
            ChannelConfig::Ideal => ChannelSpec::Ideal,
            ChannelConfig::Flip { q } => ChannelSpec::Flip(q),
            ChannelConfig::Uqcm { p } => ChannelSpec::Uqcm(p),
            ChannelConfig::Depolarizing { q } => ChannelSpec::Depolarizing(q),
            ChannelConfig::Photonic { eta, f_source, source } => ChannelSpec::Photonic(source.params(eta, f_source)?),
        };
        spec.validate().map_err(|e| config_err(format!("channel: {e}")))?;
        Ok(spec)
    }
}

/// `ideal`, `flip:Q`, `uqcm:P`, `depolarizing:Q` or `photonic:ETA`.
impl FromStr for ChannelConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = || -> Result<f64, String> {
            arg.ok_or_else(|| format!("{kind} needs a parameter, e.g. {kind}:0.1"))?
                .parse::<f64>()
                .map_err(|e| format!("{kind}: {e}"))
        };
        Ok(match kind {
            "ideal" if arg.is_none() => ChannelConfig::Ideal,
            "flip" => ChannelConfig::Flip { q: num()? },
            "uqcm" => ChannelConfig::Uqcm { p: num()? },
            "depolarizing" => ChannelConfig::Depolarizing { q: num()? },
            "photonic" => ChannelConfig::Photonic {
                eta: num()?,
                f_source: 1.0,
                source: SourceConfig::default(),
            },
            _ => return Err(format!("unknown channel '{s}'")),
        })
    }
}

impl fmt::Display for ChannelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelConfig::Ideal => write!(f, "ideal"),
            ChannelConfig::Flip { q } => write!(f, "flip:{q}"),
            ChannelConfig::Uqcm { p } => write!(f, "uqcm:{p}"),
            ChannelConfig::Depolarizing { q } => write!(f, "depolarizing:{q}"),
            ChannelConfig::Photonic { eta, .. } => write!(f, "photonic:{eta}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SettingsConfig {
    Uniform {
        #[serde(default = "default_sacrifice")]
        sacrifice: f64,
    },
    Biased {
        gamma: f64,
    },
}

fn default_sacrifice() -> f64 {
    0.1
}

impl Default for SettingsConfig {
    fn default() -> Self {
        SettingsConfig::Uniform {
            sacrifice: default_sacrifice(),
        }
    }
}

impl From<SettingsConfig> for SettingsMode {
    fn from(s: SettingsConfig) -> Self {
        match s {
            SettingsConfig::Uniform { sacrifice } => SettingsMode::Uniform { sacrifice },
            SettingsConfig::Biased { gamma } => SettingsMode::Biased { gamma },
        }
    }
}

/// `uniform`, `uniform:S` or `biased:GAMMA`.
impl FromStr for SettingsConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |a: &str| a.parse::<f64>().map_err(|e| format!("{s}: {e}"));
        match s.split_once(':') {
            None if s == "uniform" => Ok(SettingsConfig::default()),
            Some(("uniform", a)) => Ok(SettingsConfig::Uniform { sacrifice: parse(a)? }),
            Some(("biased", a)) => Ok(SettingsConfig::Biased { gamma: parse(a)? }),
            _ => Err(format!("unknown settings mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub rounds: u64,
    pub channel: ChannelConfig,
    pub settings: SettingsConfig,
    pub correction: bool,
    pub frame: FrameName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_at: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_channel: Option<ChannelConfig>,
    /// Classical bound to certify against; computed (and cached) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_gc: Option<f64>,
    /// Per-round CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<PathBuf>,
    /// Test-round statistics CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            rounds: 1_000_000,
            channel: ChannelConfig::default(),
            settings: SettingsConfig::default(),
            correction: true,
            frame: FrameName::default(),
            blocks: None,
            switch_at: None,
            switch_channel: None,
            f_gc: None,
            records: None,
            stats: None,
        }
    }
}

impl SimulateConfig {
    pub fn session(&self, seed: u64) -> AppResult<SessionConfig> {
        let switch = match (self.switch_at, self.switch_channel) {
            (Some(at), Some(c)) => Some(ChannelSwitch { at, channel: c.spec()? }),
            (None, None) => None,
            _ => return Err(config_err("switch_at and switch_channel must be given together")),
        };
        let cfg = SessionConfig {
            rounds: self.rounds,
            settings: self.settings.into(),
            seed,
            channel: self.channel.spec()?,
            switch,
            correction: self.correction,
            frame: self.frame.frame(),
            blocks: self.blocks,
        };
        cfg.validate().map_err(|e| config_err(format!("simulate: {e}")))?;
        if let Some(f) = self.f_gc {
            check_in("f_gc", f, 0.0, 1.0)?;
        }
        Ok(cfg)
    }
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite: Option<FiniteConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efactor: Option<EfactorConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secrecy: Option<SecrecyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photonic: Option<PhotonicConfig>,
    #[serde(rename = "efactor-eta", skip_serializing_if = "Option::is_none")]
    pub efactor_eta: Option<EfactorEtaConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
}

impl RunConfig {
    /// Parses and range-checks a configuration document.
    pub fn parse(text: &str) -> AppResult<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn validate(&self) -> AppResult<()> {
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        if let Some(r) = &self.rate {
            let model: HolevoModel = r.holevo.into();
            r.qber.check("rate.qber", 0.0, model.max_qber())?;
        }
        if let Some(f) = &self.finite {
            check_all("finite.qbers", &f.qbers, 0.0, 0.5)?;
            f.log10_n.check("finite.log10_n", 0.0, 20.0)?;
            f.key.params()?;
        }
        if let Some(e) = &self.efactor {
            check_all("efactor.qbers", &e.qbers, 0.0, 0.5)?;
            check_in("efactor.target", e.target, f64::MIN_POSITIVE, 1.0)?;
            e.key.params()?;
        }
        if let Some(s) = &self.secrecy {
            s.qber.check("secrecy.qber", 0.0, 1.0 / 6.0)?;
        }
        if let Some(p) = &self.photonic {
            p.eta.check("photonic.eta", 0.0, 1.0)?;
            check_all("photonic.f_sources", &p.f_sources, 0.0, 1.0)?;
            if p.preprocessing.is_empty() {
                return Err(config_err("photonic.preprocessing must not be empty"));
            }
            check_in("photonic.threshold", p.threshold, f64::MIN_POSITIVE, 1.0)?;
            check_in("photonic.total_rounds", p.total_rounds, 1.0, 1e30)?;
            for &f in &p.f_sources {
                p.source.params(1.0, f)?;
            }
            p.key.params()?;
        }
        if let Some(e) = &self.efactor_eta {
            check_all("efactor-eta.etas", &e.etas, 0.0, 1.0)?;
            check_in("efactor-eta.target", e.target, f64::MIN_POSITIVE, 1.0)?;
            e.source.params(1.0, e.f_source)?;
            e.key.params()?;
        }
        if let Some(s) = &self.surface {
            s.eta.check("surface.eta", 0.0, 1.0)?;
            s.log10_n.check("surface.log10_n", 0.0, 20.0)?;
            s.source.params(1.0, s.f_source)?;
            s.key.params()?;
        }
        if let Some(s) = &self.simulate {
            s.session(self.seed())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_valid() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("sed = 3").is_err());
        assert!(RunConfig::parse("[secrecy]\npoints = 3").is_err());
        assert!(RunConfig::parse("[simulate.channel]\nkind = \"flip\"\nq = 0.1\nr = 2").is_err());
    }

    #[test]
    fn ranges_checked_at_parse() {
        let e = RunConfig::parse("[simulate.channel]\nkind = \"flip\"\nq = 0.7").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(RunConfig::parse("[finite]\nqbers = [0.01, -0.2]").is_err());
        assert!(RunConfig::parse("[finite.key]\neps_s = 0").is_err());
        assert!(RunConfig::parse("[efactor-eta]\netas = [1.2]").is_err());
        assert!(RunConfig::parse("[photonic.source]\nalpha_deg = 60.0").is_err());
        assert!(RunConfig::parse("threads = 0").is_err());
        assert!(
            RunConfig::parse("[rate]\nholevo = \"numeric-mixture\"\nqber = { min = 0.0, max = 0.3, points = 4 }")
                .is_err()
        );
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = RunConfig::parse(
            r#"
seed = 7
threads = 2

[simulate]
rounds = 1000
settings = { mode = "biased", gamma = 0.05 }
channel = { kind = "photonic", eta = 0.9, f_source = 0.99 }
blocks = 4

[finite.key]
log = "decimal"
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed(), 7);
        let s = cfg.simulate.as_ref().unwrap().session(7).unwrap();
        assert_eq!(s.settings, SettingsMode::Biased { gamma: 0.05 });
        assert!(matches!(s.channel, ChannelSpec::Photonic(p) if p.eta == 0.9));
        assert_eq!(cfg.finite.unwrap().key.log, LogName::Decimal);
    }

    #[test]
    fn serialisation_round_trips() {
        let cfg = RunConfig {
            seed: Some(3),
            photonic: Some(PhotonicConfig::default()),
            simulate: Some(SimulateConfig {
                channel: ChannelConfig::Flip { q: 1.0 / 6.0 },
                blocks: Some(5),
                ..SimulateConfig::default()
            }),
            efactor_eta: Some(EfactorEtaConfig::default()),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn channel_strings() {
        assert_eq!(
            "flip:0.25".parse::<ChannelConfig>().unwrap(),
            ChannelConfig::Flip { q: 0.25 }
        );
        assert_eq!("ideal".parse::<ChannelConfig>().unwrap(), ChannelConfig::Ideal);
        assert!("flip".parse::<ChannelConfig>().is_err());
        assert!("warp:1".parse::<ChannelConfig>().is_err());
        assert_eq!(
            "biased:0.02".parse::<SettingsConfig>().unwrap(),
            SettingsConfig::Biased { gamma: 0.02 }
        );
    }

    #[test]
    fn grid_values() {
        let g = Grid::new(0.0, 1.0, 5).values();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Grid::new(2.0, 2.0, 1).values(), vec![2.0]);
    }
}
