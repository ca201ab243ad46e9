//! Experiment configuration: flat TOML file, command-line overrides, defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sos_core::critical_h;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    OracleVerify,
    SamplerValidate,
    Domination,
    SubcriticalHeight,
    CriticalZeros,
    CriticalHeightExplore,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::OracleVerify,
        Experiment::SamplerValidate,
        Experiment::Domination,
        Experiment::SubcriticalHeight,
        Experiment::CriticalZeros,
        Experiment::CriticalHeightExplore,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::OracleVerify => "oracle-verify",
            Experiment::SamplerValidate => "sampler-validate",
            Experiment::Domination => "domination",
            Experiment::SubcriticalHeight => "subcritical-height",
            Experiment::CriticalZeros => "critical-zeros",
            Experiment::CriticalHeightExplore => "critical-height-explore",
        }
    }

    fn is_critical(&self) -> bool {
        matches!(
            self,
            Experiment::CriticalZeros | Experiment::CriticalHeightExplore
        )
    }

    fn default_h(&self) -> Vec<f64> {
        match self {
            Experiment::CriticalZeros | Experiment::CriticalHeightExplore => vec![1.0],
            Experiment::Domination => vec![0.0, 1.0],
            Experiment::SamplerValidate => vec![0.0, 1.0],
            _ => vec![0.0],
        }
    }

    fn default_n(&self) -> Vec<usize> {
        match self {
            Experiment::OracleVerify | Experiment::SamplerValidate => vec![2],
            Experiment::Domination => vec![16],
            Experiment::SubcriticalHeight | Experiment::CriticalHeightExplore => vec![64, 128, 256],
            Experiment::CriticalZeros => vec![32, 64, 128],
        }
    }

    fn default_cap(&self) -> Option<u32> {
        match self {
            Experiment::SamplerValidate => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMode {
    Absolute,
    FractionOfHw,
}

/// Starting field of every chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// `phi = 0`.
    Zero,
    /// `phi = H` (or `H_w` at the wetting threshold), to approach from above.
    Typical,
}

/// `value` as an absolute reward or as a multiple of `h_w(beta)`.
pub fn resolve_h(mode: HMode, value: f64, beta: f64) -> f64 {
    match mode {
        HMode::Absolute => value,
        // exactly h_w for a fraction of one, without a rounding multiply
        HMode::FractionOfHw if value == 1.0 => critical_h(beta),
        HMode::FractionOfHw => value * critical_h(beta),
    }
}

/// Keys accepted in a config file, all optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub beta: Option<f64>,
    pub h_mode: Option<HMode>,
    pub h: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    pub cap: Option<u32>,
    pub sweeps: Option<u64>,
    pub burn_in: Option<u64>,
    pub thinning: Option<u64>,
    pub seed: Option<u64>,
    pub m: Option<Vec<i64>>,
    #[serde(rename = "C")]
    pub c: Option<Vec<f64>>,
    pub initial: Option<Initial>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ConfigOverrides {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.into(),
                source,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::new(),
            source: Box::new(e),
        })
    }

    /// Fields set in `over` replace those in `self`.
    pub fn layered(self, over: ConfigOverrides) -> Self {
        Self {
            experiment: over.experiment.or(self.experiment),
            beta: over.beta.or(self.beta),
            h_mode: over.h_mode.or(self.h_mode),
            h: over.h.or(self.h),
            n: over.n.or(self.n),
            cap: over.cap.or(self.cap),
            sweeps: over.sweeps.or(self.sweeps),
            burn_in: over.burn_in.or(self.burn_in),
            thinning: over.thinning.or(self.thinning),
            seed: over.seed.or(self.seed),
            m: over.m.or(self.m),
            c: over.c.or(self.c),
            initial: over.initial.or(self.initial),
            out: over.out.or(self.out),
            threads: over.threads.or(self.threads),
        }
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub beta: f64,
    pub h_mode: HMode,
    /// Values as given, interpreted through `h_mode`.
    pub h_values: Vec<f64>,
    /// The rewards actually simulated.
    pub h_resolved: Vec<f64>,
    pub h_w: f64,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub cap: Option<u32>,
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub m: Vec<i64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub initial: Initial,
    pub out: PathBuf,
    /// Worker threads; `None` uses every core. Does not affect results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub const DEFAULT_BETA: f64 = 1.0;
    pub const DEFAULT_SWEEPS: u64 = 20_000;
    pub const DEFAULT_BURN_IN: u64 = 2_000;
    pub const DEFAULT_THINNING: u64 = 10;
    pub const DEFAULT_SEED: u64 = 1;

    /// Fills unset keys with defaults and validates the result.
    pub fn resolve(raw: ConfigOverrides) -> Result<Self, ConfigError> {
        let experiment = raw
            .experiment
            .ok_or_else(|| ConfigError::Invalid("no experiment given".into()))?;
        let beta = raw.beta.unwrap_or(Self::DEFAULT_BETA);
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let h_mode = raw.h_mode.unwrap_or(HMode::FractionOfHw);
        let h_values = raw.h.unwrap_or_else(|| match h_mode {
            HMode::FractionOfHw => experiment.default_h(),
            HMode::Absolute => experiment
                .default_h()
                .iter()
                .map(|&f| resolve_h(HMode::FractionOfHw, f, beta))
                .collect(),
        });
        if h_values.is_empty() {
            return Err(ConfigError::Invalid("empty h list".into()));
        }
        for &v in &h_values {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "h values must be nonnegative, got {v}"
                )));
            }
            if h_mode == HMode::FractionOfHw && v > 1.0 && !experiment.is_critical() {
                return Err(ConfigError::Invalid(format!(
                    "fraction of h_w must lie in [0, 1], got {v}"
                )));
            }
        }
        let h_resolved: Vec<f64> = h_values
            .iter()
            .map(|&v| resolve_h(h_mode, v, beta))
            .collect();
        let h_w = critical_h(beta);
        if experiment == Experiment::Domination && h_resolved.len() < 2 {
            return Err(ConfigError::Invalid(
                "domination needs at least two h values".into(),
            ));
        }

        let n = raw.n.unwrap_or_else(|| experiment.default_n());
        if n.is_empty() || n.contains(&0) {
            return Err(ConfigError::Invalid(
                "N list must be nonempty with positive entries".into(),
            ));
        }
        let sweeps = raw.sweeps.unwrap_or(Self::DEFAULT_SWEEPS);
        let burn_in = raw.burn_in.unwrap_or(Self::DEFAULT_BURN_IN.min(sweeps));
        let thinning = raw.thinning.unwrap_or(Self::DEFAULT_THINNING);
        if thinning == 0 {
            return Err(ConfigError::Invalid("thinning must be at least 1".into()));
        }
        if burn_in > sweeps {
            return Err(ConfigError::Invalid(format!(
                "burn_in {burn_in} exceeds sweeps {sweeps}"
            )));
        }
        let cap = raw.cap.or_else(|| experiment.default_cap());
        if cap == Some(0) {
            return Err(ConfigError::Invalid("cap must be positive".into()));
        }
        if raw.threads == Some(0) {
            return Err(ConfigError::Invalid("threads must be positive".into()));
        }
        let m = raw.m.unwrap_or_else(|| vec![1, 2, 3]);
        let c = raw.c.unwrap_or_else(|| vec![1.0]);
        if m.is_empty() || c.is_empty() {
            return Err(ConfigError::Invalid(
                "m and C lists must be nonempty".into(),
            ));
        }
        Ok(Self {
            experiment,
            beta,
            h_mode,
            h_values,
            h_resolved,
            h_w,
            n,
            cap,
            sweeps,
            burn_in,
            thinning,
            seed: raw.seed.unwrap_or(Self::DEFAULT_SEED),
            m,
            c,
            initial: raw.initial.unwrap_or(Initial::Zero),
            out: raw
                .out
                .unwrap_or_else(|| PathBuf::from("runs").join(experiment.name())),
            threads: raw.threads,
        })
    }

    /// Defaults, then the file (if any), then command-line overrides.
    pub fn load(file: Option<&Path>, cli: ConfigOverrides) -> Result<Self, ConfigError> {
        let base = match file {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        Self::resolve(base.layered(cli))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_experiment(e: Experiment) -> ConfigOverrides {
        ConfigOverrides {
            experiment: Some(e),
            ..Default::default()
        }
    }

    #[test]
    fn resolve_h_examples() {
        assert_eq!(resolve_h(HMode::FractionOfHw, 0.0, 1.0), 0.0);
        assert_eq!(resolve_h(HMode::FractionOfHw, 1.0, 1.0), critical_h(1.0));
        for beta in [0.5, 1.0, 3.0] {
            assert_eq!(resolve_h(HMode::Absolute, 0.01, beta), 0.01);
        }
    }

    #[test]
    fn parses_flat_file() {
        let raw = ConfigOverrides::from_toml(
            r#"
            experiment = "subcritical-height"
            beta = 1.0
            h_mode = "fraction_of_hw"
            h = [0.0, 0.5, 0.9]
            N = [64, 128]
            sweeps = 500
            burn_in = 50
            thinning = 5
            seed = 9
            m = [1, 2, 3]
            C = [0.5, 1.0]
            initial = "typical"
            out = "runs/x"
            "#,
        )
        .unwrap();
        let cfg = ExperimentConfig::resolve(raw).unwrap();
        assert_eq!(cfg.experiment, Experiment::SubcriticalHeight);
        assert_eq!(cfg.n, vec![64, 128]);
        assert_eq!(cfg.h_resolved[1], 0.5 * critical_h(1.0));
        assert_eq!(cfg.initial, Initial::Typical);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ConfigOverrides::from_toml("bogus = 1").is_err());
        assert!(ConfigOverrides::from_toml("experiment = \"nope\"").is_err());
        let mut raw = with_experiment(Experiment::SubcriticalHeight);
        raw.h = Some(vec![1.5]);
        assert!(ExperimentConfig::resolve(raw).is_err());
        let mut raw = with_experiment(Experiment::SubcriticalHeight);
        raw.sweeps = Some(10);
        raw.burn_in = Some(20);
        assert!(ExperimentConfig::resolve(raw).is_err());
        assert!(ExperimentConfig::resolve(ConfigOverrides::default()).is_err());
        let mut raw = with_experiment(Experiment::Domination);
        raw.h = Some(vec![0.0]);
        assert!(ExperimentConfig::resolve(raw).is_err());
    }

    #[test]
    fn precedence_cli_over_file_over_defaults() {
        let file =
            ConfigOverrides::from_toml("experiment = \"critical-zeros\"\nbeta = 2.0\nseed = 4")
                .unwrap();
        let cli = ConfigOverrides {
            beta: Some(1.5),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(file.layered(cli)).unwrap();
        assert_eq!(cfg.beta, 1.5);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.sweeps, ExperimentConfig::DEFAULT_SWEEPS);
        assert_eq!(cfg.h_resolved, vec![critical_h(1.5)]);
        assert_eq!(cfg.n, vec![32, 64, 128]);
    }
}
