//! Run configuration: flat `key=value` text files with CLI-flag overrides.
//! `#`-prefixed lines are comments. Every invariant violation is reported
//! with the offending field name.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::gibbs::SpikeVariant;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected key=value, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub variant: SpikeVariant,
    pub iters: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub chains: u64,
    pub demean: bool,
    pub standardize: bool,
    /// Progress line every this many sweeps; 0 disables.
    pub progress_every: u64,
    // Optional hyper-parameter overrides; defaults are filled in at fit time.
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub dependence: Option<u32>,
    pub loc_mean: Option<f64>,
    pub loc_var: Option<f64>,
    pub scale_shape: Option<f64>,
    pub scale_scale: Option<f64>,
    pub spike_shape: Option<f64>,
    pub spike_scale: Option<f64>,
    pub dof: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::new(),
            out: PathBuf::new(),
            variant: SpikeVariant::Dirac,
            iters: 10_000,
            burn_in: 2_000,
            thin: 1,
            seed: 0,
            chains: 1,
            demean: true,
            standardize: false,
            progress_every: 1_000,
            alpha: None,
            eta: None,
            dependence: None,
            loc_mean: None,
            loc_var: None,
            scale_shape: None,
            scale_scale: None,
            spike_shape: None,
            spike_scale: None,
            dof: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        let mut pairs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Malformed {
                line: idx + 1,
                text: line.to_string(),
            })?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        for (key, value) in pairs {
            config.set(&key, &value)?;
        }
        Ok(config)
    }

    /// Apply one `key=value` override (the CLI funnels flags through here).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(
            field: &'static str,
            value: &str,
        ) -> Result<T, ConfigError> {
            value
                .parse()
                .map_err(|_| invalid(field, format!("cannot parse {value:?}")))
        }
        match key {
            "input" => self.input = PathBuf::from(value),
            "out" => self.out = PathBuf::from(value),
            "variant" => {
                self.variant = SpikeVariant::parse(value)
                    .ok_or_else(|| invalid("variant", format!("unknown variant {value:?}")))?
            }
            "iters" => self.iters = parse("iters", value)?,
            "burn_in" => self.burn_in = parse("burn_in", value)?,
            "thin" => self.thin = parse("thin", value)?,
            "seed" => self.seed = parse("seed", value)?,
            "chains" => self.chains = parse("chains", value)?,
            "demean" => self.demean = parse("demean", value)?,
            "standardize" => self.standardize = parse("standardize", value)?,
            "progress_every" => self.progress_every = parse("progress_every", value)?,
            "alpha" => self.alpha = Some(parse("alpha", value)?),
            "eta" => self.eta = Some(parse("eta", value)?),
            "m" => self.dependence = Some(parse("m", value)?),
            "c" => self.loc_mean = Some(parse("c", value)?),
            "d" => self.loc_var = Some(parse("d", value)?),
            "a1" => self.scale_shape = Some(parse("a1", value)?),
            "b1" => self.scale_scale = Some(parse("b1", value)?),
            "a0" => self.spike_shape = Some(parse("a0", value)?),
            "b0" => self.spike_scale = Some(parse("b0", value)?),
            "nu" => self.dof = Some(parse("nu", value)?),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.input.as_os_str().is_empty() {
            return Err(invalid("input", "path must not be empty"));
        }
        if self.out.as_os_str().is_empty() {
            return Err(invalid("out", "path must not be empty"));
        }
        if self.iters < self.burn_in {
            return Err(invalid(
                "iters",
                format!("iters {} below burn_in {}", self.iters, self.burn_in),
            ));
        }
        if self.thin < 1 {
            return Err(invalid("thin", "thinning interval must be >= 1"));
        }
        if self.chains < 1 {
            return Err(invalid("chains", "chain count must be >= 1"));
        }
        for (field, value) in [
            ("alpha", self.alpha),
            ("eta", self.eta),
            ("d", self.loc_var),
            ("a1", self.scale_shape),
            ("b1", self.scale_scale),
            ("a0", self.spike_shape),
            ("b0", self.spike_scale),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(field, format!("must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_key_values_with_comments() {
        let text = "# comment\nvariant = normal\niters=500\nburn_in=100\nalpha=2.0\n\nm=3\n";
        let config = RunConfig::from_str_contents(text).unwrap();
        assert_eq!(config.variant, SpikeVariant::NormalDiffuse);
        assert_eq!(config.iters, 500);
        assert_eq!(config.alpha, Some(2.0));
        assert_eq!(config.dependence, Some(3));
    }

    #[test]
    fn rejects_malformed_lines_and_unknown_keys() {
        assert!(matches!(
            RunConfig::from_str_contents("iters 500"),
            Err(ConfigError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::from_str_contents("wibble=1"),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn validation_names_the_field() {
        let mut config = RunConfig::default();
        config.input = PathBuf::from("x.csv");
        config.out = PathBuf::from("out");
        config.iters = 10;
        config.burn_in = 20;
        match config.validate().unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "iters"),
            other => panic!("unexpected {other:?}"),
        }
        config.burn_in = 5;
        config.alpha = Some(-1.0);
        match config.validate().unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "alpha"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iters_equal_burn_in_is_allowed() {
        let mut config = RunConfig::default();
        config.input = PathBuf::from("x.csv");
        config.out = PathBuf::from("out");
        config.iters = 100;
        config.burn_in = 100;
        assert!(config.validate().is_ok());
    }
}
