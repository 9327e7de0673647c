use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Montecarlo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// JSON reports; plain text for `bounds`.
    #[default]
    Auto,
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    #[default]
    Uniform,
    Structured,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    #[default]
    ZeroLabel,
    ZeroOffset,
}

/// Every setting a command may read. Config files use these names as JSON keys.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub construction: u8,
    /// Hamming parameter for binary construction-2 codes.
    pub h: u32,
    pub n: Option<usize>,
    pub k: Option<u32>,
    pub u: Option<u32>,
    /// Inner randomness dimension of a random LECSS.
    pub r: Option<usize>,
    /// Field degree; set for Reed-Solomon codes over GF(2^w).
    pub w: Option<u32>,
    /// Message symbols of a Reed-Solomon coset code.
    pub ell: usize,
    /// Corrupted wires for `smt run`.
    pub t: usize,
    pub d: Option<usize>,
    pub rho: Option<f64>,
    pub rho_r: Option<f64>,
    pub rho_w: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub strong: bool,
    pub adversaries: usize,
    pub sample_mode: Sampling,
    pub rule: Rule,
    pub max_messages: usize,
    pub max_set: Option<usize>,
    pub set_draws: usize,
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            construction: 2,
            h: 5,
            n: None,
            k: None,
            u: None,
            r: None,
            w: None,
            ell: 2,
            t: 1,
            d: None,
            rho: None,
            rho_r: None,
            rho_w: None,
            delta: None,
            epsilon: None,
            strong: false,
            adversaries: 100,
            sample_mode: Sampling::Uniform,
            rule: Rule::ZeroLabel,
            max_messages: 64,
            max_set: None,
            set_draws: 16,
            mode: Mode::Exact,
            samples: 100_000,
            seed: 0,
            out: None,
            format: Format::Auto,
        }
    }
}

/// Command-line overrides; each flag replaces the config value when given.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub construction: Option<u8>,
    #[arg(long, global = true)]
    pub h: Option<u32>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true)]
    pub u: Option<u32>,
    #[arg(long, global = true)]
    pub r: Option<usize>,
    #[arg(long, global = true)]
    pub w: Option<u32>,
    #[arg(long, global = true)]
    pub ell: Option<usize>,
    #[arg(long, global = true)]
    pub t: Option<usize>,
    #[arg(long, global = true)]
    pub d: Option<usize>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long = "rho-r", global = true)]
    pub rho_r: Option<f64>,
    #[arg(long = "rho-w", global = true)]
    pub rho_w: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub strong: bool,
    #[arg(long, global = true)]
    pub adversaries: Option<usize>,
    #[arg(long = "sample-mode", global = true)]
    pub sample_mode: Option<Sampling>,
    #[arg(long, global = true)]
    pub rule: Option<Rule>,
    #[arg(long = "max-messages", global = true)]
    pub max_messages: Option<usize>,
    #[arg(long = "max-set", global = true)]
    pub max_set: Option<usize>,
    #[arg(long = "set-draws", global = true)]
    pub set_draws: Option<usize>,
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
}

macro_rules! take {
    ($cfg:ident, $o:ident, $($f:ident),*) => {
        $(if let Some(v) = $o.$f.clone() { $cfg.$f = v; })*
    };
}

macro_rules! take_opt {
    ($cfg:ident, $o:ident, $($f:ident),*) => {
        $(if $o.$f.is_some() { $cfg.$f = $o.$f.clone(); })*
    };
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        take!(cfg, self, construction, h, ell, t, adversaries, sample_mode, rule, max_messages, set_draws, mode);
        take!(cfg, self, samples, seed, format);
        take_opt!(cfg, self, n, k, u, r, w, d, rho, rho_r, rho_w, delta, epsilon, max_set, out);
        cfg.strong |= self.strong;
        cfg
    }
}

/// Parses a config document; an empty document gives the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    if text.trim().is_empty() {
        return Ok(RunConfig::default());
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Config(format!("{} (at `{}`, line {} column {})", inner, e.path(), inner.line(), inner.column()))
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn unit(name: &str, x: Option<f64>) -> Result<(), CliError> {
    match x {
        Some(v) if !(0.0..=1.0).contains(&v) => Err(CliError::Config(format!("{name} = {v} must lie in [0, 1]"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.construction, 1 | 2) {
            return Err(CliError::Config(format!("construction = {} must be 1 or 2", self.construction)));
        }
        if !(2..=6).contains(&self.h) {
            return Err(CliError::Config(format!("h = {} must lie in 2..=6", self.h)));
        }
        unit("rho", self.rho)?;
        unit("rho_r", self.rho_r)?;
        unit("rho_w", self.rho_w)?;
        unit("delta", self.delta)?;
        unit("epsilon", self.epsilon)?;
        if self.adversaries == 0 {
            return Err(CliError::Config("adversaries must be positive".into()));
        }
        if self.mode == Mode::Montecarlo && self.samples == 0 {
            return Err(CliError::Config("samples must be positive in montecarlo mode".into()));
        }
        if self.max_messages == 0 {
            return Err(CliError::Config("max_messages must be positive".into()));
        }
        if let Some(w) = self.w {
            if !(1..=16).contains(&w) {
                return Err(CliError::Config(format!("w = {w} must lie in 1..=16")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
        assert_eq!(parse_config("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("{\"h\": 4,\n \"bogus\": 1}").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn bad_value_names_field() {
        let err = parse_config("{\"mode\": \"fast\"}").unwrap_err().to_string();
        assert!(err.contains("`mode`"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let cfg = parse_config("{\"h\": 4, \"seed\": 3}").unwrap();
        let o = Overrides { h: Some(3), ..Overrides::default() };
        let cfg = o.apply(cfg);
        assert_eq!((cfg.h, cfg.seed), (3, 3));
    }

    #[test]
    fn validation_names_field() {
        let cfg = RunConfig { rho_r: Some(1.5), ..RunConfig::default() };
        assert!(cfg.validate().unwrap_err().to_string().contains("rho_r"));
    }
}
