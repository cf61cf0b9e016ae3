//! Run configuration: a line-based `key=value` file, then flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use hardylim_core::hardy_limit::ScheduleVariant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("invalid {key}: {msg}")]
    Invalid { key: &'static str, msg: String },
}

fn invalid<T>(key: &'static str, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid { key, msg: msg.into() })
}

pub const KEYS: [&str; 9] = [
    "m", "dt", "horizon", "n_paths", "seed", "q_max", "r_trunc", "variant", "out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Dimension of the dimension-generic suites; 2 or 3.
    pub m: usize,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub q_max: u32,
    pub r_trunc: f64,
    pub variant: ScheduleVariant,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 2,
            dt: 1e-4,
            horizon: 50.0,
            n_paths: 10_000,
            seed: 20_240_917,
            q_max: 3,
            r_trunc: 0.999,
            variant: ScheduleVariant::ConservativeMin,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Values given on the command line; each replaces the file's.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub n_paths: Option<usize>,
    pub dt: Option<f64>,
    pub variant: Option<String>,
    pub q_max: Option<u32>,
}

fn parse_num<T: std::str::FromStr>(key: &'static str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e: T::Err| ConfigError::Invalid {
        key,
        msg: format!("`{v}`: {e}"),
    })
}

fn parse_variant(v: &str) -> Result<ScheduleVariant, ConfigError> {
    v.parse().map_err(|e| ConfigError::Invalid {
        key: "variant",
        msg: format!("{e}"),
    })
}

impl RunConfig {
    /// Parses config text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults, then the file at `path` if any, then `overrides`.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        cfg.apply_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            let Some(&key) = KEYS.iter().find(|&&key| key == k) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: k.to_string(),
                });
            };
            if seen.contains(&key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: k.to_string(),
                });
            }
            seen.push(key);
            self.set(key, v)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "m" => self.m = parse_num("m", v)?,
            "dt" => self.dt = parse_num("dt", v)?,
            "horizon" => self.horizon = parse_num("horizon", v)?,
            "n_paths" => self.n_paths = parse_num("n_paths", v)?,
            "seed" => self.seed = parse_num("seed", v)?,
            "q_max" => self.q_max = parse_num("q_max", v)?,
            "r_trunc" => self.r_trunc = parse_num("r_trunc", v)?,
            "variant" => self.variant = parse_variant(v)?,
            "out_dir" => {
                if v.is_empty() {
                    return invalid("out_dir", "must not be empty");
                }
                self.out_dir = PathBuf::from(v)
            }
            _ => unreachable!("keys are checked against KEYS"),
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(n) = o.n_paths {
            self.n_paths = n;
        }
        if let Some(dt) = o.dt {
            self.dt = dt;
        }
        if let Some(v) = &o.variant {
            self.variant = parse_variant(v)?;
        }
        if let Some(q) = o.q_max {
            self.q_max = q;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=3).contains(&self.m) {
            return invalid("m", format!("must be 2 or 3, got {}", self.m));
        }
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return invalid("dt", format!("must lie in (0, 0.01], got {}", self.dt));
        }
        if !(self.horizon.is_finite() && self.horizon >= 1.0) {
            return invalid(
                "horizon",
                format!("must be finite and at least 1, got {}", self.horizon),
            );
        }
        if self.horizon / self.dt > 1e10 {
            return invalid("horizon", "more than 1e10 steps per path");
        }
        if self.n_paths < 100 {
            return invalid("n_paths", format!("must be at least 100, got {}", self.n_paths));
        }
        if !(1..=20).contains(&self.q_max) {
            return invalid("q_max", format!("must lie in 1..=20, got {}", self.q_max));
        }
        if !(self.r_trunc > 0.5 && self.r_trunc < 1.0) {
            return invalid("r_trunc", format!("must lie in (0.5, 1), got {}", self.r_trunc));
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m={}", self.m)?;
        writeln!(f, "dt={}", self.dt)?;
        writeln!(f, "horizon={}", self.horizon)?;
        writeln!(f, "n_paths={}", self.n_paths)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "q_max={}", self.q_max)?;
        writeln!(f, "r_trunc={}", self.r_trunc)?;
        writeln!(f, "variant={}", self.variant)?;
        writeln!(f, "out_dir={}", self.out_dir.display())
    }
}
