//! Run configuration: a `key = value` file plus command-line overrides.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::kernel::DEFAULT_RADIUS;
use crate::predictor::{DEFAULT_MAX_HORIZON, DEFAULT_WARMUP_OFFSET};
use crate::training::{Grids, DEFAULT_FOLDS};
use crate::trajectory_data::DEFAULT_DOWNSAMPLE;

/// Suffix of the resolved-config echo written beside every run's outputs.
pub const ECHO_SUFFIX: &str = "_config.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub database: Option<PathBuf>,
    /// Seconds between samples after downsampling.
    pub sample_period: f64,
    pub downsample: usize,
    pub horizons: Vec<usize>,
    pub warmup_offset: usize,
    pub r: f64,
    pub k: usize,
    pub grids: Grids,
    pub refinement_rounds: usize,
    /// Horizon the cross-validation loss is computed at.
    pub train_horizon: usize,
    pub target_fraction: f64,
    pub fallback_to_cv: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output: None,
            params: None,
            database: None,
            sample_period: 0.4,
            downsample: DEFAULT_DOWNSAMPLE,
            horizons: (1..=DEFAULT_MAX_HORIZON).collect(),
            warmup_offset: DEFAULT_WARMUP_OFFSET,
            r: DEFAULT_RADIUS,
            k: DEFAULT_FOLDS,
            grids: Grids::default(),
            refinement_rounds: 1,
            train_horizon: DEFAULT_MAX_HORIZON,
            target_fraction: 0.7,
            fallback_to_cv: false,
            seed: 0,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::invalid(format!("bad value '{value}' for config key '{key}'"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// `1..12` (inclusive) or a comma list.
fn parse_horizons(value: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: usize = parse("horizons", lo.trim())?;
        let hi: usize = parse("horizons", hi.trim().trim_start_matches('='))?;
        return Ok((lo..=hi).collect());
    }
    parse_list("horizons", value)
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "input" => self.input = Some(value.into()),
            "output" => self.output = Some(value.into()),
            "params" => self.params = Some(value.into()),
            "database" => self.database = Some(value.into()),
            "sample_period" => self.sample_period = parse(key, value)?,
            "downsample" => self.downsample = parse(key, value)?,
            "horizons" => self.horizons = parse_horizons(value)?,
            "warmup_offset" => self.warmup_offset = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "grid_a" => self.grids.a = parse_list(key, value)?,
            "grid_b" => self.grids.b = parse_list(key, value)?,
            "grid_c_orient" | "grid_c" => self.grids.c_orient = parse_list(key, value)?,
            "refinement_rounds" => self.refinement_rounds = parse(key, value)?,
            "train_horizon" => self.train_horizon = parse(key, value)?,
            "target_fraction" => self.target_fraction = parse(key, value)?,
            "fallback_to_cv" => self.fallback_to_cv = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::invalid(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_str(text)?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected 'key = value', got '{line}'")))?;
            self.set(k, v).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_period > 0.0 && self.sample_period.is_finite()) {
            return Err(Error::invalid("sample_period must be > 0"));
        }
        if self.downsample == 0 {
            return Err(Error::invalid("downsample must be >= 1"));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::invalid("horizons must be a non-empty list of positive steps"));
        }
        if self.train_horizon == 0 {
            return Err(Error::invalid("train_horizon must be >= 1"));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::invalid("r must be > 0"));
        }
        if self.k < 2 {
            return Err(Error::invalid("k must be >= 2"));
        }
        if !(self.target_fraction > 0.0 && self.target_fraction < 1.0) {
            return Err(Error::invalid("target_fraction must lie in (0, 1)"));
        }
        let warmup = self.warmup_offset as f64 * self.sample_period;
        if (warmup - 2.8).abs() > self.sample_period {
            warn!("warmup of {warmup:.2} s differs from 2.8 s by more than one sample");
        }
        Ok(())
    }

    /// Fully resolved configuration in the file format.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        for (k, v) in [
            ("input", path(&self.input)),
            ("output", path(&self.output)),
            ("params", path(&self.params)),
            ("database", path(&self.database)),
        ] {
            if !v.is_empty() {
                writeln!(s, "{k} = {v}").unwrap();
            }
        }
        writeln!(s, "sample_period = {}", self.sample_period).unwrap();
        writeln!(s, "downsample = {}", self.downsample).unwrap();
        writeln!(s, "horizons = {}", join(&self.horizons)).unwrap();
        writeln!(s, "warmup_offset = {}", self.warmup_offset).unwrap();
        writeln!(s, "r = {}", self.r).unwrap();
        writeln!(s, "k = {}", self.k).unwrap();
        writeln!(s, "grid_a = {}", join(&self.grids.a)).unwrap();
        writeln!(s, "grid_b = {}", join(&self.grids.b)).unwrap();
        writeln!(s, "grid_c_orient = {}", join(&self.grids.c_orient)).unwrap();
        writeln!(s, "refinement_rounds = {}", self.refinement_rounds).unwrap();
        writeln!(s, "train_horizon = {}", self.train_horizon).unwrap();
        writeln!(s, "target_fraction = {}", self.target_fraction).unwrap();
        writeln!(s, "fallback_to_cv = {}", self.fallback_to_cv).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        s
    }

    /// Writes [`echo`](Self::echo) to `<dir>/<command>_config.txt`.
    pub fn write_echo(&self, dir: &Path, command: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{command}{ECHO_SUFFIX}"));
        std::fs::write(&path, self.echo()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig {
            input: Some("in.txt".into()),
            fallback_to_cv: true,
            seed: 42,
            ..RunConfig::default()
        };
        c.grids.a = vec![0.1, 0.2];
        assert_eq!(RunConfig::parse_str(&c.echo()).unwrap(), c);
        assert_eq!(
            RunConfig::parse_str(&RunConfig::default().echo()).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn parse_and_override() {
        let mut c = RunConfig::parse_str("# test\nhorizons = 1..3\nk = 3  # folds\n").unwrap();
        assert_eq!(c.horizons, vec![1, 2, 3]);
        assert_eq!(c.k, 3);
        c.set("k", "4").unwrap();
        assert_eq!(c.k, 4);
        assert!(matches!(
            RunConfig::parse_str("x = 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse_str("\nk = two"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(RunConfig::parse_str("no equals").is_err());
    }

    #[test]
    fn default_warmup_is_2_8_s() {
        let c = RunConfig::default();
        assert!((c.warmup_offset as f64 * c.sample_period - 2.8).abs() < 1e-9);
        assert!((*c.horizons.last().unwrap() as f64 * c.sample_period - 4.8).abs() < 1e-9);
        c.validate().unwrap();
    }
}
