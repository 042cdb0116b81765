//! Run configuration: built-in defaults, overridden by a `key=value` file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cohort_sna::community::DEFAULT_K_MAX;
use cohort_sna::intervention::InterventionPolicy;
use cohort_sna::network::SymmetrizeRule;
use cohort_sna::stats::{Thresholds, DEFAULT_BIN_WIDTH, DEFAULT_HIGH_THRESHOLD, DEFAULT_LOW_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub high_t: f64,
    pub low_t: f64,
    pub k_max: usize,
    pub bin_width: f64,
    pub min_group: usize,
    pub max_group: usize,
    pub keep_low_subgroups: bool,
    pub rule: SymmetrizeRule,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            high_t: DEFAULT_HIGH_THRESHOLD,
            low_t: DEFAULT_LOW_THRESHOLD,
            k_max: DEFAULT_K_MAX,
            bin_width: DEFAULT_BIN_WIDTH,
            min_group: 1,
            max_group: usize::MAX,
            keep_low_subgroups: true,
            rule: SymmetrizeRule::Union,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub high_t: Option<f64>,
    pub low_t: Option<f64>,
    pub k_max: Option<usize>,
    pub bin_width: Option<f64>,
    pub min_group: Option<usize>,
    pub max_group: Option<usize>,
    pub keep_low_subgroups: Option<bool>,
    pub rule: Option<SymmetrizeRule>,
    pub out_dir: Option<PathBuf>,
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {lineno}: expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || format!("line {lineno}: invalid value `{value}` for `{key}`");
            match key {
                "high_t" => self.high_t = value.parse().with_context(bad)?,
                "low_t" => self.low_t = value.parse().with_context(bad)?,
                "k_max" => self.k_max = value.parse().with_context(bad)?,
                "bin_width" => self.bin_width = value.parse().with_context(bad)?,
                "min_group" => self.min_group = value.parse().with_context(bad)?,
                "max_group" => self.max_group = value.parse().with_context(bad)?,
                "keep_low_subgroups" => {
                    self.keep_low_subgroups = parse_bool(value).with_context(bad)?
                }
                "rule" => {
                    self.rule = value
                        .parse()
                        .map_err(anyhow::Error::msg)
                        .with_context(bad)?
                }
                "out_dir" => self.out_dir = PathBuf::from(value),
                other => bail!("line {lineno}: unknown key `{other}`"),
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        self.apply_file_text(&text)
            .with_context(|| format!("config file {}", path.display()))
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        take!(high_t, low_t, k_max, bin_width, min_group, max_group, keep_low_subgroups, rule, out_dir);
    }

    pub fn resolve(config_file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = config_file {
            cfg.apply_file(path)?;
        }
        cfg.apply_overrides(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.low_t < self.high_t) {
            bail!("low threshold ({}) must be below high threshold ({})", self.low_t, self.high_t);
        }
        if self.k_max < 2 {
            bail!("k_max must be at least 2, got {}", self.k_max);
        }
        if !(self.bin_width >= 1.0) {
            bail!("bin width must be at least 1, got {}", self.bin_width);
        }
        if self.min_group < 1 || self.min_group > self.max_group {
            bail!(
                "group size bounds must satisfy 1 <= min ({}) <= max ({})",
                self.min_group,
                self.max_group
            );
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            high: self.high_t,
            low: self.low_t,
        }
    }

    pub fn policy(&self) -> InterventionPolicy {
        InterventionPolicy {
            thresholds: self.thresholds(),
            min_group: self.min_group,
            max_group: self.max_group,
            keep_low_subgroups: self.keep_low_subgroups,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut cfg = RunConfig::default();
        cfg.apply_file_text("# thresholds\nhigh_t = 75\nk_max=12\nkeep_low_subgroups=no\n")
            .unwrap();
        assert_eq!((cfg.high_t, cfg.k_max, cfg.keep_low_subgroups), (75.0, 12, false));
        cfg.apply_overrides(&Overrides {
            k_max: Some(9),
            ..Default::default()
        });
        assert_eq!((cfg.high_t, cfg.k_max), (75.0, 9));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_file_text("colour=blue").is_err());
        assert!(cfg.apply_file_text("k_max=lots").is_err());
        cfg.k_max = 1;
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            low_t: 80.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
