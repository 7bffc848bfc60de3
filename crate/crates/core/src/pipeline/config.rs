use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterParams;
use crate::corpus::{CorpusFormat, Indicator};
use crate::error::{Error, Result};
use crate::patterns::PatternConfig;
use crate::stats::{Adjustment, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
use crate::synergy::{
    default_baselines, BaselinePredicate, SweepParams, DEFAULT_K_MAX, DEFAULT_MIN_N, DEFAULT_TOP,
};
use crate::tiers::MinNScaling;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub path: Option<PathBuf>,
    /// Guessed from the extension when absent.
    pub format: Option<CorpusFormat>,
    pub lenient: bool,
}

impl InputConfig {
    pub fn resolved_format(&self) -> Option<CorpusFormat> {
        self.format
            .or_else(|| self.path.as_deref().map(CorpusFormat::from_path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TierConfig {
    pub enabled: bool,
    pub min_n_scaling: MinNScaling,
    pub adjustment: Adjustment,
}

impl Default for TierConfig {
    fn default() -> Self {
        TierConfig {
            enabled: true,
            min_n_scaling: MinNScaling::Fixed,
            adjustment: Adjustment::Holm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Combinations per best/worst cell.
    pub top: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { top: DEFAULT_TOP }
    }
}

/// Everything a full run depends on. Stage seeds are all taken from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub input: InputConfig,
    pub cluster: ClusterParams,
    /// Extra seeded refits for the stability report; 0 disables it.
    pub cluster_repeats: usize,
    pub patterns: PatternConfig,
    pub baselines: Vec<BaselinePredicate>,
    pub indicators: Vec<Indicator>,
    pub sweep: SweepParams,
    pub tiers: TierConfig,
    pub report: ReportConfig,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            input: InputConfig::default(),
            cluster: ClusterParams::default(),
            cluster_repeats: 0,
            patterns: PatternConfig::default(),
            baselines: default_baselines(),
            indicators: Indicator::ALL.to_vec(),
            sweep: SweepParams::default(),
            tiers: TierConfig::default(),
            report: ReportConfig::default(),
            output: None,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text)
    }

    /// Config echo as written to the manifest (output directory and worker
    /// count are left out: they never change results).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Resamples 500, level 0.95, min_n 300, k_max 4.
    pub fn apply_paper_defaults(&mut self) {
        self.sweep.resamples = DEFAULT_RESAMPLES;
        self.sweep.level = DEFAULT_LEVEL;
        self.sweep.min_n = DEFAULT_MIN_N;
        self.sweep.k_max = DEFAULT_K_MAX;
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("seed: a master seed is required".into()))
    }

    /// Copy of the config with every stage seed set from the master seed.
    pub fn seeded(&self) -> Result<RunConfig> {
        let seed = self.require_seed()?;
        let mut c = self.clone();
        c.cluster.seed = seed;
        c.sweep.seed = seed;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.require_seed()?;
        let path = self
            .input
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("input.path: no input corpus given".into()))?;
        if !path.is_file() {
            return Err(Error::Config(format!(
                "input.path: {} does not exist or is not a file",
                path.display()
            )));
        }
        if self.output.is_none() {
            return Err(Error::Config("output: no output directory given".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers: must be at least 1".into()));
        }
        if self.indicators.is_empty() {
            return Err(Error::Config(
                "indicators: at least one indicator is required".into(),
            ));
        }
        if self.baselines.is_empty() {
            return Err(Error::Config(
                "baselines: at least one baseline is required".into(),
            ));
        }
        let mut names: Vec<&str> = self.baselines.iter().map(|b| b.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("baselines: names must be unique".into()));
        }
        self.cluster
            .validate()
            .map_err(|e| Error::Config(format!("cluster: {e}")))?;
        self.patterns
            .validate()
            .map_err(|e| Error::Config(format!("patterns: {e}")))?;
        self.sweep
            .validate()
            .map_err(|e| Error::Config(format!("sweep: {e}")))?;
        for b in &self.baselines {
            b.validate()
                .map_err(|e| Error::Config(format!("baselines.{}: {e}", b.name)))?;
        }
        if self.report.top == 0 {
            return Err(Error::Config("report.top: must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_without_runtime_fields() {
        let mut c = RunConfig {
            seed: Some(7),
            output: Some("out".into()),
            workers: Some(3),
            ..RunConfig::default()
        };
        c.input.path = Some("x.jsonl".into());
        let text = c.to_toml().unwrap();
        assert!(!text.contains("workers") && !text.contains("output"));
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back.seed, Some(7));
        assert_eq!(back.baselines, c.baselines);
        assert_eq!(back.sweep, c.sweep);
        assert_eq!(back.patterns, c.patterns);
        assert_eq!(back.workers, None);
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let c = RunConfig::from_toml("seed = 3\n[sweep]\nk_max = 2\n[input]\npath = \"a.csv\"\n")
            .unwrap();
        assert_eq!(c.sweep.k_max, 2);
        assert_eq!(c.sweep.min_n, DEFAULT_MIN_N);
        assert_eq!(c.input.resolved_format(), Some(CorpusFormat::Csv));
        assert_eq!(c.baselines.len(), 4);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        assert!(c.validate().unwrap_err().to_string().contains("seed"));
        c.seed = Some(1);
        assert!(c.validate().unwrap_err().to_string().contains("input.path"));
        c.input.path = Some(dir.path().join("missing.jsonl"));
        assert!(c.validate().unwrap_err().to_string().contains("input.path"));
        let file = dir.path().join("c.jsonl");
        std::fs::write(&file, "").unwrap();
        c.input.path = Some(file);
        assert!(c.validate().unwrap_err().to_string().contains("output"));
        c.output = Some(dir.path().join("out"));
        c.validate().unwrap();
        c.sweep.k_max = 0;
        assert!(c.validate().unwrap_err().to_string().contains("sweep"));
    }

    #[test]
    fn paper_defaults_and_seeding() {
        let mut c = RunConfig {
            seed: Some(99),
            ..RunConfig::default()
        };
        c.sweep.k_max = 1;
        c.sweep.resamples = 10;
        c.apply_paper_defaults();
        assert_eq!(
            (c.sweep.k_max, c.sweep.resamples, c.sweep.min_n),
            (4, 500, 300)
        );
        let s = c.seeded().unwrap();
        assert_eq!((s.cluster.seed, s.sweep.seed), (99, 99));
    }
}
