//! Experiment configuration file.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every input path must exist when the file is loaded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::AppError;
use crate::motif::{FrequencyMode, ScoringParams, DEFAULT_P_THRESHOLD};
use crate::trainer::TrainerConfig;

/// Environment variable overriding `trainer.seed`.
pub const SEED_ENV: &str = "CTRLSEQ_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardOptions {
    /// Append the TFBS correlation reward (needs motifs and a reference frequency).
    pub tfbs: bool,
    pub tfbs_p_threshold: f64,
}

impl Default for RewardOptions {
    fn default() -> Self {
        RewardOptions {
            tfbs: false,
            tfbs_p_threshold: DEFAULT_P_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricOptions {
    /// Percentile for the reference selection that defines `q_real`.
    pub reference_percentile: f64,
    pub p_threshold: f64,
    pub frequency_mode: FrequencyMode,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            reference_percentile: 90.0,
            p_threshold: DEFAULT_P_THRESHOLD,
            frequency_mode: FrequencyMode::Counts,
        }
    }
}

fn default_pseudocount() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// JASPAR motif file.
    #[serde(default)]
    pub motifs: Option<PathBuf>,
    #[serde(default)]
    pub scoring: ScoringParams,
    /// FASTA corpus for the reference policy fit.
    #[serde(default)]
    pub reference_fasta: Option<PathBuf>,
    /// Pre-fitted reference policy checkpoint; takes precedence over the corpus.
    #[serde(default)]
    pub reference_policy: Option<PathBuf>,
    #[serde(default = "default_pseudocount")]
    pub reference_pseudocount: f64,
    /// Sequence-fitness TSV used for the reference frequency vector.
    #[serde(default)]
    pub fitness: Option<PathBuf>,
    /// Oracle files; the first is the target cell, the rest are constraints.
    pub oracles: Vec<PathBuf>,
    /// One threshold per constraint oracle.
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Precomputed reference frequency vector (JSON); otherwise derived from
    /// `fitness` when motifs are given.
    #[serde(default)]
    pub q_real: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub reward: RewardOptions,
    #[serde(default)]
    pub trainer: TrainerConfig,
    #[serde(default)]
    pub metrics: MetricOptions,
    /// Also write `checkpoint_step<k>.json` every this many iterations.
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
}

impl ExperimentConfig {
    /// Reads, resolves and validates a config file, then applies the
    /// seed override from the environment.
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.motifs,
            &mut self.reference_fasta,
            &mut self.reference_policy,
            &mut self.fitness,
            &mut self.q_real,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.oracles.iter_mut().for_each(fix);
        fix(&mut self.output_dir);
    }

    pub fn input_paths(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = [
            &self.motifs,
            &self.reference_fasta,
            &self.reference_policy,
            &self.fitness,
            &self.q_real,
        ]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect();
        v.extend(self.oracles.iter().map(PathBuf::as_path));
        v
    }

    pub fn validate(&self) -> Result<(), AppError> {
        for p in self.input_paths() {
            if !p.exists() {
                return Err(AppError::Config(format!("path does not exist: {}", p.display())));
            }
        }
        if self.oracles.is_empty() {
            return Err(AppError::Config("at least one oracle (the target) is required".into()));
        }
        if self.deltas.len() != self.oracles.len() - 1 {
            return Err(AppError::Config(format!(
                "{} constraint oracles but {} thresholds",
                self.oracles.len() - 1,
                self.deltas.len()
            )));
        }
        if self.reward.tfbs && self.motifs.is_none() {
            return Err(AppError::Config("the TFBS reward needs a motif file".into()));
        }
        if self.reward.tfbs && self.q_real.is_none() && self.fitness.is_none() {
            return Err(AppError::Config("the TFBS reward needs q_real or a fitness table".into()));
        }
        if !(0.0..=100.0).contains(&self.metrics.reference_percentile) {
            return Err(AppError::Config("reference_percentile must lie in [0, 100]".into()));
        }
        if self.checkpoint_every == Some(0) {
            return Err(AppError::Config("checkpoint_every must be positive".into()));
        }
        self.trainer.validate().map_err(AppError::from)
    }

    fn apply_env(&mut self) -> Result<(), AppError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.trainer.seed = v
                .trim()
                .parse()
                .map_err(|_| AppError::Config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("o.json"), "{}").unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"oracles":["o.json"],"output_dir":"out","bogus":1}"#).unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(AppError::Config(_))));
        std::fs::write(&p, r#"{"oracles":["o.json"],"output_dir":"out","trainer":{"bogus":1}}"#).unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(AppError::Config(_))));
    }

    #[test]
    fn paths_resolved_and_checked() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("o.json"), "{}").unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"oracles":["o.json"],"output_dir":"out"}"#).unwrap();
        let c = ExperimentConfig::load(&p).unwrap();
        assert_eq!(c.oracles[0], dir.path().join("o.json"));
        assert_eq!(c.output_dir, dir.path().join("out"));
        std::fs::write(&p, r#"{"oracles":["missing.json"],"output_dir":"out"}"#).unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(AppError::Config(_))));
        std::fs::write(&p, r#"{"oracles":["o.json","o.json"],"output_dir":"out"}"#).unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(AppError::Config(_))));
    }
}
