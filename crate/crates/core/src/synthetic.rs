//! Synthetic two-cell fitness landscape built from motif oracles.
//!
//! The target cell rewards its own motifs plus a shared motif; the off-target
//! cell rewards its own motif and the same shared motif. Pushing the target
//! through the shared motif therefore raises off-target fitness, which is
//! what makes the off-target threshold bind.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::motif::{MotifSet, PositionProbabilityMatrix, ScoringParams};
use crate::policy::OptimizerKind;
use crate::reward::{MotifOracle, Oracle, RewardError, RewardSpec};
use crate::trainer::{TrainerConfig, Variant};

/// Motif weights and biases of the two cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeParams {
    /// Consensus strings of the target-only motifs.
    pub target_motifs: Vec<String>,
    /// Consensus strings of the off-target-only motifs.
    pub off_motifs: Vec<String>,
    /// Consensus of the motif rewarded in both cells.
    pub shared_motif: Option<String>,
    /// Probability mass on the consensus base of every column.
    pub consensus_prob: f64,
    pub target_weight: f64,
    pub target_shared_weight: f64,
    pub target_bias: f64,
    pub off_weight: f64,
    pub off_shared_weight: f64,
    pub off_bias: f64,
    pub threshold: f64,
    pub delta: f64,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        LandscapeParams {
            target_motifs: vec!["GATAAG".into(), "CCAATC".into()],
            off_motifs: vec!["AGGTCA".into()],
            shared_motif: Some("TGACGT".into()),
            consensus_prob: 0.91,
            target_weight: 1.5,
            target_shared_weight: 2.0,
            target_bias: -2.0,
            off_weight: 1.0,
            off_shared_weight: 2.0,
            off_bias: -1.5,
            threshold: 5e-3,
            delta: 0.5,
        }
    }
}

impl LandscapeParams {
    /// Same cells without the shared motif: no motif contributes to both.
    pub fn disjoint() -> Self {
        LandscapeParams {
            shared_motif: None,
            ..Default::default()
        }
    }
}

/// Trainer settings for the synthetic benchmark (B = 64, L = 50, k = 4,
/// 100 epochs, Adam).
pub fn benchmark_trainer_config(variant: Variant, seed: u64) -> TrainerConfig {
    TrainerConfig {
        batch_size: 64,
        length: 50,
        order: 4,
        epochs: 100,
        eta_theta: 0.05,
        lambda_init: 0.4,
        optimizer: OptimizerKind::Adam,
        variant,
        seed,
        ..Default::default()
    }
}

/// A built landscape: motifs plus the target and off-target oracles.
#[derive(Debug, Clone)]
pub struct Landscape {
    pub params: LandscapeParams,
    pub ppms: Vec<PositionProbabilityMatrix>,
    pub motifs: Arc<MotifSet>,
    pub target: MotifOracle,
    pub off_target: MotifOracle,
}

fn consensus_ppm(name: &str, consensus: &str, p: f64) -> Result<PositionProbabilityMatrix, RewardError> {
    let rest = (1.0 - p) / 3.0;
    let cols: Vec<[f64; 4]> = consensus
        .chars()
        .map(|c| {
            let i = "ACGT"
                .find(c)
                .ok_or_else(|| RewardError::InvalidKmer(consensus.to_string()))?;
            let mut col = [rest; 4];
            col[i] = p;
            Ok(col)
        })
        .collect::<Result<_, RewardError>>()?;
    Ok(PositionProbabilityMatrix::from_counts(name, &cols)?)
}

impl Landscape {
    pub fn build(params: LandscapeParams) -> Result<Self, RewardError> {
        let mut ppms = Vec::new();
        let mut target_w = BTreeMap::new();
        let mut off_w = BTreeMap::new();
        for (i, c) in params.target_motifs.iter().enumerate() {
            let name = format!("target_{i}");
            ppms.push(consensus_ppm(&name, c, params.consensus_prob)?);
            target_w.insert(name, params.target_weight);
        }
        for (i, c) in params.off_motifs.iter().enumerate() {
            let name = format!("off_{i}");
            ppms.push(consensus_ppm(&name, c, params.consensus_prob)?);
            off_w.insert(name, params.off_weight);
        }
        if let Some(c) = &params.shared_motif {
            ppms.push(consensus_ppm("shared", c, params.consensus_prob)?);
            target_w.insert("shared".into(), params.target_shared_weight);
            off_w.insert("shared".into(), params.off_shared_weight);
        }
        let motifs = Arc::new(MotifSet::from_ppms(&ppms, &ScoringParams::default())?);
        let target = MotifOracle::new("target", &target_w, params.target_bias, params.threshold, motifs.clone())?;
        let off_target = MotifOracle::new("off_target", &off_w, params.off_bias, params.threshold, motifs.clone())?;
        Ok(Landscape {
            params,
            ppms,
            motifs,
            target,
            off_target,
        })
    }

    /// Target plus one off-target constraint at the landscape's threshold.
    pub fn reward_spec(&self) -> RewardSpec {
        RewardSpec::new(
            vec![Oracle::Motif(self.target.clone()), Oracle::Motif(self.off_target.clone())],
            vec![self.params.delta],
            None,
        )
        .expect("two oracles and one threshold")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_motif_raises_both_cells() {
        let l = Landscape::build(LandscapeParams::default()).unwrap();
        let plain: crate::seq::Sequence = "T".repeat(30).parse().unwrap();
        let with_shared: crate::seq::Sequence = format!("{}TGACGT{}", "T".repeat(12), "T".repeat(12)).parse().unwrap();
        assert!(l.target.eval(&with_shared) > l.target.eval(&plain));
        assert!(l.off_target.eval(&with_shared) > l.params.delta);
        assert!(l.off_target.eval(&plain) < l.params.delta);
        let spec = l.reward_spec();
        assert_eq!(spec.m(), 1);
    }
}
