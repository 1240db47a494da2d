//! Constrained batch-relative policy optimization.
//!
//! Each iteration samples a batch from the current policy, scores it, mixes
//! in replayed samples for the reward statistics, standardizes every reward
//! column, combines the columns into one advantage with the Lagrange
//! multipliers, takes clipped-surrogate ascent steps and then a projected
//! dual step on the multipliers.

mod advantage;
mod lagrange;
mod replay;

pub use advantage::{ctrl_dna_log_rewards, ipo_infeasible_penalty, ipo_penalty, normalize_advantages, SIGMA_FLOOR};
pub use lagrange::{mixed_advantage, update_multipliers, LagrangeState};
pub use replay::{ReplayBuffer, ReplayEntry};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{diversity, median};
use crate::policy::{
    surrogate_gradient, surrogate_objective, weighted_ratio_gradient, OptimizerKind, Policy, PolicyCheckpoint,
    PolicyError,
};
use crate::reward::{evaluate_rewards, RewardError, RewardSpec};
use crate::seq::Sequence;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TrainerError {
    #[error("batch statistics need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("barrier is undefined: estimate {j_hat} is not below threshold {delta}")]
    InfeasiblePoint { j_hat: f64, delta: f64 },
    #[error("non-finite state: {0}")]
    NonFiniteState(String),
    #[error("invalid trainer configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Lagrangian advantage with multiplier updates.
    #[default]
    CtrlDna,
    /// Advantage from a single log-barrier-shaped reward column.
    CtrlDnaLog,
    /// Target-only advantage plus a log barrier on the constraint estimates.
    CtrlDnaIpo,
    /// Target-only advantage.
    Unconstrained,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::CtrlDna => "ctrl_dna",
            Variant::CtrlDnaLog => "ctrl_dna_log",
            Variant::CtrlDnaIpo => "ctrl_dna_ipo",
            Variant::Unconstrained => "unconstrained",
        }
    }
}

/// Which frozen policy the KL penalty is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlTarget {
    #[default]
    Ref,
    Old,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub batch_size: usize,
    pub replay_batch: usize,
    /// Defaults to `10 * batch_size`.
    pub replay_capacity: Option<usize>,
    pub epochs: usize,
    pub eta_theta: f64,
    pub eta_lambda: f64,
    /// Per-constraint dual step sizes; `eta_lambda` for every constraint when absent.
    pub eta_lambda_per_constraint: Option<Vec<f64>>,
    /// Defaults to `eta_lambda`.
    pub eta_lambda_tfbs: Option<f64>,
    pub beta: f64,
    pub epsilon: f64,
    /// Upper bound of the TFBS multiplier.
    pub lambda_max: f64,
    pub lambda_init: f64,
    pub lambda_tfbs_init: f64,
    /// Correlation target of the TFBS term (a lower bound).
    pub delta_tfbs: f64,
    /// Policy order k.
    pub order: usize,
    /// Sequence length L.
    pub length: usize,
    pub seed: u64,
    pub variant: Variant,
    pub ipo_t: f64,
    pub log_c1: f64,
    /// Surrogate ascent steps per sampled batch.
    pub policy_updates: usize,
    pub optimizer: OptimizerKind,
    pub kl_target: KlTarget,
    /// Replayed samples also enter the surrogate (not only the statistics).
    pub replay_in_surrogate: bool,
    /// Add the constraint advantages instead of subtracting them.
    pub eq5_literal: bool,
    pub freeze_multipliers: bool,
    pub position_offsets: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            batch_size: 256,
            replay_batch: 24,
            replay_capacity: None,
            epochs: 100,
            eta_theta: 1e-4,
            eta_lambda: 3e-4,
            eta_lambda_per_constraint: None,
            eta_lambda_tfbs: None,
            beta: 0.2,
            epsilon: 0.2,
            lambda_max: 0.1,
            lambda_init: 0.0,
            lambda_tfbs_init: 0.0,
            delta_tfbs: 1.0,
            order: 4,
            length: 200,
            seed: 0,
            variant: Variant::CtrlDna,
            ipo_t: 50.0,
            log_c1: 1e-8,
            policy_updates: 1,
            optimizer: OptimizerKind::Plain,
            kl_target: KlTarget::Ref,
            replay_in_surrogate: true,
            eq5_literal: false,
            freeze_multipliers: false,
            position_offsets: false,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), TrainerError> {
        let bad = |m: String| Err(TrainerError::InvalidConfig(m));
        if self.batch_size < 2 {
            return bad(format!("batch_size must be at least 2, got {}", self.batch_size));
        }
        if self.length == 0 {
            return bad("length must be positive".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0,1), got {}", self.epsilon));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be non-negative, got {}", self.beta));
        }
        if !(self.eta_theta > 0.0 && self.eta_theta.is_finite()) {
            return bad(format!("eta_theta must be positive, got {}", self.eta_theta));
        }
        if !(self.eta_lambda >= 0.0 && self.eta_lambda.is_finite()) {
            return bad(format!("eta_lambda must be non-negative, got {}", self.eta_lambda));
        }
        if !(0.0..=1.0).contains(&self.lambda_max) {
            return bad(format!("lambda_max must lie in [0,1], got {}", self.lambda_max));
        }
        if !(0.0..=1.0).contains(&self.lambda_init) {
            return bad(format!("lambda_init must lie in [0,1], got {}", self.lambda_init));
        }
        if !(0.0..=self.lambda_max).contains(&self.lambda_tfbs_init) {
            return bad("lambda_tfbs_init must lie in [0, lambda_max]".into());
        }
        if !(self.ipo_t > 0.0) {
            return bad(format!("ipo_t must be positive, got {}", self.ipo_t));
        }
        if !(self.log_c1 > 0.0) {
            return bad(format!("log_c1 must be positive, got {}", self.log_c1));
        }
        if self.policy_updates == 0 {
            return bad("policy_updates must be at least 1".into());
        }
        if !self.delta_tfbs.is_finite() {
            return bad("delta_tfbs must be finite".into());
        }
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.replay_capacity.unwrap_or(10 * self.batch_size)
    }

    /// Fresh multipliers for `m` constraints.
    pub fn initial_lagrange(&self, m: usize) -> Result<LagrangeState, TrainerError> {
        let etas = match &self.eta_lambda_per_constraint {
            Some(v) => v.clone(),
            None => vec![self.eta_lambda; m],
        };
        LagrangeState::new(
            vec![self.lambda_init; m],
            self.lambda_tfbs_init,
            etas,
            self.eta_lambda_tfbs.unwrap_or(self.eta_lambda),
            self.lambda_max,
        )
    }
}

/// One line of the per-iteration report stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStepReport {
    pub step: u64,
    pub variant: Variant,
    /// Means over the freshly sampled batch, one per reward column.
    pub mean_reward: Vec<f64>,
    pub median_reward: Vec<f64>,
    /// `mean R_i - delta_i` over the fresh batch, one per constraint.
    pub violation: Vec<f64>,
    /// Multipliers after this iteration's dual steps.
    pub lambdas: Vec<f64>,
    pub lambda_tfbs: f64,
    pub alpha0: f64,
    pub advantage_mean: f64,
    pub advantage_std: f64,
    /// Surrogate objective at the start of the first inner update.
    pub surrogate: f64,
    pub replay_samples: usize,
    pub diversity_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipo_penalty: Option<f64>,
    #[serde(default)]
    pub ipo_infeasible: bool,
}

/// Fresh batch of one iteration, with its report.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub report: TrainStepReport,
    pub sequences: Vec<Sequence>,
    /// Reward rows of `sequences`.
    pub rewards: Vec<Vec<f64>>,
}

/// Serializable position of a ChaCha stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    /// 128-bit word position, as decimal text.
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng, TrainerError> {
        let pos: u128 = self
            .word_pos
            .parse()
            .map_err(|_| TrainerError::InvalidConfig(format!("bad rng word position {:?}", self.word_pos)))?;
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

/// RNG for replica `replica` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

pub const TRAINER_CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to continue a run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerCheckpoint {
    pub version: u32,
    pub step: u64,
    pub config: TrainerConfig,
    pub policy: PolicyCheckpoint,
    pub reference: PolicyCheckpoint,
    pub lagrange: LagrangeState,
    pub buffer: ReplayBuffer,
    pub rng: RngState,
}

/// Mutable training state: policy, multipliers, buffer, step counter, RNG.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub config: TrainerConfig,
    pub policy: Policy,
    pub reference: Policy,
    pub lag: LagrangeState,
    pub buffer: ReplayBuffer,
    pub step: u64,
    rng: ChaCha8Rng,
}

impl Trainer {
    /// Starts from `policy` (usually a copy of `reference`).
    pub fn new(
        config: TrainerConfig,
        spec: &RewardSpec,
        reference: Policy,
        mut policy: Policy,
        rng: ChaCha8Rng,
    ) -> Result<Self, TrainerError> {
        config.validate()?;
        if policy.order() != reference.order() || policy.order() != config.order {
            return Err(TrainerError::ShapeMismatch("policy order differs from configuration".into()));
        }
        if policy.optimizer() != config.optimizer {
            policy.set_optimizer(config.optimizer);
        }
        let lag = config.initial_lagrange(spec.m())?;
        let buffer = ReplayBuffer::new(config.capacity());
        Ok(Trainer {
            config,
            policy,
            reference,
            lag,
            buffer,
            step: 0,
            rng,
        })
    }

    pub fn rng_state(&self) -> RngState {
        RngState::capture(&self.rng)
    }

    pub fn checkpoint(&self) -> TrainerCheckpoint {
        TrainerCheckpoint {
            version: TRAINER_CHECKPOINT_VERSION,
            step: self.step,
            config: self.config.clone(),
            policy: PolicyCheckpoint::from(&self.policy),
            reference: PolicyCheckpoint::from(&self.reference),
            lagrange: self.lag.clone(),
            buffer: self.buffer.clone(),
            rng: self.rng_state(),
        }
    }

    pub fn from_checkpoint(c: TrainerCheckpoint) -> Result<Self, TrainerError> {
        if c.version != TRAINER_CHECKPOINT_VERSION {
            return Err(TrainerError::UnsupportedVersion(c.version));
        }
        c.config.validate()?;
        Ok(Trainer {
            policy: Policy::try_from(c.policy)?,
            reference: Policy::try_from(c.reference)?,
            lag: c.lagrange,
            buffer: c.buffer,
            step: c.step,
            rng: c.rng.restore()?,
            config: c.config,
        })
    }

    /// Runs one iteration against `spec`.
    pub fn step(&mut self, spec: &RewardSpec) -> Result<StepOutput, TrainerError> {
        let cfg = &self.config;
        let b = cfg.batch_size;
        let m = spec.m();
        if self.lag.m() != m {
            return Err(TrainerError::ShapeMismatch("multipliers do not match the reward spec".into()));
        }

        let old = self.policy.frozen_copy();
        let batch = old.sample_batch(b, cfg.length, &mut self.rng);
        let rewards = evaluate_rewards(spec, &batch.sequences)?;
        check_finite_rows(&rewards, "rewards")?;

        let replayed = self.buffer.sample(cfg.replay_batch, &mut self.rng);
        let mut merged_rewards = rewards.clone();
        merged_rewards.extend(replayed.iter().map(|e| e.rewards.clone()));
        let adv = normalize_advantages(&merged_rewards)?;

        let mut ipo_penalty_value = None;
        let mut ipo_infeasible = false;
        let mut ipo_weights: Option<Vec<f64>> = None;
        let mixed = match cfg.variant {
            Variant::CtrlDna => mixed_advantage(&adv, &self.lag, cfg.eq5_literal)?,
            Variant::Unconstrained => adv.iter().map(|r| r[0]).collect(),
            Variant::CtrlDnaLog => {
                let r_log = ctrl_dna_log_rewards(&merged_rewards, &spec.deltas, cfg.log_c1)?;
                let col: Vec<Vec<f64>> = r_log.into_iter().map(|v| vec![v]).collect();
                normalize_advantages(&col)?.into_iter().map(|r| r[0]).collect()
            }
            Variant::CtrlDnaIpo => {
                let (phi, weights, infeasible) = ipo_barrier(&merged_rewards, &spec.deltas, cfg.ipo_t);
                ipo_penalty_value = Some(phi);
                ipo_infeasible = infeasible;
                ipo_weights = weights;
                adv.iter().map(|r| r[0]).collect()
            }
        };
        if mixed.iter().any(|v| !v.is_finite()) {
            return Err(TrainerError::NonFiniteState("advantage".into()));
        }

        for (j, x) in batch.sequences.iter().enumerate() {
            self.buffer.push(ReplayEntry {
                sequence: x.clone(),
                rewards: rewards[j].clone(),
                logprob_old: batch.logprob_old[j].clone(),
            });
        }

        let (surr_batch, surr_adv, surr_w) = if cfg.replay_in_surrogate && !replayed.is_empty() {
            let mut sb = batch.clone();
            for e in &replayed {
                let ctx = self.policy.contexts(&e.sequence);
                sb.push(e.sequence.clone(), e.logprob_old.clone(), ctx);
            }
            (sb, mixed.clone(), ipo_weights.clone())
        } else {
            (
                batch.clone(),
                mixed[..b].to_vec(),
                ipo_weights.as_ref().map(|w| w[..b].to_vec()),
            )
        };

        let constrained = matches!(cfg.variant, Variant::CtrlDna) && !cfg.freeze_multipliers;
        let delta_tfbs = spec.has_tfbs().then_some(cfg.delta_tfbs);
        let mut surrogate_start = f64::NAN;
        for u in 0..cfg.policy_updates {
            let kl_ref = match cfg.kl_target {
                KlTarget::Ref => &self.reference,
                KlTarget::Old => &old,
            };
            if u == 0 {
                surrogate_start =
                    surrogate_objective(&self.policy, &surr_batch, &surr_adv, kl_ref, cfg.epsilon, cfg.beta)?;
            }
            let mut grad = surrogate_gradient(&self.policy, &surr_batch, &surr_adv, kl_ref, cfg.epsilon, cfg.beta)?;
            if let Some(w) = &surr_w {
                grad.add_assign(&weighted_ratio_gradient(&self.policy, &surr_batch, w)?);
            }
            self.policy.apply_update(&grad, cfg.eta_theta).map_err(|e| match e {
                PolicyError::NonFiniteGradient => TrainerError::NonFiniteState("policy gradient".into()),
                other => other.into(),
            })?;
            if constrained {
                self.lag = update_multipliers(&self.lag, &merged_rewards, &spec.deltas, delta_tfbs)?;
            }
        }
        if !surrogate_start.is_finite() {
            return Err(TrainerError::NonFiniteState("surrogate objective".into()));
        }

        let width = spec.width();
        let columns: Vec<Vec<f64>> = (0..width).map(|i| rewards.iter().map(|r| r[i]).collect()).collect();
        let mean_reward: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / b as f64).collect();
        let median_reward = columns
            .iter()
            .map(|c| median(c).expect("non-empty batch"))
            .collect();
        let violation = (0..m).map(|i| mean_reward[i + 1] - spec.deltas[i]).collect();
        let adv_mean = mixed.iter().sum::<f64>() / mixed.len() as f64;
        let adv_std = (mixed.iter().map(|a| (a - adv_mean).powi(2)).sum::<f64>() / mixed.len() as f64).sqrt();
        self.step += 1;
        let report = TrainStepReport {
            step: self.step,
            variant: cfg.variant,
            mean_reward,
            median_reward,
            violation,
            lambdas: self.lag.lambdas.clone(),
            lambda_tfbs: self.lag.lambda_tfbs,
            alpha0: match cfg.variant {
                Variant::CtrlDna => self.lag.alpha0(),
                _ => 1.0,
            },
            advantage_mean: adv_mean,
            advantage_std: adv_std,
            surrogate: surrogate_start,
            replay_samples: replayed.len(),
            diversity_bits: diversity(&batch.sequences).expect("non-empty batch"),
            ipo_penalty: ipo_penalty_value,
            ipo_infeasible,
        };
        Ok(StepOutput {
            report,
            sequences: batch.sequences,
            rewards,
        })
    }
}

fn check_finite_rows(rows: &[Vec<f64>], what: &str) -> Result<(), TrainerError> {
    if rows.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(TrainerError::NonFiniteState(what.into()))
    }
}

/// Total barrier `sum_i phi_i` and the score-function weights of its
/// gradient, `w_j = -sum_i (R_ij - mean R_i) / (t (delta_i - J_i))`. Any
/// infeasible constraint replaces the total by the fixed penalty and drops
/// the gradient.
fn ipo_barrier(rewards: &[Vec<f64>], deltas: &[f64], t: f64) -> (f64, Option<Vec<f64>>, bool) {
    let n = rewards.len() as f64;
    let mut total = 0.0;
    let mut weights = vec![0.0; rewards.len()];
    for (i, &delta) in deltas.iter().enumerate() {
        let j_hat = rewards.iter().map(|r| r[i + 1]).sum::<f64>() / n;
        match ipo_penalty(j_hat, delta, t) {
            Ok(phi) => {
                total += phi;
                let scale = -1.0 / (t * (delta - j_hat));
                for (w, r) in weights.iter_mut().zip(rewards) {
                    *w += scale * (r[i + 1] - j_hat);
                }
            }
            Err(_) => return (ipo_infeasible_penalty(t), None, true),
        }
    }
    (total, (!deltas.is_empty()).then_some(weights), false)
}
