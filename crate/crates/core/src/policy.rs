//! Order-k autoregressive categorical policy over nucleotides.
//!
//! The next-base distribution depends on the previous `k` bases (left-padded
//! with a BOS symbol), parameterized by a logit table with one row of four
//! logits per context. Log-probabilities, sampling and the gradient of the
//! clipped surrogate objective are all exact, which is what lets the
//! gradient be checked against finite differences.
//!
//! Contexts are numbered big-endian in base 5 (oldest symbol most
//! significant), with BOS as digit 4. The all-BOS context is `5^k - 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seq::{Nucleotide, Sequence};

/// Digit used for left padding in context ids.
pub const BOS: u8 = 4;
/// Largest order accepted by [`Policy::uniform`].
pub const MAX_ORDER: usize = 8;
/// Default cap on the logit table size (k = 8 fits, k = 9 does not).
pub const DEFAULT_PARAM_BUDGET: usize = 2_000_000;
/// Floor applied to log-probabilities of unseen transitions in MLE fits.
pub const MLE_LOGIT_FLOOR: f64 = -30.0;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("order {order} needs {params} parameters, above the budget of {budget}")]
    OrderTooLarge { order: usize, params: usize, budget: usize },
    #[error("reference corpus is empty")]
    EmptyCorpus,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("gradient contains non-finite values")]
    NonFiniteGradient,
    #[error("pseudocount must be non-negative and finite, got {0}")]
    InvalidPseudocount(f64),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
}

/// Adaptive-moment optimizer state (first/second moments and step count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// `theta += eta * g`.
    #[default]
    Plain,
    /// Bias-corrected adaptive moments, same ascent sign.
    Adam,
}

/// Gradient with the same layout as a policy's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGradient {
    pub logits: Vec<f64>,
    pub offsets: Option<Vec<[f64; 4]>>,
}

impl PolicyGradient {
    pub fn zeros_like(policy: &Policy) -> Self {
        PolicyGradient {
            logits: vec![0.0; policy.logits.len()],
            offsets: policy.offsets.as_ref().map(|o| vec![[0.0; 4]; o.len()]),
        }
    }

    pub fn add_assign(&mut self, other: &PolicyGradient) {
        for (a, b) in self.logits.iter_mut().zip(&other.logits) {
            *a += b;
        }
        if let (Some(a), Some(b)) = (self.offsets.as_mut(), other.offsets.as_ref()) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for i in 0..4 {
                    ra[i] += rb[i];
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.logits.iter().all(|g| g.is_finite())
            && self
                .offsets
                .as_ref()
                .is_none_or(|o| o.iter().flatten().all(|g| g.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        let a = self.logits.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let b = self
            .offsets
            .as_ref()
            .map(|o| o.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs())))
            .unwrap_or(0.0);
        a.max(b)
    }
}

/// The order-k logit-table policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    order: usize,
    n_contexts: usize,
    logits: Vec<f64>,
    offsets: Option<Vec<[f64; 4]>>,
    adam: Option<AdamState>,
}

fn context_count(order: usize) -> usize {
    5usize.pow(order as u32)
}

#[inline]
fn log_softmax(row: &[f64; 4]) -> [f64; 4] {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    row.map(|x| x - lse)
}

impl Policy {
    /// All-zero logits (every conditional uniform) under the default budget.
    pub fn uniform(order: usize) -> Result<Self, PolicyError> {
        Self::uniform_with_budget(order, DEFAULT_PARAM_BUDGET)
    }

    pub fn uniform_with_budget(order: usize, budget: usize) -> Result<Self, PolicyError> {
        let params = 5usize
            .checked_pow(order as u32)
            .and_then(|c| c.checked_mul(4))
            .unwrap_or(usize::MAX);
        if order > MAX_ORDER || params > budget {
            return Err(PolicyError::OrderTooLarge { order, params, budget });
        }
        let n_contexts = context_count(order);
        Ok(Policy {
            order,
            n_contexts,
            logits: vec![0.0; 4 * n_contexts],
            offsets: None,
            adam: None,
        })
    }

    /// Add-pseudocount conditional frequencies of the next base given its
    /// context, as log-probabilities. Zero-probability transitions are floored
    /// at [`MLE_LOGIT_FLOOR`]; unseen contexts stay uniform.
    pub fn fit_reference_mle(corpus: &[Sequence], order: usize, pseudocount: f64) -> Result<Self, PolicyError> {
        if corpus.is_empty() {
            return Err(PolicyError::EmptyCorpus);
        }
        if !(pseudocount >= 0.0 && pseudocount.is_finite()) {
            return Err(PolicyError::InvalidPseudocount(pseudocount));
        }
        let mut policy = Self::uniform(order)?;
        let mut counts = vec![0.0f64; policy.logits.len()];
        for s in corpus {
            for (ctx, base) in policy.contexts(s).into_iter().zip(s.codes()) {
                counts[ctx as usize * 4 + base as usize] += 1.0;
            }
        }
        for (row_counts, row_logits) in counts.chunks(4).zip(policy.logits.chunks_mut(4)) {
            let total: f64 = row_counts.iter().sum::<f64>() + 4.0 * pseudocount;
            if total == 0.0 {
                continue;
            }
            for (c, l) in row_counts.iter().zip(row_logits.iter_mut()) {
                let p = (c + pseudocount) / total;
                *l = if p > 0.0 { p.ln().max(MLE_LOGIT_FLOOR) } else { MLE_LOGIT_FLOOR };
            }
        }
        Ok(policy)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_contexts(&self) -> usize {
        self.n_contexts
    }

    pub fn n_params(&self) -> usize {
        self.logits.len() + self.offsets.as_ref().map_or(0, |o| 4 * o.len())
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn logits_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    pub fn offsets(&self) -> Option<&[[f64; 4]]> {
        self.offsets.as_deref()
    }

    pub fn offsets_mut(&mut self) -> Option<&mut [[f64; 4]]> {
        self.offsets.as_deref_mut()
    }

    /// Turns on per-position logit offsets for sequences of length `length`.
    pub fn enable_position_offsets(&mut self, length: usize) {
        self.offsets = Some(vec![[0.0; 4]; length]);
        if let Some(adam) = &mut self.adam {
            adam.m.resize(self.logits.len() + 4 * length, 0.0);
            adam.v.resize(self.logits.len() + 4 * length, 0.0);
        }
    }

    /// Switches the update rule used by [`Policy::apply_update`].
    pub fn set_optimizer(&mut self, kind: OptimizerKind) {
        self.adam = match kind {
            OptimizerKind::Plain => None,
            OptimizerKind::Adam => Some(AdamState::new(self.n_params())),
        };
    }

    pub fn optimizer(&self) -> OptimizerKind {
        if self.adam.is_some() {
            OptimizerKind::Adam
        } else {
            OptimizerKind::Plain
        }
    }

    pub fn adam_state(&self) -> Option<&AdamState> {
        self.adam.as_ref()
    }

    /// Id of the context after `ctx` is extended by `base`.
    #[inline]
    pub fn next_context(&self, ctx: usize, base: u8) -> usize {
        if self.order == 0 {
            0
        } else {
            (ctx * 5 + base as usize) % self.n_contexts
        }
    }

    /// Context at position 0 (all BOS).
    #[inline]
    pub fn start_context(&self) -> usize {
        self.n_contexts - 1
    }

    /// Context id for every position of `x`.
    pub fn contexts(&self, x: &Sequence) -> Vec<u32> {
        let mut ctx = self.start_context();
        x.codes()
            .map(|b| {
                let c = ctx as u32;
                ctx = self.next_context(ctx, b);
                c
            })
            .collect()
    }

    #[inline]
    fn row(&self, ctx: usize, t: usize) -> [f64; 4] {
        let base = &self.logits[ctx * 4..ctx * 4 + 4];
        let mut row = [base[0], base[1], base[2], base[3]];
        if let Some(off) = &self.offsets {
            let o = off.get(t).copied().unwrap_or([0.0; 4]);
            for i in 0..4 {
                row[i] += o[i];
            }
        }
        row
    }

    /// Conditional distribution for context `ctx` at position `t`.
    pub fn probs(&self, ctx: usize, t: usize) -> [f64; 4] {
        log_softmax(&self.row(ctx, t)).map(f64::exp)
    }

    pub fn log_probs_row(&self, ctx: usize, t: usize) -> [f64; 4] {
        log_softmax(&self.row(ctx, t))
    }

    /// Per-step `log pi(x_t | ctx_t)`.
    pub fn log_prob(&self, x: &Sequence) -> Vec<f64> {
        let mut ctx = self.start_context();
        x.codes()
            .enumerate()
            .map(|(t, b)| {
                let lp = self.log_probs_row(ctx, t)[b as usize];
                ctx = self.next_context(ctx, b);
                lp
            })
            .collect()
    }

    /// Ancestral sampling of `batch_size` sequences of length `length`.
    pub fn sample_batch<R: Rng + ?Sized>(&self, batch_size: usize, length: usize, rng: &mut R) -> SampledBatch {
        let mut sequences = Vec::with_capacity(batch_size);
        let mut logprob_old = Vec::with_capacity(batch_size);
        let mut contexts = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let mut codes = Vec::with_capacity(length);
            let mut lps = Vec::with_capacity(length);
            let mut ctxs = Vec::with_capacity(length);
            let mut ctx = self.start_context();
            for t in 0..length {
                let lp = self.log_probs_row(ctx, t);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = 3u8;
                for (b, l) in lp.iter().enumerate() {
                    acc += l.exp();
                    if u < acc {
                        pick = b as u8;
                        break;
                    }
                }
                codes.push(pick);
                lps.push(lp[pick as usize]);
                ctxs.push(ctx as u32);
                ctx = self.next_context(ctx, pick);
            }
            sequences.push(Sequence::from_codes(&codes));
            logprob_old.push(lps);
            contexts.push(ctxs);
        }
        SampledBatch {
            sequences,
            logprob_old,
            contexts,
        }
    }

    /// Ascent step `theta += eta * g` (or the adaptive-moment equivalent).
    pub fn apply_update(&mut self, gradient: &PolicyGradient, eta: f64) -> Result<(), PolicyError> {
        if gradient.logits.len() != self.logits.len()
            || gradient.offsets.as_ref().map(Vec::len) != self.offsets.as_ref().map(Vec::len)
        {
            return Err(PolicyError::ShapeMismatch("gradient does not match policy".into()));
        }
        if !gradient.is_finite() {
            return Err(PolicyError::NonFiniteGradient);
        }
        let n_logits = self.logits.len();
        match &mut self.adam {
            None => {
                for (p, g) in self.logits.iter_mut().zip(&gradient.logits) {
                    *p += eta * g;
                }
                if let (Some(o), Some(g)) = (self.offsets.as_mut(), gradient.offsets.as_ref()) {
                    for (ro, rg) in o.iter_mut().zip(g) {
                        for i in 0..4 {
                            ro[i] += eta * rg[i];
                        }
                    }
                }
            }
            Some(adam) => {
                adam.step += 1;
                let bc1 = 1.0 - adam.beta1.powi(adam.step as i32);
                let bc2 = 1.0 - adam.beta2.powi(adam.step as i32);
                let mut step = |idx: usize, p: &mut f64, g: f64| {
                    adam.m[idx] = adam.beta1 * adam.m[idx] + (1.0 - adam.beta1) * g;
                    adam.v[idx] = adam.beta2 * adam.v[idx] + (1.0 - adam.beta2) * g * g;
                    let mhat = adam.m[idx] / bc1;
                    let vhat = adam.v[idx] / bc2;
                    *p += eta * mhat / (vhat.sqrt() + adam.eps);
                };
                for (i, (p, g)) in self.logits.iter_mut().zip(&gradient.logits).enumerate() {
                    step(i, p, *g);
                }
                if let (Some(o), Some(g)) = (self.offsets.as_mut(), gradient.offsets.as_ref()) {
                    for (t, (ro, rg)) in o.iter_mut().zip(g).enumerate() {
                        for i in 0..4 {
                            step(n_logits + 4 * t + i, &mut ro[i], rg[i]);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with the same parameters but no optimizer state.
    pub fn frozen_copy(&self) -> Policy {
        Policy {
            adam: None,
            ..self.clone()
        }
    }

    fn same_shape(&self, other: &Policy) -> bool {
        self.order == other.order
            && self.offsets.as_ref().map(Vec::len) == other.offsets.as_ref().map(Vec::len)
    }

    /// Accumulates `scale * coef * d log pi(x_t|ctx_t)` into `grad`.
    #[inline]
    fn accumulate_score(&self, grad: &mut PolicyGradient, ctx: usize, t: usize, base: u8, coef: f64) {
        let p = self.probs(ctx, t);
        let row = &mut grad.logits[ctx * 4..ctx * 4 + 4];
        for a in 0..4 {
            let ind = if a == base as usize { 1.0 } else { 0.0 };
            row[a] += coef * (ind - p[a]);
        }
        if let Some(off) = grad.offsets.as_mut() {
            if let Some(r) = off.get_mut(t) {
                for a in 0..4 {
                    let ind = if a == base as usize { 1.0 } else { 0.0 };
                    r[a] += coef * (ind - p[a]);
                }
            }
        }
    }
}

/// Per-step KL estimator `r - ln r - 1` with `r = pi_ref / pi_theta`.
pub fn kl_term(policy: &Policy, reference: &Policy, x: &Sequence) -> Result<Vec<f64>, PolicyError> {
    if !policy.same_shape(reference) {
        return Err(PolicyError::ShapeMismatch("reference policy has a different shape".into()));
    }
    let lp = policy.log_prob(x);
    let lr = reference.log_prob(x);
    Ok(lp.iter().zip(&lr).map(|(p, r)| kl_estimator(r - p)).collect())
}

/// `e^d - d - 1` for `d = ln r`, evaluated without cancellation.
#[inline]
pub fn kl_estimator(log_ratio: f64) -> f64 {
    (log_ratio.exp_m1() - log_ratio).max(0.0)
}

/// Trajectories with their behavior log-probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledBatch {
    pub sequences: Vec<Sequence>,
    /// `log pi_old(x_t | ctx_t)` per sequence and step.
    pub logprob_old: Vec<Vec<f64>>,
    pub contexts: Vec<Vec<u32>>,
}

impl SampledBatch {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Builds a batch from sequences, recording `behavior`'s log-probs.
    pub fn from_sequences(behavior: &Policy, sequences: Vec<Sequence>) -> Self {
        let logprob_old = sequences.iter().map(|s| behavior.log_prob(s)).collect();
        let contexts = sequences.iter().map(|s| behavior.contexts(s)).collect();
        SampledBatch {
            sequences,
            logprob_old,
            contexts,
        }
    }

    pub fn push(&mut self, sequence: Sequence, logprob_old: Vec<f64>, contexts: Vec<u32>) {
        self.sequences.push(sequence);
        self.logprob_old.push(logprob_old);
        self.contexts.push(contexts);
    }
}

fn check_batch(policy: &Policy, batch: &SampledBatch, weights: &[f64]) -> Result<(), PolicyError> {
    if weights.len() != batch.len() {
        return Err(PolicyError::ShapeMismatch(format!(
            "{} advantages for {} sequences",
            weights.len(),
            batch.len()
        )));
    }
    if batch.logprob_old.len() != batch.len() {
        return Err(PolicyError::ShapeMismatch("missing behavior log-probs".into()));
    }
    for (s, lp) in batch.sequences.iter().zip(&batch.logprob_old) {
        if s.len() != lp.len() {
            return Err(PolicyError::ShapeMismatch("behavior log-probs do not cover every step".into()));
        }
        if let Some(off) = &policy.offsets {
            if off.len() != s.len() {
                return Err(PolicyError::ShapeMismatch("sequence length differs from position offsets".into()));
            }
        }
    }
    if batch.is_empty() {
        return Err(PolicyError::ShapeMismatch("empty batch".into()));
    }
    Ok(())
}

/// Value of the clipped surrogate with KL penalty:
/// `(1/B) sum_j sum_t [min(rho A_j, clip(rho) A_j) - beta * kl_jt]`.
pub fn surrogate_objective(
    policy: &Policy,
    batch: &SampledBatch,
    advantages: &[f64],
    reference: &Policy,
    epsilon: f64,
    beta: f64,
) -> Result<f64, PolicyError> {
    check_batch(policy, batch, advantages)?;
    if !policy.same_shape(reference) {
        return Err(PolicyError::ShapeMismatch("reference policy has a different shape".into()));
    }
    let mut total = 0.0;
    for ((x, old), &adv) in batch.sequences.iter().zip(&batch.logprob_old).zip(advantages) {
        let lp = policy.log_prob(x);
        let lr = reference.log_prob(x);
        for t in 0..x.len() {
            let rho = (lp[t] - old[t]).exp();
            let clipped = rho.clamp(1.0 - epsilon, 1.0 + epsilon);
            total += (rho * adv).min(clipped * adv) - beta * kl_estimator(lr[t] - lp[t]);
        }
    }
    Ok(total / batch.len() as f64)
}

/// Analytic gradient (for ascent) of [`surrogate_objective`].
///
/// Per step, `d/d logit[ctx][a] = c_t * (1[a = x_t] - pi(a|ctx))` with
/// `c_t = rho * A` while the unclipped branch is the active minimum (0
/// otherwise) plus `beta * (r - 1)` from the KL estimator.
pub fn surrogate_gradient(
    policy: &Policy,
    batch: &SampledBatch,
    advantages: &[f64],
    reference: &Policy,
    epsilon: f64,
    beta: f64,
) -> Result<PolicyGradient, PolicyError> {
    check_batch(policy, batch, advantages)?;
    if !policy.same_shape(reference) {
        return Err(PolicyError::ShapeMismatch("reference policy has a different shape".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PolicyError::ShapeMismatch(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grad = PolicyGradient::zeros_like(policy);
    for ((x, old), &adv) in batch.sequences.iter().zip(&batch.logprob_old).zip(advantages) {
        let mut ctx = policy.start_context();
        let mut ref_ctx = reference.start_context();
        for (t, base) in x.codes().enumerate() {
            let lp = policy.log_probs_row(ctx, t)[base as usize];
            let rho = (lp - old[t]).exp();
            let unclipped = rho * adv;
            let clipped = rho.clamp(1.0 - epsilon, 1.0 + epsilon) * adv;
            let mut coef = if unclipped <= clipped { rho * adv } else { 0.0 };
            if beta != 0.0 {
                let lr = reference.log_probs_row(ref_ctx, t)[base as usize];
                coef += beta * (lr - lp).exp_m1();
            }
            if coef != 0.0 {
                policy.accumulate_score(&mut grad, ctx, t, base, scale * coef);
            }
            ctx = policy.next_context(ctx, base);
            ref_ctx = reference.next_context(ref_ctx, base);
        }
    }
    Ok(grad)
}

/// Gradient of `(1/B) sum_j w_j sum_t rho_jt` (no clipping). At `rho = 1`
/// this is the score-function estimate `(1/B) sum_j w_j grad log pi(X_j)`.
pub fn weighted_ratio_gradient(
    policy: &Policy,
    batch: &SampledBatch,
    weights: &[f64],
) -> Result<PolicyGradient, PolicyError> {
    check_batch(policy, batch, weights)?;
    let scale = 1.0 / batch.len() as f64;
    let mut grad = PolicyGradient::zeros_like(policy);
    for ((x, old), &w) in batch.sequences.iter().zip(&batch.logprob_old).zip(weights) {
        if w == 0.0 {
            continue;
        }
        let mut ctx = policy.start_context();
        for (t, base) in x.codes().enumerate() {
            let lp = policy.log_probs_row(ctx, t)[base as usize];
            let rho = (lp - old[t]).exp();
            policy.accumulate_score(&mut grad, ctx, t, base, scale * w * rho);
            ctx = policy.next_context(ctx, base);
        }
    }
    Ok(grad)
}

/// Versioned JSON form of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyCheckpoint {
    pub version: u32,
    pub k: usize,
    /// Context-major logits, contexts in canonical id order.
    pub logits: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_offsets: Option<Vec<[f64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<AdamState>,
}

pub const POLICY_CHECKPOINT_VERSION: u32 = 1;

impl From<&Policy> for PolicyCheckpoint {
    fn from(p: &Policy) -> Self {
        PolicyCheckpoint {
            version: POLICY_CHECKPOINT_VERSION,
            k: p.order,
            logits: p.logits.clone(),
            position_offsets: p.offsets.clone(),
            optimizer: p.adam.clone(),
        }
    }
}

impl TryFrom<PolicyCheckpoint> for Policy {
    type Error = PolicyError;

    fn try_from(c: PolicyCheckpoint) -> Result<Self, Self::Error> {
        if c.version != POLICY_CHECKPOINT_VERSION {
            return Err(PolicyError::UnsupportedVersion(c.version));
        }
        let mut p = Policy::uniform(c.k)?;
        if c.logits.len() != p.logits.len() {
            return Err(PolicyError::ShapeMismatch(format!(
                "order {} expects {} logits, checkpoint has {}",
                c.k,
                p.logits.len(),
                c.logits.len()
            )));
        }
        p.logits = c.logits;
        p.offsets = c.position_offsets;
        if let Some(adam) = &c.optimizer {
            if adam.m.len() != p.n_params() || adam.v.len() != p.n_params() {
                return Err(PolicyError::ShapeMismatch("optimizer moments do not match parameters".into()));
            }
        }
        p.adam = c.optimizer;
        Ok(p)
    }
}

impl Serialize for Policy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PolicyCheckpoint::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Policy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let c = PolicyCheckpoint::deserialize(deserializer)?;
        Policy::try_from(c).map_err(serde::de::Error::custom)
    }
}

/// Symbol for a context digit (`^` for BOS), used in debugging output.
pub fn context_label(order: usize, ctx: usize) -> String {
    let mut digits = vec![0usize; order];
    let mut c = ctx;
    for d in digits.iter_mut().rev() {
        *d = c % 5;
        c /= 5;
    }
    digits
        .into_iter()
        .map(|d| match Nucleotide::from_code(d as u8) {
            Some(n) => n.to_char(),
            None => '^',
        })
        .collect()
}
