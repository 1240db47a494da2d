//! Reward oracles: per-cell fitness functions and the TFBS correlation reward.
//!
//! A [`RewardSpec`] lists one oracle per cell label (index 0 is the target)
//! and optionally a TFBS term. [`evaluate_rewards`] returns one row per
//! sequence laid out as `[R_0, R_1, .., R_m, R_TFBS?]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::motif::{hit_counts, pearson, FrequencyVector, MotifError, MotifSet};
use crate::seq::{FitnessRecord, Nucleotide, Sequence};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RewardError {
    #[error("oracle references unknown motif {0:?}")]
    UnknownMotif(String),
    #[error("k-mer regression system is singular")]
    SingularSystem,
    #[error("need at least 2 records, got {0}")]
    TooFewRecords(usize),
    #[error("k = {k} is invalid for sequences of minimum length {min_len}")]
    InvalidK { k: usize, min_len: usize },
    #[error("ridge strength must be non-negative and finite, got {0}")]
    InvalidRidge(f64),
    #[error("fitness label {0:?} is missing")]
    MissingLabel(String),
    #[error("invalid k-mer {0:?}")]
    InvalidKmer(String),
    #[error("oracle for {label:?} is invalid: {reason}")]
    InvalidOracle { label: String, reason: String },
    #[error("reward spec is invalid: {0}")]
    InvalidSpec(String),
    #[error("motif q_real has {found} entries but the motif set has {expected}")]
    FrequencyMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Motif(#[from] MotifError),
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// JSON form of an oracle file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleDef {
    Motif {
        label: String,
        /// Weight per motif name; motifs not listed get weight 0.
        weights: BTreeMap<String, f64>,
        bias: f64,
        threshold: f64,
    },
    Kmer {
        label: String,
        k: usize,
        weights: BTreeMap<String, f64>,
        intercept: f64,
        #[serde(default)]
        ridge: f64,
    },
}

impl OracleDef {
    pub fn label(&self) -> &str {
        match self {
            OracleDef::Motif { label, .. } | OracleDef::Kmer { label, .. } => label,
        }
    }
}

/// `logistic(b + sum_m w_m * hits_m(x))`.
#[derive(Debug, Clone)]
pub struct MotifOracle {
    pub label: String,
    /// Aligned with `motifs`.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    pub motifs: Arc<MotifSet>,
}

impl MotifOracle {
    pub fn new(
        label: &str,
        weights: &BTreeMap<String, f64>,
        bias: f64,
        threshold: f64,
        motifs: Arc<MotifSet>,
    ) -> Result<Self, RewardError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(MotifError::InvalidThreshold(threshold).into());
        }
        if !bias.is_finite() || weights.values().any(|w| !w.is_finite()) {
            return Err(RewardError::InvalidOracle {
                label: label.into(),
                reason: "non-finite weight or bias".into(),
            });
        }
        let mut dense = vec![0.0; motifs.len()];
        for (name, w) in weights {
            let i = motifs
                .index_of(name)
                .ok_or_else(|| RewardError::UnknownMotif(name.clone()))?;
            dense[i] = *w;
        }
        Ok(MotifOracle {
            label: label.into(),
            weights: dense,
            bias,
            threshold,
            motifs,
        })
    }

    pub fn eval(&self, x: &Sequence) -> f64 {
        let counts = hit_counts(x, &self.motifs, self.threshold);
        let z = self.bias
            + self
                .weights
                .iter()
                .zip(counts)
                .map(|(w, c)| w * c as f64)
                .sum::<f64>();
        logistic(z)
    }

    pub fn to_def(&self) -> OracleDef {
        OracleDef::Motif {
            label: self.label.clone(),
            weights: self
                .motifs
                .names()
                .into_iter()
                .zip(&self.weights)
                .filter(|(_, w)| **w != 0.0)
                .map(|(n, w)| (n, *w))
                .collect(),
            bias: self.bias,
            threshold: self.threshold,
        }
    }
}

/// Linear model on overlapping forward-strand k-mer counts, clamped to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct KmerOracle {
    pub label: String,
    pub k: usize,
    /// Dense weights indexed by the base-4 k-mer code (first base most significant).
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub ridge: f64,
}

pub fn kmer_name(k: usize, code: usize) -> String {
    (0..k)
        .rev()
        .map(|i| Nucleotide::from_code(((code >> (2 * i)) & 3) as u8).unwrap().to_char())
        .collect()
}

fn kmer_code(s: &str) -> Option<usize> {
    s.chars().try_fold(0usize, |acc, c| {
        Nucleotide::from_char(c).map(|n| acc * 4 + n.code() as usize)
    })
}

/// Overlapping k-mer counts, dense over all `4^k` k-mers.
pub fn kmer_counts(x: &Sequence, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; 1 << (2 * k)];
    if k == 0 || x.len() < k {
        return out;
    }
    let mask = (1usize << (2 * k)) - 1;
    let mut code = 0usize;
    for (i, b) in x.codes().enumerate() {
        code = ((code << 2) | b as usize) & mask;
        if i + 1 >= k {
            out[code] += 1.0;
        }
    }
    out
}

impl KmerOracle {
    pub fn from_def(label: &str, k: usize, weights: &BTreeMap<String, f64>, intercept: f64, ridge: f64) -> Result<Self, RewardError> {
        if k == 0 || k > 12 {
            return Err(RewardError::InvalidK { k, min_len: 0 });
        }
        let mut dense = vec![0.0; 1 << (2 * k)];
        for (name, w) in weights {
            let code = kmer_code(name)
                .filter(|_| name.len() == k)
                .ok_or_else(|| RewardError::InvalidKmer(name.clone()))?;
            dense[code] = *w;
        }
        Ok(KmerOracle {
            label: label.into(),
            k,
            weights: dense,
            intercept,
            ridge,
        })
    }

    /// Unclamped linear prediction.
    pub fn linear(&self, x: &Sequence) -> f64 {
        self.intercept
            + kmer_counts(x, self.k)
                .iter()
                .zip(&self.weights)
                .map(|(c, w)| c * w)
                .sum::<f64>()
    }

    pub fn eval(&self, x: &Sequence) -> f64 {
        self.linear(x).clamp(0.0, 1.0)
    }

    pub fn to_def(&self) -> OracleDef {
        OracleDef::Kmer {
            label: self.label.clone(),
            k: self.k,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (kmer_name(self.k, i), *w))
                .collect(),
            intercept: self.intercept,
            ridge: self.ridge,
        }
    }
}

/// Ridge regression of `fitness[label]` on k-mer counts with an unpenalized
/// intercept, solved through the normal equations on centered data.
///
/// When every sequence has the same length the counts sum to a constant, so
/// the all-T k-mer is dropped as the reference column (its weight stays 0).
pub fn fit_kmer_oracle(records: &[FitnessRecord], label: &str, k: usize, ridge: f64) -> Result<KmerOracle, RewardError> {
    if records.len() < 2 {
        return Err(RewardError::TooFewRecords(records.len()));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(RewardError::InvalidRidge(ridge));
    }
    let min_len = records.iter().map(|r| r.sequence.len()).min().unwrap();
    let max_len = records.iter().map(|r| r.sequence.len()).max().unwrap();
    if k == 0 || k > min_len || k > 12 {
        return Err(RewardError::InvalidK { k, min_len });
    }
    let y: Vec<f64> = records
        .iter()
        .map(|r| {
            r.fitness
                .get(label)
                .copied()
                .ok_or_else(|| RewardError::MissingLabel(label.into()))
        })
        .collect::<Result<_, _>>()?;
    let n_kmers = 1usize << (2 * k);
    let p = if min_len == max_len { n_kmers - 1 } else { n_kmers };
    let n = records.len();
    let mut x = DMatrix::<f64>::zeros(n, p);
    for (i, r) in records.iter().enumerate() {
        for (j, c) in kmer_counts(&r.sequence, k).into_iter().take(p).enumerate() {
            x[(i, j)] = c;
        }
    }
    let x_mean: Vec<f64> = (0..p).map(|j| x.column(j).mean()).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    for j in 0..p {
        let m = x_mean[j];
        x.column_mut(j).iter_mut().for_each(|v| *v -= m);
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let mut a = x.transpose() * &x;
    for j in 0..p {
        a[(j, j)] += ridge;
    }
    let rhs = x.transpose() * yc;
    let scale = (0..p).map(|j| a[(j, j)]).fold(0.0f64, f64::max);
    let chol = a.cholesky().ok_or(RewardError::SingularSystem)?;
    let l = chol.l_dirty();
    let min_pivot = (0..p).map(|j| l[(j, j)] * l[(j, j)]).fold(f64::INFINITY, f64::min);
    if scale == 0.0 || min_pivot <= 1e-10 * scale {
        return Err(RewardError::SingularSystem);
    }
    let w = chol.solve(&rhs);
    let mut weights = vec![0.0; n_kmers];
    for j in 0..p {
        weights[j] = w[j];
    }
    let intercept = y_mean - (0..p).map(|j| x_mean[j] * w[j]).sum::<f64>();
    if !intercept.is_finite() || weights.iter().any(|v| !v.is_finite()) {
        return Err(RewardError::SingularSystem);
    }
    Ok(KmerOracle {
        label: label.into(),
        k,
        weights,
        intercept,
        ridge,
    })
}

/// A fitness oracle for one cell label.
#[derive(Debug, Clone)]
pub enum Oracle {
    Motif(MotifOracle),
    Kmer(KmerOracle),
}

impl Oracle {
    /// Builds an oracle from its JSON form. Motif oracles need `motifs`.
    pub fn from_def(def: &OracleDef, motifs: Option<&Arc<MotifSet>>) -> Result<Self, RewardError> {
        match def {
            OracleDef::Motif {
                label,
                weights,
                bias,
                threshold,
            } => {
                let motifs = motifs.ok_or_else(|| RewardError::InvalidOracle {
                    label: label.clone(),
                    reason: "motif oracle needs a motif file".into(),
                })?;
                Ok(Oracle::Motif(MotifOracle::new(label, weights, *bias, *threshold, motifs.clone())?))
            }
            OracleDef::Kmer {
                label,
                k,
                weights,
                intercept,
                ridge,
            } => Ok(Oracle::Kmer(KmerOracle::from_def(label, *k, weights, *intercept, *ridge)?)),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Oracle::Motif(o) => &o.label,
            Oracle::Kmer(o) => &o.label,
        }
    }

    pub fn eval(&self, x: &Sequence) -> f64 {
        match self {
            Oracle::Motif(o) => o.eval(x),
            Oracle::Kmer(o) => o.eval(x),
        }
    }

    pub fn to_def(&self) -> OracleDef {
        match self {
            Oracle::Motif(o) => o.to_def(),
            Oracle::Kmer(o) => o.to_def(),
        }
    }
}

/// Correlation reward between a sequence's own motif counts and `q_real`.
#[derive(Debug, Clone)]
pub struct TfbsReward {
    pub motifs: Arc<MotifSet>,
    pub q_real: FrequencyVector,
    pub p_threshold: f64,
}

impl TfbsReward {
    pub fn new(motifs: Arc<MotifSet>, q_real: FrequencyVector, p_threshold: f64) -> Result<Self, RewardError> {
        if q_real.len() != motifs.len() {
            return Err(RewardError::FrequencyMismatch {
                expected: motifs.len(),
                found: q_real.len(),
            });
        }
        if !(p_threshold > 0.0 && p_threshold <= 1.0) {
            return Err(MotifError::InvalidThreshold(p_threshold).into());
        }
        Ok(TfbsReward {
            motifs,
            q_real,
            p_threshold,
        })
    }

    /// Pearson r of per-sequence hit counts against `q_real`; 0 when either
    /// vector is constant.
    pub fn eval(&self, x: &Sequence) -> Result<f64, RewardError> {
        let q_gen: Vec<f64> = hit_counts(x, &self.motifs, self.p_threshold)
            .into_iter()
            .map(|c| c as f64)
            .collect();
        Ok(pearson(&q_gen, &self.q_real.values)?.r)
    }
}

/// Oracles per cell label (index 0 = target), constraint thresholds and the
/// optional TFBS term.
#[derive(Debug, Clone)]
pub struct RewardSpec {
    pub oracles: Vec<Oracle>,
    /// `deltas[i - 1]` is the threshold of constraint `i`.
    pub deltas: Vec<f64>,
    pub tfbs: Option<TfbsReward>,
}

impl RewardSpec {
    pub fn new(oracles: Vec<Oracle>, deltas: Vec<f64>, tfbs: Option<TfbsReward>) -> Result<Self, RewardError> {
        if oracles.is_empty() {
            return Err(RewardError::InvalidSpec("no target oracle".into()));
        }
        if deltas.len() != oracles.len() - 1 {
            return Err(RewardError::InvalidSpec(format!(
                "{} constraint labels but {} thresholds",
                oracles.len() - 1,
                deltas.len()
            )));
        }
        if deltas.iter().any(|d| !d.is_finite()) {
            return Err(RewardError::InvalidSpec("thresholds must be finite".into()));
        }
        Ok(RewardSpec { oracles, deltas, tfbs })
    }

    /// Number of constraint labels `m`.
    pub fn m(&self) -> usize {
        self.oracles.len() - 1
    }

    pub fn labels(&self) -> Vec<String> {
        self.oracles.iter().map(|o| o.label().to_string()).collect()
    }

    /// Width of a reward row: `m + 1`, plus one with the TFBS term.
    pub fn width(&self) -> usize {
        self.oracles.len() + usize::from(self.tfbs.is_some())
    }

    pub fn has_tfbs(&self) -> bool {
        self.tfbs.is_some()
    }

    pub fn eval_one(&self, x: &Sequence) -> Result<Vec<f64>, RewardError> {
        let mut row: Vec<f64> = self.oracles.iter().map(|o| o.eval(x)).collect();
        if let Some(t) = &self.tfbs {
            row.push(t.eval(x)?);
        }
        Ok(row)
    }
}

/// Rewards for every sequence, evaluated in parallel. Pure: the output order
/// follows `batch`.
pub fn evaluate_rewards(spec: &RewardSpec, batch: &[Sequence]) -> Result<Vec<Vec<f64>>, RewardError> {
    batch.par_iter().map(|x| spec.eval_one(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motif::{build_pvalue_table, Motif, PositionWeightMatrix, UNIFORM_BACKGROUND};
    use proptest::prelude::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    fn exact_motif(name: &str, consensus: &str) -> Motif {
        let cols = seq(consensus)
            .codes()
            .map(|c| {
                let mut col = [-3.0; 4];
                col[c as usize] = 2.0;
                col
            })
            .collect();
        let pwm = PositionWeightMatrix::from_columns(name, cols);
        let table = build_pvalue_table(&pwm, UNIFORM_BACKGROUND, 1000).unwrap();
        Motif { pwm, table }
    }

    fn motifs() -> Arc<MotifSet> {
        Arc::new(MotifSet::new(vec![exact_motif("m1", "AAGG"), exact_motif("m2", "ACAC")]))
    }

    fn motif_oracle(w: &[(&str, f64)], bias: f64) -> MotifOracle {
        let weights = w.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        MotifOracle::new("cell", &weights, bias, 0.01, motifs()).unwrap()
    }

    #[test]
    fn motif_oracle_examples() {
        assert_eq!(motif_oracle(&[], 0.0).eval(&seq("ACGTACGTAC")), 0.5);
        let o = motif_oracle(&[("m1", 1.0)], 0.0);
        let two_hits = seq("AAGGTAAGGT");
        assert!((o.eval(&two_hits) - 1.0 / (1.0 + (-2f64).exp())).abs() < 1e-12);
        assert!((o.eval(&two_hits) - 0.8808).abs() < 1e-4);
        let o = motif_oracle(&[("m1", 1.0)], -1.0);
        assert!((o.eval(&seq("TTTTTTTTTT")) - 0.2689).abs() < 1e-4);
        let err = MotifOracle::new("c", &BTreeMap::from([("nope".to_string(), 1.0)]), 0.0, 0.01, motifs());
        assert!(matches!(err, Err(RewardError::UnknownMotif(_))));
    }

    #[test]
    fn motif_oracle_monotone_in_hits() {
        let o = motif_oracle(&[("m1", 0.7), ("m2", -0.4)], -1.0);
        let mut prev = 0.0;
        for n in 0..4 {
            let s: String = "AAGGT".repeat(n) + &"T".repeat(20 - 5 * n);
            let v = o.eval(&seq(&s));
            assert!(v >= prev);
            prev = v;
        }
    }

    fn records_from(seqs: &[String], f: impl Fn(&Sequence) -> f64) -> Vec<FitnessRecord> {
        seqs.iter()
            .map(|s| {
                let s = seq(s);
                let v = f(&s);
                FitnessRecord {
                    sequence: s,
                    fitness: BTreeMap::from([("t".to_string(), v)]),
                }
            })
            .collect()
    }

    fn random_seqs(n: usize, len: usize, seed: u64) -> Vec<String> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..len).map(|_| "ACGT".as_bytes()[rng.random_range(0..4)] as char).collect())
            .collect()
    }

    fn count_ac(s: &Sequence) -> f64 {
        s.to_string().as_bytes().windows(2).filter(|w| w == b"AC").count() as f64
    }

    #[test]
    fn kmer_exact_fit() {
        let seqs = random_seqs(60, 12, 3);
        let recs = records_from(&seqs, |s| 0.1 * count_ac(s) + 0.2);
        let o = fit_kmer_oracle(&recs, "t", 2, 0.0).unwrap();
        for r in &recs {
            assert!((o.linear(&r.sequence) - r.fitness["t"]).abs() < 1e-8);
        }
        let ac = kmer_code("AC").unwrap();
        assert!((o.weights[ac] - 0.1).abs() < 1e-8);
    }

    #[test]
    fn kmer_variable_lengths_keep_every_column() {
        let mut seqs = random_seqs(40, 10, 5);
        seqs.extend(random_seqs(40, 13, 6));
        let recs = records_from(&seqs, |s| 0.05 * count_ac(s) + 0.3);
        let o = fit_kmer_oracle(&recs, "t", 2, 0.0).unwrap();
        for r in &recs {
            assert!((o.linear(&r.sequence) - r.fitness["t"]).abs() < 1e-8);
        }
    }

    #[test]
    fn kmer_heavy_ridge_predicts_mean() {
        let seqs = random_seqs(30, 12, 4);
        let recs = records_from(&seqs, |s| 0.1 * count_ac(s) + 0.2);
        let mean = recs.iter().map(|r| r.fitness["t"]).sum::<f64>() / recs.len() as f64;
        let o = fit_kmer_oracle(&recs, "t", 2, 1e9).unwrap();
        assert!(o.weights.iter().all(|w| w.abs() < 1e-6));
        for r in &recs {
            assert!((o.linear(&r.sequence) - mean).abs() < 1e-5);
        }
    }

    #[test]
    fn kmer_singular_and_errors() {
        let r = records_from(&["ACGTAC".to_string(), "ACGTAC".to_string()], |_| 0.4);
        assert_eq!(fit_kmer_oracle(&r, "t", 2, 0.0).unwrap_err(), RewardError::SingularSystem);
        assert!(matches!(fit_kmer_oracle(&r[..1], "t", 2, 0.0), Err(RewardError::TooFewRecords(1))));
        assert!(matches!(fit_kmer_oracle(&r, "t", 7, 0.0), Err(RewardError::InvalidK { .. })));
        assert!(matches!(fit_kmer_oracle(&r, "x", 2, 1.0), Err(RewardError::MissingLabel(_))));
    }

    #[test]
    fn kmer_ridge_path_continuous() {
        let seqs = random_seqs(40, 12, 8);
        let recs = records_from(&seqs, |s| 0.1 * count_ac(s) + 0.2);
        let probe = seq("ACACGTTGCA");
        for ridge in [0.1, 1.0, 10.0] {
            let a = fit_kmer_oracle(&recs, "t", 2, ridge).unwrap().linear(&probe);
            let b = fit_kmer_oracle(&recs, "t", 2, ridge * (1.0 + 1e-6)).unwrap().linear(&probe);
            assert!((a - b).abs() < 1e-5, "ridge {ridge}: {a} vs {b}");
        }
    }

    #[test]
    fn kmer_clamps_and_round_trips() {
        let mut w = BTreeMap::new();
        w.insert("AA".to_string(), 0.6);
        let o = KmerOracle::from_def("t", 2, &w, 0.0, 0.0).unwrap();
        assert_eq!(o.eval(&seq("AAAA")), 1.0);
        let o = KmerOracle::from_def("t", 2, &w, -0.5, 0.0).unwrap();
        assert_eq!(o.eval(&seq("CCCC")), 0.0);
        let def = o.to_def();
        let json = serde_json::to_string(&def).unwrap();
        assert!(json.contains("\"kind\":\"kmer\""));
        let back: OracleDef = serde_json::from_str(&json).unwrap();
        assert_eq!(back, def);
        assert!(matches!(
            KmerOracle::from_def("t", 2, &BTreeMap::from([("AXA".to_string(), 1.0)]), 0.0, 0.0),
            Err(RewardError::InvalidKmer(_))
        ));
    }

    fn spec(m: usize, tfbs: bool) -> RewardSpec {
        let mk = |l: &str, w: f64| Oracle::Motif(motif_oracle(&[("m1", w)], 0.0)).relabel(l);
        let mut oracles = vec![mk("target", 1.0)];
        for i in 0..m {
            oracles.push(mk(&format!("c{i}"), -0.5));
        }
        let t = tfbs.then(|| {
            TfbsReward::new(
                motifs(),
                FrequencyVector {
                    motif_names: vec!["m1".into(), "m2".into()],
                    values: vec![2.0, 1.0],
                },
                0.01,
            )
            .unwrap()
        });
        RewardSpec::new(oracles, vec![0.5; m], t).unwrap()
    }

    impl Oracle {
        fn relabel(mut self, l: &str) -> Self {
            match &mut self {
                Oracle::Motif(o) => o.label = l.into(),
                Oracle::Kmer(o) => o.label = l.into(),
            }
            self
        }
    }

    #[test]
    fn reward_vector_layout() {
        let batch = vec![seq("AAGGAAGGACACTT")];
        let r = evaluate_rewards(&spec(2, true), &batch).unwrap();
        assert_eq!(r[0].len(), 4);
        // two m1 hits and one m2 hit correlate perfectly with [2, 1]
        assert!((r[0][3] - 1.0).abs() < 1e-12);
        let r = evaluate_rewards(&spec(2, false), &batch).unwrap();
        assert_eq!(r[0].len(), 3);
        let r = evaluate_rewards(&spec(0, true), &[seq("TTTTTTTT")]).unwrap();
        assert_eq!(r[0], vec![0.5, 0.0]);
        assert_eq!(spec(2, true).labels(), vec!["target", "c0", "c1"]);
        assert!(RewardSpec::new(vec![], vec![], None).is_err());
    }

    proptest! {
        #[test]
        fn evaluate_is_permutation_equivariant(idx in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(), seed in 0u64..100) {
            let seqs: Vec<Sequence> = random_seqs(6, 16, seed).iter().map(|s| seq(s)).collect();
            let s = spec(1, true);
            let base = evaluate_rewards(&s, &seqs).unwrap();
            let perm: Vec<Sequence> = idx.iter().map(|&i| seqs[i].clone()).collect();
            let out = evaluate_rewards(&s, &perm).unwrap();
            for (j, &i) in idx.iter().enumerate() {
                prop_assert_eq!(&out[j], &base[i]);
            }
            for row in &out {
                prop_assert!(row[..2].iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!((-1.0..=1.0).contains(&row[2]));
            }
        }
    }
}
