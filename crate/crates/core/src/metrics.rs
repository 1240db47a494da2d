//! Evaluation metrics for a generated batch: per-objective medians, target
//! specificity (ΔR), batch-level motif correlation and per-position entropy.

use serde::{Deserialize, Serialize};

use crate::motif::{frequency_vector, pearson, FrequencyMode, FrequencyVector, MotifError, MotifSet};
use crate::seq::Sequence;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("empty input")]
    EmptyInput,
    #[error("empty batch")]
    EmptyBatch,
    #[error("delta R needs at least one off-target column")]
    NoConstraints,
    #[error("sequences have different lengths")]
    LengthMismatch,
    #[error("reward rows have inconsistent widths")]
    ShapeMismatch,
    #[error(transparent)]
    Motif(#[from] MotifError),
}

/// Midpoint median (mean of the two central order statistics for even counts).
pub fn median(values: &[f64]) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean over sequences of `R_0 - mean_{i>=1} R_i`. Rows are `[R_0, .., R_m]`.
pub fn delta_r(rows: &[Vec<f64>]) -> Result<f64, MetricError> {
    if rows.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let width = rows[0].len();
    if width < 2 {
        return Err(MetricError::NoConstraints);
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(MetricError::ShapeMismatch);
    }
    let per_seq: Vec<f64> = rows
        .iter()
        .map(|r| r[0] - r[1..].iter().sum::<f64>() / (width - 1) as f64)
        .collect();
    Ok(mean(&per_seq))
}

/// Mean per-position Shannon entropy of the batch, in bits.
pub fn diversity(batch: &[Sequence]) -> Result<f64, MetricError> {
    let first = batch.first().ok_or(MetricError::EmptyBatch)?;
    let len = first.len();
    if batch.iter().any(|s| s.len() != len) {
        return Err(MetricError::LengthMismatch);
    }
    if len == 0 {
        return Ok(0.0);
    }
    let mut counts = vec![[0usize; 4]; len];
    for s in batch {
        for (t, c) in s.codes().enumerate() {
            counts[t][c as usize] += 1;
        }
    }
    let n = batch.len() as f64;
    let total: f64 = counts
        .iter()
        .map(|col| {
            col.iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    -p * p.log2()
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total / len as f64)
}

/// Pearson correlation of the batch-level frequency vector with `q_real`.
/// Returns `(r, zero_variance)`.
pub fn motif_correlation(
    batch: &[Sequence],
    q_real: &FrequencyVector,
    motifs: &MotifSet,
    p_threshold: f64,
    mode: FrequencyMode,
) -> Result<(f64, bool), MetricError> {
    if batch.is_empty() {
        return Err(MetricError::EmptyBatch);
    }
    let q_gen = frequency_vector(batch, motifs, p_threshold, mode)?;
    let c = pearson(&q_gen.values, &q_real.values)?;
    Ok((c.r, c.zero_variance))
}

/// Final-round metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub labels: Vec<String>,
    /// Per-objective medians in label order.
    pub median_reward: Vec<f64>,
    /// Per-objective means in label order.
    pub mean_reward: Vec<f64>,
    /// Absent when there is no off-target label.
    pub delta_r: Option<f64>,
    /// Absent without motifs and a reference frequency vector.
    pub motif_correlation: Option<f64>,
    #[serde(default)]
    pub motif_correlation_zero_variance: bool,
    pub diversity_bits: f64,
    pub n_sequences: usize,
}

/// Motif inputs for [`compute_metrics`].
pub struct MotifContext<'a> {
    pub motifs: &'a MotifSet,
    pub q_real: &'a FrequencyVector,
    pub p_threshold: f64,
    pub mode: FrequencyMode,
}

/// Metrics of `batch` given its fitness rows `[R_0, .., R_m]`.
pub fn compute_metrics(
    labels: &[String],
    batch: &[Sequence],
    fitness: &[Vec<f64>],
    motif: Option<MotifContext<'_>>,
) -> Result<MetricsReport, MetricError> {
    if batch.is_empty() {
        return Err(MetricError::EmptyBatch);
    }
    if fitness.len() != batch.len() || fitness.iter().any(|r| r.len() < labels.len()) {
        return Err(MetricError::ShapeMismatch);
    }
    let columns: Vec<Vec<f64>> = (0..labels.len())
        .map(|i| fitness.iter().map(|r| r[i]).collect())
        .collect();
    let median_reward = columns.iter().map(|c| median(c)).collect::<Result<_, _>>()?;
    let mean_reward = columns.iter().map(|c| mean(c)).collect();
    let trimmed: Vec<Vec<f64>> = fitness.iter().map(|r| r[..labels.len()].to_vec()).collect();
    let delta_r = if labels.len() >= 2 { Some(delta_r(&trimmed)?) } else { None };
    let (motif_correlation, zero_var) = match motif {
        Some(m) => {
            let (r, z) = motif_correlation(batch, m.q_real, m.motifs, m.p_threshold, m.mode)?;
            (Some(r), z)
        }
        None => (None, false),
    };
    Ok(MetricsReport {
        labels: labels.to_vec(),
        median_reward,
        mean_reward,
        delta_r,
        motif_correlation,
        motif_correlation_zero_variance: zero_var,
        diversity_bits: diversity(batch)?,
        n_sequences: batch.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seqs(v: &[&str]) -> Vec<Sequence> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[0.1, 0.9, 0.5]).unwrap(), 0.5);
        assert!((median(&[0.2, 0.4]).unwrap() - 0.3).abs() < 1e-9);
        assert_eq!(median(&[0.7, 0.7, 0.7]).unwrap(), 0.7);
        assert_eq!(median(&[]), Err(MetricError::EmptyInput));
    }

    #[test]
    fn delta_r_examples() {
        let rows = vec![vec![0.8, 0.2, 0.4], vec![0.6, 0.4, 0.2]];
        assert!((delta_r(&rows).unwrap() - 0.4).abs() < 1e-9);
        assert_eq!(delta_r(&[vec![0.3, 0.3, 0.3]]).unwrap(), 0.0);
        assert_eq!(delta_r(&[vec![1.0, 0.0]]).unwrap(), 1.0);
        assert_eq!(delta_r(&[vec![1.0]]), Err(MetricError::NoConstraints));
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity(&seqs(&["ACGT", "ACGT", "ACGT"])).unwrap(), 0.0);
        assert!((diversity(&seqs(&["ACGT", "CGTA", "GTAC", "TACG"])).unwrap() - 2.0).abs() < 1e-9);
        assert!((diversity(&seqs(&["AC", "AG"])).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(diversity(&[]), Err(MetricError::EmptyBatch));
        assert_eq!(diversity(&seqs(&["AC", "A"])), Err(MetricError::LengthMismatch));
    }

    proptest! {
        #[test]
        fn median_bounded_and_permutation_invariant(v in prop::collection::vec(-10f64..10.0, 1..30), seed in any::<u64>()) {
            let m = median(&v).unwrap();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo && m <= hi);
            let mut w = v.clone();
            let n = w.len();
            w.rotate_left((seed % n as u64) as usize);
            w.reverse();
            prop_assert_eq!(median(&w).unwrap(), m);
        }

        #[test]
        fn delta_r_is_linear(rows in prop::collection::vec(prop::collection::vec(0f64..1.0, 3), 1..10), c in 0.1f64..5.0) {
            let d = delta_r(&rows).unwrap();
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
            prop_assert!((delta_r(&scaled).unwrap() - c * d).abs() < 1e-9);
        }

        #[test]
        fn diversity_permutation_invariant(codes in prop::collection::vec(prop::collection::vec(0u8..4, 8), 1..12)) {
            let batch: Vec<Sequence> = codes.iter().map(|c| Sequence::from_codes(c)).collect();
            let d = diversity(&batch).unwrap();
            prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
            let mut rev = batch.clone();
            rev.reverse();
            prop_assert!((diversity(&rev).unwrap() - d).abs() < 1e-12);
        }
    }
}
