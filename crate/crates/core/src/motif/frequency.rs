use serde::{Deserialize, Serialize};

use super::scan::count_hits;
use super::{MotifError, MotifSet};
use crate::seq::{FitnessRecord, Sequence};

/// Per-motif occurrence frequencies, aligned with a [`MotifSet`]'s order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub motif_names: Vec<String>,
    pub values: Vec<f64>,
}

impl FrequencyVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How hits in one sequence are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyMode {
    /// Raw number of hits.
    #[default]
    Counts,
    /// 1 if the motif occurs at all.
    Presence,
}

/// Hit count of every motif in `sequence` (both strands).
pub fn hit_counts(sequence: &Sequence, motifs: &MotifSet, p_threshold: f64) -> Vec<usize> {
    let codes: Vec<u8> = sequence.codes().collect();
    motifs
        .motifs()
        .iter()
        .map(|m| count_hits(&codes, &m.pwm, &m.table, p_threshold))
        .collect()
}

/// Mean per-sequence hit count of every motif over `sequences`.
pub fn frequency_vector(
    sequences: &[Sequence],
    motifs: &MotifSet,
    p_threshold: f64,
    mode: FrequencyMode,
) -> Result<FrequencyVector, MotifError> {
    if sequences.is_empty() {
        return Err(MotifError::EmptyInput);
    }
    if !(p_threshold > 0.0 && p_threshold <= 1.0) {
        return Err(MotifError::InvalidThreshold(p_threshold));
    }
    let mut totals = vec![0usize; motifs.len()];
    for s in sequences {
        for (t, c) in totals.iter_mut().zip(hit_counts(s, motifs, p_threshold)) {
            *t += match mode {
                FrequencyMode::Counts => c,
                FrequencyMode::Presence => usize::from(c > 0),
            };
        }
    }
    let n = sequences.len() as f64;
    Ok(FrequencyVector {
        motif_names: motifs.names(),
        values: totals.into_iter().map(|t| t as f64 / n).collect(),
    })
}

/// `p`-quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Percentile filter for picking reference sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSelection {
    pub target: String,
    pub off_targets: Vec<String>,
    /// Target fitness must be at least its `percentile`-quantile; every
    /// off-target fitness at most its `(100 - percentile)`-quantile.
    pub percentile: f64,
}

impl ReferenceSelection {
    /// Indices of the records passing every filter (inclusive of ties).
    pub fn select(&self, records: &[FitnessRecord]) -> Result<Vec<usize>, MotifError> {
        if records.is_empty() {
            return Err(MotifError::EmptyInput);
        }
        if !(0.0..=100.0).contains(&self.percentile) {
            return Err(MotifError::InvalidThreshold(self.percentile));
        }
        let column = |label: &str| -> Result<Vec<f64>, MotifError> {
            records
                .iter()
                .map(|r| {
                    r.fitness
                        .get(label)
                        .copied()
                        .ok_or_else(|| MotifError::MissingLabel(label.to_string()))
                })
                .collect()
        };
        let p = self.percentile / 100.0;
        let target = column(&self.target)?;
        let t_cut = quantile(&target, p).unwrap();
        let mut keep: Vec<bool> = target.iter().map(|v| *v >= t_cut).collect();
        for off in &self.off_targets {
            let vals = column(off)?;
            let cut = quantile(&vals, 1.0 - p).unwrap();
            for (k, v) in keep.iter_mut().zip(&vals) {
                *k &= *v <= cut;
            }
        }
        let selected: Vec<usize> = keep
            .iter()
            .enumerate()
            .filter_map(|(i, k)| k.then_some(i))
            .collect();
        if selected.is_empty() {
            return Err(MotifError::EmptySelection);
        }
        Ok(selected)
    }
}

/// Frequency vector of the records that are high in the target and low in
/// every off-target cell type.
pub fn reference_frequency(
    records: &[FitnessRecord],
    selection: &ReferenceSelection,
    motifs: &MotifSet,
    p_threshold: f64,
    mode: FrequencyMode,
) -> Result<FrequencyVector, MotifError> {
    let idx = selection.select(records)?;
    let seqs: Vec<Sequence> = idx.iter().map(|&i| records[i].sequence.clone()).collect();
    frequency_vector(&seqs, motifs, p_threshold, mode)
}
