use serde::{Deserialize, Serialize};

use super::{MotifError, PositionProbabilityMatrix};

/// Base-2 log-odds scoring matrix derived from a PPM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionWeightMatrix {
    pub name: String,
    pub columns: Vec<[f64; 4]>,
    pub max_score: f64,
    pub min_score: f64,
}

impl PositionWeightMatrix {
    /// Builds a matrix directly from log-odds columns.
    pub fn from_columns(name: impl Into<String>, columns: Vec<[f64; 4]>) -> Self {
        let max_score = columns.iter().map(|c| c.iter().copied().fold(f64::MIN, f64::max)).sum();
        let min_score = columns.iter().map(|c| c.iter().copied().fold(f64::MAX, f64::min)).sum();
        PositionWeightMatrix {
            name: name.into(),
            columns,
            max_score,
            min_score,
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Score of the window `codes` (length must equal the width).
    pub fn score_codes(&self, codes: &[u8]) -> f64 {
        debug_assert_eq!(codes.len(), self.width());
        self.columns
            .iter()
            .zip(codes)
            .map(|(col, &c)| col[c as usize])
            .sum()
    }

    /// The highest-scoring window, ties broken towards the lower code.
    pub fn consensus(&self) -> Vec<u8> {
        self.columns
            .iter()
            .map(|c| {
                let mut best = 0;
                for b in 1..4 {
                    if c[b] > c[best] {
                        best = b;
                    }
                }
                best as u8
            })
            .collect()
    }
}

fn check_background(bg: &[f64; 4]) -> Result<(), MotifError> {
    let total: f64 = bg.iter().sum();
    if bg.iter().any(|p| !p.is_finite() || *p <= 0.0) || (total - 1.0).abs() > 1e-6 {
        return Err(MotifError::InvalidBackground);
    }
    Ok(())
}

/// Log-odds transform with pseudocount smoothing:
/// `log2((p + eps*bg) / ((1 + eps) * bg))`.
pub fn ppm_to_pwm(
    ppm: &PositionProbabilityMatrix,
    background: [f64; 4],
    pseudocount: f64,
) -> Result<PositionWeightMatrix, MotifError> {
    check_background(&background)?;
    if !(pseudocount >= 0.0 && pseudocount.is_finite()) {
        return Err(MotifError::MalformedMotif {
            motif: Some(ppm.name.clone()),
            reason: format!("pseudocount must be non-negative, got {pseudocount}"),
        });
    }
    let columns = ppm
        .columns
        .iter()
        .map(|col| {
            let mut out = [0.0; 4];
            for b in 0..4 {
                out[b] = ((col[b] + pseudocount * background[b]) / ((1.0 + pseudocount) * background[b])).log2();
            }
            out
        })
        .collect();
    Ok(PositionWeightMatrix::from_columns(ppm.name.clone(), columns))
}

/// Null distribution of the discretized score of a random background window.
///
/// Each PWM entry is mapped to `floor((entry - column_min) / bin_width)`, so a
/// window's discretized score is an integer in `0..=max_bin`. `tail_probs[d]`
/// is `P(D >= d)` under the background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePValueTable {
    pub bin_width: f64,
    /// Real score corresponding to discretized score 0 (the PWM minimum).
    pub offset: f64,
    pub column_bins: Vec<[u32; 4]>,
    pub tail_probs: Vec<f64>,
}

impl ScorePValueTable {
    /// Largest attainable discretized score.
    pub fn max_bin(&self) -> usize {
        self.tail_probs.len() - 1
    }

    pub fn bins_of_codes(&self, codes: &[u8]) -> usize {
        self.column_bins
            .iter()
            .zip(codes)
            .map(|(col, &c)| col[c as usize] as usize)
            .sum()
    }

    /// `P(D >= d)`, 0 beyond the maximum.
    pub fn p_value_of_bins(&self, d: usize) -> f64 {
        self.tail_probs.get(d).copied().unwrap_or(0.0)
    }

    /// Approximate p-value of a real score via its bin on the total-score grid.
    pub fn p_value(&self, score: f64) -> f64 {
        let rel = (score - self.offset) / self.bin_width;
        if rel <= 0.0 {
            return 1.0;
        }
        self.p_value_of_bins(discretize(rel))
    }
}

#[inline]
fn discretize(rel: f64) -> usize {
    // absorbs round-off when an entry sits exactly on a bin edge
    (rel + 1e-9).floor().max(0.0) as usize
}

/// Dynamic program over motif positions giving exact tail probabilities for
/// the discretized score.
pub fn build_pvalue_table(
    pwm: &PositionWeightMatrix,
    background: [f64; 4],
    bins: usize,
) -> Result<ScorePValueTable, MotifError> {
    check_background(&background)?;
    if bins < 100 {
        return Err(MotifError::TooFewBins(bins));
    }
    let range = pwm.max_score - pwm.min_score;
    if !(range > 0.0) || !range.is_finite() {
        return Err(MotifError::DegenerateMotif(pwm.name.clone()));
    }
    let bin_width = range / bins as f64;

    let column_bins: Vec<[u32; 4]> = pwm
        .columns
        .iter()
        .map(|col| {
            let lo = col.iter().copied().fold(f64::MAX, f64::min);
            col.map(|e| discretize((e - lo) / bin_width) as u32)
        })
        .collect();

    let total_max: usize = column_bins
        .iter()
        .map(|c| *c.iter().max().unwrap() as usize)
        .sum();
    let mut pdf = vec![0.0f64; total_max + 1];
    pdf[0] = 1.0;
    let mut reach = 0usize;
    for col in &column_bins {
        let col_max = *col.iter().max().unwrap() as usize;
        let mut next = vec![0.0f64; total_max + 1];
        for (d, &p) in pdf[..=reach].iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for b in 0..4 {
                next[d + col[b] as usize] += p * background[b];
            }
        }
        pdf = next;
        reach += col_max;
    }

    let mut tail_probs = vec![0.0f64; total_max + 1];
    let mut acc = 0.0;
    for d in (0..=total_max).rev() {
        acc += pdf[d];
        tail_probs[d] = acc.min(1.0);
    }
    tail_probs[0] = 1.0;

    Ok(ScorePValueTable {
        bin_width,
        offset: pwm.min_score,
        column_bins,
        tail_probs,
    })
}
