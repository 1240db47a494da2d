use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MotifError, PositionWeightMatrix, ScorePValueTable};
use crate::seq::Sequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strand {
    #[serde(rename = "+")]
    Forward,
    #[serde(rename = "-")]
    Reverse,
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strand::Forward => "+",
            Strand::Reverse => "-",
        })
    }
}

/// One motif occurrence. `position` is the 0-based start of the window on the
/// forward strand for both orientations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifHit {
    pub motif_name: String,
    pub position: usize,
    pub strand: Strand,
    pub score: f64,
    pub p_value: f64,
}

/// Scores every window on both strands, returning all of them (no threshold).
pub fn scan_all_windows(
    sequence: &Sequence,
    pwm: &PositionWeightMatrix,
    table: &ScorePValueTable,
) -> Result<Vec<MotifHit>, MotifError> {
    let width = pwm.width();
    if sequence.len() < width {
        return Err(MotifError::SequenceTooShort {
            length: sequence.len(),
            width,
        });
    }
    let codes: Vec<u8> = sequence.codes().collect();
    let mut out = Vec::with_capacity(2 * (codes.len() - width + 1));
    let mut rc = vec![0u8; width];
    for (pos, window) in codes.windows(width).enumerate() {
        for (dst, &c) in rc.iter_mut().zip(window.iter().rev()) {
            *dst = 3 - c;
        }
        for (strand, w) in [(Strand::Forward, window), (Strand::Reverse, &rc[..])] {
            out.push(MotifHit {
                motif_name: pwm.name.clone(),
                position: pos,
                strand,
                score: pwm.score_codes(w),
                p_value: table.p_value_of_bins(table.bins_of_codes(w)),
            });
        }
    }
    Ok(out)
}

/// Both-strand scan keeping windows with `p_value < p_threshold`, ordered by
/// position then strand (`+` first).
pub fn scan(
    sequence: &Sequence,
    pwm: &PositionWeightMatrix,
    table: &ScorePValueTable,
    p_threshold: f64,
) -> Result<Vec<MotifHit>, MotifError> {
    if !(p_threshold > 0.0 && p_threshold <= 1.0) {
        return Err(MotifError::InvalidThreshold(p_threshold));
    }
    let mut hits = scan_all_windows(sequence, pwm, table)?;
    hits.retain(|h| h.p_value < p_threshold);
    Ok(hits)
}

/// Number of hits below `p_threshold` without materializing them.
pub(crate) fn count_hits(
    codes: &[u8],
    pwm: &PositionWeightMatrix,
    table: &ScorePValueTable,
    p_threshold: f64,
) -> usize {
    let width = pwm.width();
    if codes.len() < width {
        return 0;
    }
    let mut rc = vec![0u8; width];
    let mut n = 0;
    for window in codes.windows(width) {
        if table.p_value_of_bins(table.bins_of_codes(window)) < p_threshold {
            n += 1;
        }
        for (dst, &c) in rc.iter_mut().zip(window.iter().rev()) {
            *dst = 3 - c;
        }
        if table.p_value_of_bins(table.bins_of_codes(&rc)) < p_threshold {
            n += 1;
        }
    }
    n
}
