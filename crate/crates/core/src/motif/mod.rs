//! Transcription-factor motifs: JASPAR parsing, log-odds scoring with exact
//! null p-values, both-strand scanning, and the motif frequency vectors used
//! by the TFBS reward and the motif-correlation metric.

mod frequency;
mod jaspar;
mod pwm;
mod scan;
mod stats;

pub use frequency::{
    frequency_vector, hit_counts, quantile, reference_frequency, FrequencyMode, FrequencyVector,
    ReferenceSelection,
};
pub use jaspar::{parse_jaspar, render_jaspar, PositionProbabilityMatrix};
pub use pwm::{build_pvalue_table, ppm_to_pwm, PositionWeightMatrix, ScorePValueTable};
pub use scan::{scan, scan_all_windows, MotifHit, Strand};
pub use stats::{bh_qvalues, pearson, Correlation};

use serde::{Deserialize, Serialize};

use crate::seq::Sequence;

/// Uniform nucleotide background.
pub const UNIFORM_BACKGROUND: [f64; 4] = [0.25; 4];
/// Pseudocount mixed into PPM columns before taking log-odds.
pub const DEFAULT_PSEUDOCOUNT: f64 = 0.01;
/// Number of bins for the discretized null score distribution.
pub const DEFAULT_PVALUE_BINS: usize = 1000;
/// Scanning p-value cutoff.
pub const DEFAULT_P_THRESHOLD: f64 = 1e-4;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MotifError {
    #[error("malformed motif{}: {reason}", .motif.as_ref().map(|m| format!(" {m}")).unwrap_or_default())]
    MalformedMotif { motif: Option<String>, reason: String },
    #[error("background must be strictly positive and sum to 1")]
    InvalidBackground,
    #[error("motif {0} has identical minimum and maximum score")]
    DegenerateMotif(String),
    #[error("pvalue table needs at least 100 bins, got {0}")]
    TooFewBins(usize),
    #[error("sequence of length {length} is shorter than motif width {width}")]
    SequenceTooShort { length: usize, width: usize },
    #[error("p-value threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("no record satisfies the percentile filters")]
    EmptySelection,
    #[error("fitness label {0:?} is missing")]
    MissingLabel(String),
    #[error("vector lengths differ ({0} vs {1}) or are shorter than 2")]
    LengthMismatch(usize, usize),
    #[error("p-values must lie in (0, 1], got {0}")]
    InvalidPValue(f64),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Background, pseudocount and discretization used to turn PPMs into
/// scoreable motifs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringParams {
    #[serde(default = "default_background")]
    pub background: [f64; 4],
    #[serde(default = "default_pseudocount")]
    pub pseudocount: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_background() -> [f64; 4] {
    UNIFORM_BACKGROUND
}
fn default_pseudocount() -> f64 {
    DEFAULT_PSEUDOCOUNT
}
fn default_bins() -> usize {
    DEFAULT_PVALUE_BINS
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            background: UNIFORM_BACKGROUND,
            pseudocount: DEFAULT_PSEUDOCOUNT,
            bins: DEFAULT_PVALUE_BINS,
        }
    }
}

/// A scoring matrix together with its null p-value table.
#[derive(Debug, Clone)]
pub struct Motif {
    pub pwm: PositionWeightMatrix,
    pub table: ScorePValueTable,
}

impl Motif {
    pub fn from_ppm(ppm: &PositionProbabilityMatrix, params: &ScoringParams) -> Result<Self, MotifError> {
        let pwm = ppm_to_pwm(ppm, params.background, params.pseudocount)?;
        let table = build_pvalue_table(&pwm, params.background, params.bins)?;
        Ok(Motif { pwm, table })
    }

    pub fn name(&self) -> &str {
        &self.pwm.name
    }

    pub fn width(&self) -> usize {
        self.pwm.width()
    }

    pub fn scan(&self, sequence: &Sequence, p_threshold: f64) -> Result<Vec<MotifHit>, MotifError> {
        scan(sequence, &self.pwm, &self.table, p_threshold)
    }
}

/// An ordered motif list. The order fixes the layout of every
/// [`FrequencyVector`] built from it.
#[derive(Debug, Clone, Default)]
pub struct MotifSet {
    motifs: Vec<Motif>,
}

impl MotifSet {
    pub fn new(motifs: Vec<Motif>) -> Self {
        MotifSet { motifs }
    }

    pub fn from_ppms(ppms: &[PositionProbabilityMatrix], params: &ScoringParams) -> Result<Self, MotifError> {
        let motifs = ppms
            .iter()
            .map(|p| Motif::from_ppm(p, params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MotifSet { motifs })
    }

    pub fn motifs(&self) -> &[Motif] {
        &self.motifs
    }

    pub fn len(&self) -> usize {
        self.motifs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motifs.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.motifs.iter().map(|m| m.name().to_string()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.motifs.iter().position(|m| m.name() == name)
    }

    pub fn max_width(&self) -> usize {
        self.motifs.iter().map(Motif::width).max().unwrap_or(0)
    }
}
