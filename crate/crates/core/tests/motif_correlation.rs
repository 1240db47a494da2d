use ctrlseq::metrics::{compute_metrics, motif_correlation, MotifContext};
use ctrlseq::motif::{frequency_vector, FrequencyMode, FrequencyVector, MotifSet, PositionProbabilityMatrix, ScoringParams};
use ctrlseq::seq::Sequence;

// exact width-4 matches have p = 4^-4, everything else is far above 0.01
const P: f64 = 0.01;

fn motifs() -> MotifSet {
    let a = PositionProbabilityMatrix::from_counts("polyA", &[[1.0, 0.0, 0.0, 0.0]; 4]).unwrap();
    let c = PositionProbabilityMatrix::from_counts("polyC", &[[0.0, 1.0, 0.0, 0.0]; 4]).unwrap();
    MotifSet::from_ppms(&[a, c], &ScoringParams::default()).unwrap()
}

fn seq(s: &str) -> Sequence {
    s.parse().unwrap()
}

#[test]
fn batch_equal_to_reference_selection_correlates_perfectly() {
    let set = motifs();
    let batch = vec![seq("GAAAAGCCCCG"), seq("GAAAAGAAAAG"), seq("GTGTGTGTGTG")];
    let q_real = frequency_vector(&batch, &set, P, FrequencyMode::Counts).unwrap();
    let (r, zero) = motif_correlation(&batch, &q_real, &set, P, FrequencyMode::Counts).unwrap();
    assert!((r - 1.0).abs() < 1e-9);
    assert!(!zero);
}

#[test]
fn batch_without_hits_has_zero_variance() {
    let set = motifs();
    let q_real = FrequencyVector {
        motif_names: set.names(),
        values: vec![2.0, 1.0],
    };
    let batch = vec![seq("GTGTGTGTGT"), seq("TGTGTGTGTG")];
    let (r, zero) = motif_correlation(&batch, &q_real, &set, P, FrequencyMode::Counts).unwrap();
    assert_eq!(r, 0.0);
    assert!(zero);
}

#[test]
fn scaled_frequencies_correlate_perfectly() {
    let set = motifs();
    let q_real = FrequencyVector {
        motif_names: set.names(),
        values: vec![2.0, 1.0],
    };
    // four polyA and two polyC hits, none on the reverse strand
    let batch = vec![seq("GAAAAGAAAAGAAAAGAAAAGCCCCGCCCCG")];
    let q_gen = frequency_vector(&batch, &set, P, FrequencyMode::Counts).unwrap();
    assert_eq!(q_gen.values, vec![4.0, 2.0]);
    let (r, _) = motif_correlation(&batch, &q_real, &set, P, FrequencyMode::Counts).unwrap();
    assert!((r - 1.0).abs() < 1e-9);

    let labels = vec!["target".to_string(), "off".to_string()];
    let report = compute_metrics(
        &labels,
        &batch,
        &[vec![0.9, 0.2]],
        Some(MotifContext {
            motifs: &set,
            q_real: &q_real,
            p_threshold: P,
            mode: FrequencyMode::Counts,
        }),
    )
    .unwrap();
    assert!((report.motif_correlation.unwrap() - 1.0).abs() < 1e-9);
    assert!((report.delta_r.unwrap() - 0.7).abs() < 1e-9);
}
