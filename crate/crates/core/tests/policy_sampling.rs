use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctrlseq::policy::{surrogate_gradient, Policy, SampledBatch};
use ctrlseq::seq::Sequence;

fn perturbed(order: usize, seed: u64, scale: f64) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Policy::uniform(order).unwrap();
    for v in p.logits_mut() {
        *v += scale * (rng.random::<f64>() - 0.5);
    }
    p
}

#[test]
fn order_zero_symbol_frequencies_are_uniform() {
    let p = Policy::uniform(0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let batch = p.sample_batch(20_000, 5, &mut rng);
    let mut counts = [0usize; 4];
    for s in &batch.sequences {
        for c in s.codes() {
            counts[c as usize] += 1;
        }
    }
    let n = 100_000.0;
    let sigma = (n * 0.25 * 0.75f64).sqrt();
    for c in counts {
        assert!((c as f64 - n / 4.0).abs() <= 3.0 * sigma, "{counts:?}");
    }
}

fn check_sequence_frequencies(order: usize, length: usize, seed: u64) {
    let p = perturbed(order, seed, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let n = 100_000usize;
    let batch = p.sample_batch(n, length, &mut rng);
    let mut counts: HashMap<String, usize> = HashMap::new();
    for s in &batch.sequences {
        *counts.entry(s.to_string()).or_default() += 1;
    }
    let mut total_p = 0.0;
    for code in 0..4usize.pow(length as u32) {
        let mut c = code;
        let codes: Vec<u8> = (0..length)
            .map(|_| {
                let b = (c % 4) as u8;
                c /= 4;
                b
            })
            .collect();
        let s = Sequence::from_codes(&codes);
        let prob: f64 = p.log_prob(&s).iter().sum::<f64>().exp();
        total_p += prob;
        let expected = n as f64 * prob;
        let sigma = (n as f64 * prob * (1.0 - prob)).sqrt();
        let seen = counts.get(&s.to_string()).copied().unwrap_or(0) as f64;
        assert!(
            (seen - expected).abs() <= 4.0 * sigma.max(0.25),
            "{s}: seen {seen}, expected {expected:.1} +- {sigma:.1}"
        );
    }
    assert!((total_p - 1.0).abs() < 1e-12);
}

#[test]
fn sequence_frequencies_match_log_prob() {
    check_sequence_frequencies(0, 3, 11);
    check_sequence_frequencies(1, 4, 12);
    check_sequence_frequencies(2, 3, 13);
}

#[test]
fn single_sequence_reduces_to_weighted_score() {
    for (order, seed) in [(0, 1), (1, 2), (2, 3)] {
        let theta = perturbed(order, seed, 2.0);
        let x: Sequence = "ACGGTCA".parse().unwrap();
        let batch = SampledBatch::from_sequences(&theta, vec![x.clone()]);
        let adv = 0.7;
        let g = surrogate_gradient(&theta, &batch, &[adv], &theta, 0.2, 0.0).unwrap();
        // score function by central differences of sum_t log pi(x_t | ctx_t)
        let total = |q: &Policy| q.log_prob(&x).iter().sum::<f64>();
        let h = 1e-6;
        for i in 0..theta.logits().len() {
            let mut a = theta.clone();
            a.logits_mut()[i] += h;
            let mut b = theta.clone();
            b.logits_mut()[i] -= h;
            let score = (total(&a) - total(&b)) / (2.0 * h);
            assert!((g.logits[i] - adv * score).abs() < 1e-7, "k={order} param {i}");
        }
    }
}
