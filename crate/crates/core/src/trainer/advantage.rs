use super::TrainerError;

/// Degeneracy floor for the population standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// Column-wise batch standardization with the population standard deviation.
/// Columns with `sigma < 1e-8` become all zeros.
pub fn normalize_advantages(rewards: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, TrainerError> {
    let n = rewards.len();
    if n < 2 {
        return Err(TrainerError::TooFewSamples(n));
    }
    let width = rewards[0].len();
    if rewards.iter().any(|r| r.len() != width) {
        return Err(TrainerError::ShapeMismatch("reward rows have different widths".into()));
    }
    let mut out = vec![vec![0.0; width]; n];
    for i in 0..width {
        let col: Vec<f64> = rewards.iter().map(|r| r[i]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let sigma = var.sqrt();
        if sigma < SIGMA_FLOOR {
            continue;
        }
        for (row, x) in out.iter_mut().zip(&col) {
            row[i] = (x - mean) / sigma;
        }
    }
    Ok(out)
}

/// `R_0 + sum_i ln(max(delta_i - R_i, c1))` per row. Rows start with
/// `[R_0, R_1, .., R_m]`; extra trailing columns are ignored.
pub fn ctrl_dna_log_rewards(rewards: &[Vec<f64>], deltas: &[f64], c1: f64) -> Result<Vec<f64>, TrainerError> {
    if !(c1 > 0.0) {
        return Err(TrainerError::InvalidConfig(format!("log_c1 must be positive, got {c1}")));
    }
    rewards
        .iter()
        .map(|r| {
            if r.len() < deltas.len() + 1 {
                return Err(TrainerError::ShapeMismatch("reward row shorter than m + 1".into()));
            }
            Ok(r[0]
                + deltas
                    .iter()
                    .enumerate()
                    .map(|(i, d)| (d - r[i + 1]).max(c1).ln())
                    .sum::<f64>())
        })
        .collect()
}

/// Log barrier `(1/t) ln(delta - j_hat)`; `InfeasiblePoint` when `j_hat >= delta`.
pub fn ipo_penalty(j_hat: f64, delta: f64, t: f64) -> Result<f64, TrainerError> {
    if !(t > 0.0) {
        return Err(TrainerError::InvalidConfig(format!("ipo_t must be positive, got {t}")));
    }
    if j_hat >= delta {
        return Err(TrainerError::InfeasiblePoint { j_hat, delta });
    }
    Ok((delta - j_hat).ln() / t)
}

/// Penalty substituted for an infeasible barrier.
pub fn ipo_infeasible_penalty(t: f64) -> f64 {
    -1e3 / t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        let out = normalize_advantages(&[vec![0.2], vec![0.5], vec![0.8]]).unwrap();
        let expect = 0.3 / 0.06f64.sqrt();
        assert!((out[0][0] + expect).abs() < 1e-12);
        assert!(out[1][0].abs() < 1e-12);
        assert!((out[2][0] - expect).abs() < 1e-12);
        assert!((expect - 1.2247).abs() < 1e-4);
        let out = normalize_advantages(&[vec![0.4, 1.0], vec![0.4, 2.0]]).unwrap();
        assert_eq!(out[0][0], 0.0);
        assert_eq!(out[1][0], 0.0);
        assert!(matches!(normalize_advantages(&[vec![1.0]]), Err(TrainerError::TooFewSamples(1))));
    }

    #[test]
    fn log_reward_examples() {
        let r = ctrl_dna_log_rewards(&[vec![0.5, 0.4]], &[0.6], 1e-8).unwrap();
        assert!((r[0] - (0.5 + 0.2f64.ln())).abs() < 1e-12);
        assert!((r[0] + 1.1094).abs() < 1e-4);
        let r = ctrl_dna_log_rewards(&[vec![0.5, 0.9]], &[0.6], 1e-8).unwrap();
        assert!((r[0] - (0.5 + 1e-8f64.ln())).abs() < 1e-12);
        assert!((r[0] + 17.92).abs() < 1e-2);
        let r = ctrl_dna_log_rewards(&[vec![0.7, 0.1]], &[], 1e-8).unwrap();
        assert_eq!(r, vec![0.7]);
    }

    #[test]
    fn ipo_examples() {
        assert_eq!(ipo_penalty(0.0, 1.0, 50.0).unwrap(), 0.0);
        let v = ipo_penalty(0.5, 1.0, 50.0).unwrap();
        assert!((v - 0.5f64.ln() / 50.0).abs() < 1e-15);
        assert!((v + 0.01386).abs() < 1e-5);
        assert!(matches!(ipo_penalty(0.5, 0.5, 50.0), Err(TrainerError::InfeasiblePoint { .. })));
        assert_eq!(ipo_infeasible_penalty(50.0), -20.0);
    }

    proptest! {
        #[test]
        fn normalized_columns_standardized(rows in prop::collection::vec(prop::collection::vec(-5f64..5.0, 3), 2..40)) {
            let out = normalize_advantages(&rows).unwrap();
            let n = rows.len() as f64;
            for i in 0..3 {
                let col: Vec<f64> = out.iter().map(|r| r[i]).collect();
                let m = col.iter().sum::<f64>() / n;
                let s = (col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
                if col.iter().all(|x| *x == 0.0) {
                    continue;
                }
                prop_assert!(m.abs() < 1e-9);
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }
}
