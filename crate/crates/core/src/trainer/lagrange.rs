use serde::{Deserialize, Serialize};

use super::TrainerError;

/// Dual variables: one multiplier per constraint label plus the TFBS one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangeState {
    /// `lambdas[i - 1]` weights constraint `i`; each lies in [0, 1].
    pub lambdas: Vec<f64>,
    /// Lies in [0, lambda_max_tfbs].
    pub lambda_tfbs: f64,
    pub eta_lambda: Vec<f64>,
    pub eta_lambda_tfbs: f64,
    pub lambda_max_tfbs: f64,
}

impl LagrangeState {
    pub fn new(
        lambdas: Vec<f64>,
        lambda_tfbs: f64,
        eta_lambda: Vec<f64>,
        eta_lambda_tfbs: f64,
        lambda_max_tfbs: f64,
    ) -> Result<Self, TrainerError> {
        if eta_lambda.len() != lambdas.len() {
            return Err(TrainerError::ShapeMismatch(format!(
                "{} multipliers but {} learning rates",
                lambdas.len(),
                eta_lambda.len()
            )));
        }
        if !(0.0..=1.0).contains(&lambda_max_tfbs) {
            return Err(TrainerError::InvalidConfig(format!("lambda_max must lie in [0,1], got {lambda_max_tfbs}")));
        }
        if lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) || !(0.0..=lambda_max_tfbs).contains(&lambda_tfbs) {
            return Err(TrainerError::InvalidConfig("initial multipliers out of range".into()));
        }
        if eta_lambda.iter().chain([&eta_lambda_tfbs]).any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(TrainerError::InvalidConfig("multiplier learning rates must be non-negative".into()));
        }
        Ok(LagrangeState {
            lambdas,
            lambda_tfbs,
            eta_lambda,
            eta_lambda_tfbs,
            lambda_max_tfbs,
        })
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    /// Main-objective coefficient `min(1, m - sum lambda)`, taken as 1 when
    /// there are no constraints.
    pub fn alpha0(&self) -> f64 {
        let m = self.lambdas.len();
        if m == 0 {
            return 1.0;
        }
        (m as f64 - self.lambdas.iter().sum::<f64>()).min(1.0)
    }
}

/// Lagrangian advantage per row of normalized advantages `[A_0, .., A_m, A_TFBS?]`:
/// `alpha0 A_0 - sum lambda_i A_i + lambda_TFBS A_TFBS`. With `literal` the
/// constraint terms are added instead of subtracted.
pub fn mixed_advantage(adv: &[Vec<f64>], lag: &LagrangeState, literal: bool) -> Result<Vec<f64>, TrainerError> {
    let m = lag.m();
    let alpha0 = lag.alpha0();
    let sign = if literal { 1.0 } else { -1.0 };
    adv.iter()
        .map(|row| {
            if row.len() != m + 1 && row.len() != m + 2 {
                return Err(TrainerError::ShapeMismatch(format!(
                    "advantage row has {} entries, expected {} or {}",
                    row.len(),
                    m + 1,
                    m + 2
                )));
            }
            let mut a = alpha0 * row[0];
            for (i, l) in lag.lambdas.iter().enumerate() {
                a += sign * l * row[i + 1];
            }
            if row.len() == m + 2 {
                a += lag.lambda_tfbs * row[m + 1];
            }
            Ok(a)
        })
        .collect()
}

/// Projected dual step over the rows `[R_0, .., R_m, R_TFBS?]`:
/// `lambda_i += eta_i * mean(R_i - delta_i)` clipped to [0, 1], and
/// `lambda_TFBS += eta * mean(delta_TFBS - R_TFBS)` clipped to [0, lambda_max].
pub fn update_multipliers(
    lag: &LagrangeState,
    rewards: &[Vec<f64>],
    deltas: &[f64],
    delta_tfbs: Option<f64>,
) -> Result<LagrangeState, TrainerError> {
    let m = lag.m();
    if deltas.len() != m {
        return Err(TrainerError::ShapeMismatch(format!("{m} multipliers but {} thresholds", deltas.len())));
    }
    if rewards.is_empty() {
        return Err(TrainerError::TooFewSamples(0));
    }
    let width = m + 1 + usize::from(delta_tfbs.is_some());
    if rewards.iter().any(|r| r.len() != width) {
        return Err(TrainerError::ShapeMismatch(format!("reward rows must have {width} entries")));
    }
    let n = rewards.len() as f64;
    let mut next = lag.clone();
    for i in 0..m {
        let g = rewards.iter().map(|r| r[i + 1] - deltas[i]).sum::<f64>() / n;
        next.lambdas[i] = (lag.lambdas[i] + lag.eta_lambda[i] * g).clamp(0.0, 1.0);
    }
    if let Some(dt) = delta_tfbs {
        let g = rewards.iter().map(|r| dt - r[m + 1]).sum::<f64>() / n;
        next.lambda_tfbs = (lag.lambda_tfbs + lag.eta_lambda_tfbs * g).clamp(0.0, lag.lambda_max_tfbs);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag(l: &[f64]) -> LagrangeState {
        LagrangeState::new(l.to_vec(), 0.0, vec![0.1; l.len()], 0.1, 0.1).unwrap()
    }

    #[test]
    fn mixed_examples() {
        let a = vec![vec![0.3, -0.7, 1.1]];
        assert_eq!(mixed_advantage(&a, &lag(&[0.0, 0.0]), false).unwrap(), vec![0.3]);
        let l = lag(&[1.0, 1.0]);
        assert_eq!(l.alpha0(), 0.0);
        assert!((mixed_advantage(&a, &l, false).unwrap()[0] - (0.7 - 1.1)).abs() < 1e-15);
        let a = vec![vec![1.0, -1.0, 0.0]];
        let l = lag(&[0.5, 0.25]);
        assert_eq!(l.alpha0(), 1.0);
        assert_eq!(mixed_advantage(&a, &l, false).unwrap(), vec![1.5]);
        assert_eq!(mixed_advantage(&a, &l, true).unwrap(), vec![0.5]);
        assert!(mixed_advantage(&[vec![1.0]], &l, false).is_err());
    }

    #[test]
    fn tfbs_term_is_added() {
        let mut l = lag(&[0.5]);
        l.lambda_tfbs = 0.1;
        let out = mixed_advantage(&[vec![1.0, 2.0, 3.0]], &l, false).unwrap();
        assert!((out[0] - (0.5 - 1.0 + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn no_constraints_keeps_target() {
        let l = lag(&[]);
        assert_eq!(l.alpha0(), 1.0);
        assert_eq!(mixed_advantage(&[vec![0.4]], &l, false).unwrap(), vec![0.4]);
    }

    #[test]
    fn dual_examples() {
        let l = LagrangeState::new(vec![0.2], 0.0, vec![0.1], 0.1, 0.1).unwrap();
        let up = update_multipliers(&l, &[vec![0.0, 0.7]], &[0.5], None).unwrap();
        assert!((up.lambdas[0] - 0.22).abs() < 1e-12);
        let down = update_multipliers(&l, &[vec![0.0, 0.3]], &[0.5], None).unwrap();
        assert!((down.lambdas[0] - 0.18).abs() < 1e-12);
        let top = LagrangeState::new(vec![1.0], 0.0, vec![0.1], 0.1, 0.1).unwrap();
        assert_eq!(update_multipliers(&top, &[vec![0.0, 0.9]], &[0.5], None).unwrap().lambdas[0], 1.0);
    }

    #[test]
    fn tfbs_multiplier_capped() {
        let mut l = LagrangeState::new(vec![], 0.0, vec![], 0.5, 0.1).unwrap();
        for _ in 0..10 {
            l = update_multipliers(&l, &[vec![0.9, -1.0]], &[], Some(1.0)).unwrap();
            assert!(l.lambda_tfbs <= 0.1);
        }
        assert_eq!(l.lambda_tfbs, 0.1);
        l = update_multipliers(&l, &[vec![0.9, 1.0]], &[], Some(1.0)).unwrap();
        assert_eq!(l.lambda_tfbs, 0.1);
    }

    #[test]
    fn alpha0_grid() {
        for m in 1..=3usize {
            let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
            for idx in 0..grid.len().pow(m as u32) {
                let l: Vec<f64> = (0..m).map(|i| grid[(idx / 5usize.pow(i as u32)) % 5]).collect();
                let s: f64 = l.iter().sum();
                let a = lag(&l).alpha0();
                assert_eq!(a, (m as f64 - s).min(1.0));
                assert!((0.0..=1.0).contains(&a));
                if s <= m as f64 - 1.0 {
                    assert_eq!(a, 1.0);
                }
            }
        }
    }
}
