use serde::{Deserialize, Serialize};

use super::MotifError;

/// Benjamini-Hochberg step-up q-values, returned in input order.
pub fn bh_qvalues(p_values: &[f64]) -> Result<Vec<f64>, MotifError> {
    if p_values.is_empty() {
        return Err(MotifError::EmptyInput);
    }
    if let Some(&bad) = p_values.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(MotifError::InvalidPValue(bad));
    }
    let n = p_values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut q = vec![0.0; n];
    let mut running = f64::INFINITY;
    for rank in (0..n).rev() {
        let i = order[rank];
        let candidate = if rank + 1 == n {
            p_values[i]
        } else {
            p_values[i] * n as f64 / (rank + 1) as f64
        };
        running = running.min(candidate).min(1.0);
        // guards against x * n / n rounding below x
        q[i] = running.max(p_values[i]);
    }
    Ok(q)
}

/// Pearson correlation plus a flag for the zero-variance convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Set when either input is constant; `r` is then 0.
    pub zero_variance: bool,
}

/// Pearson's r. A constant input yields `r = 0` with `zero_variance` set.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Correlation, MotifError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(MotifError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(Correlation { r: 0.0, zero_variance: true });
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Ok(Correlation {
        r: r.clamp(-1.0, 1.0),
        zero_variance: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn bh_examples() {
        assert!(close(&bh_qvalues(&[0.01]).unwrap(), &[0.01]));
        assert!(close(&bh_qvalues(&[0.01, 0.04]).unwrap(), &[0.02, 0.04]));
        assert!(close(&bh_qvalues(&[0.5, 0.5, 0.5]).unwrap(), &[0.5, 0.5, 0.5]));
        assert!(close(&bh_qvalues(&[0.04, 0.01]).unwrap(), &[0.04, 0.02]));
        assert_eq!(bh_qvalues(&[]), Err(MotifError::EmptyInput));
        assert_eq!(bh_qvalues(&[0.0]), Err(MotifError::InvalidPValue(0.0)));
    }

    #[test]
    fn pearson_examples() {
        let r = |a: &[f64], b: &[f64]| pearson(a, b).unwrap().r;
        assert!((r(&[1., 2., 3.], &[1., 2., 3.]) - 1.0).abs() < 1e-9);
        assert!((r(&[1., 2., 3.], &[3., 2., 1.]) + 1.0).abs() < 1e-9);
        assert!((r(&[1., 2., 3.], &[1., 2., 2.]) - 3f64.sqrt() / 2.0).abs() < 1e-9);
        let c = pearson(&[1., 1., 1.], &[1., 2., 3.]).unwrap();
        assert_eq!(c, Correlation { r: 0.0, zero_variance: true });
        assert!(pearson(&[1.], &[1.]).is_err());
        assert!(pearson(&[1., 2.], &[1., 2., 3.]).is_err());
    }

    proptest! {
        #[test]
        fn bh_bounds(p in prop::collection::vec(1e-9f64..=1.0, 1..40)) {
            let q = bh_qvalues(&p).unwrap();
            for (pi, qi) in p.iter().zip(&q) {
                prop_assert!(qi >= pi && *qi <= 1.0);
            }
            let pmax = p.iter().copied().fold(0.0, f64::max);
            let qmax = q.iter().copied().fold(0.0, f64::max);
            prop_assert_eq!(pmax, qmax);
        }

        #[test]
        fn pearson_properties(
            pairs in prop::collection::vec((-100f64..100.0, -100f64..100.0), 2..30),
            c in 0.01f64..50.0,
            d in -50f64..50.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let ab = pearson(&a, &b).unwrap();
            let ba = pearson(&b, &a).unwrap();
            prop_assert!((ab.r - ba.r).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab.r));
            let scaled: Vec<f64> = b.iter().map(|x| c * x + d).collect();
            let s = pearson(&a, &scaled).unwrap();
            if !ab.zero_variance && !s.zero_variance {
                prop_assert!((s.r - ab.r).abs() < 1e-9);
            }
        }
    }
}
