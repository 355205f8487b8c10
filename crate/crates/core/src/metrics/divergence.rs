use alloc::format;

use crate::error::{dim, Error, Result};
use crate::math;

/// `sum p ln(p / q)` in nats. Terms with `p = 0` contribute nothing; `q = 0`
/// where `p > 0` is an error rather than infinity.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(dim("kl support", p.len(), q.len()));
    }
    for (name, d) in [("p", p), ("q", q)] {
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > 1e-6 || d.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidArgument(format!("{name} is not a distribution (sum {s})")));
        }
    }
    let mut kl = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "support violation at {i}: q = 0 where p = {pi}"
                )));
            }
            kl += pi * math::ln(pi / qi);
        }
    }
    Ok(kl.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn identical_is_zero() {
        assert_eq!(kl_divergence(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
    }

    #[test]
    fn point_mass_vs_fair_coin() {
        let kl = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((kl - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn gibbs_inequality((p, q) in (2usize..8).prop_flat_map(|n| (dist(n), dist(n)))) {
            let kl = kl_divergence(&p, &q).unwrap();
            prop_assert!(kl >= 0.0);
            if p.iter().zip(&q).any(|(a, b)| (a - b).abs() > 1e-6) {
                prop_assert!(kl > 0.0);
            }
        }
    }
}
