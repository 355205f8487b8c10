use alloc::format;

use crate::error::{Error, Result};
use crate::math;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure {
    pub sum: f64,
    pub mean: f64,
}

/// The four confidence-based measures over a batch of predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    pub least_confidence: Measure,
    pub margin_of_confidence: Measure,
    pub ratio_of_confidence: Measure,
    pub entropy: Measure,
    pub n: usize,
    pub m: usize,
}

/// `[least confidence, margin, ratio, entropy]` of one probability row,
/// each normalized to `[0, 1]`.
pub fn sample_uncertainty(row: &[f64]) -> [f64; 4] {
    let m = row.len() as f64;
    let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in row {
        if p > top {
            second = top;
            top = p;
        } else if p > second {
            second = p;
        }
    }
    let least = m * (1.0 - top) / (m - 1.0);
    let margin = 1.0 - (top - second);
    let ratio = second / top;
    let h: f64 = row
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * math::log2(p))
        .sum();
    [least, margin, ratio, h / math::log2(m)]
}

pub fn uncertainty_metrics(probs: &Tensor) -> Result<UncertaintyReport> {
    let (n, m) = (probs.rows(), probs.cols());
    if m < 2 {
        return Err(Error::InvalidArgument("uncertainty needs at least two classes".into()));
    }
    let mut sums = [0.0; 4];
    for i in 0..n {
        let row = probs.row(i);
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-6 || row.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument(format!("row {i} is not a distribution (sum {s})")));
        }
        for (acc, v) in sums.iter_mut().zip(sample_uncertainty(row)) {
            *acc += v;
        }
    }
    let measure = |s: f64| Measure {
        sum: s,
        mean: if n > 0 { s / n as f64 } else { 0.0 },
    };
    Ok(UncertaintyReport {
        least_confidence: measure(sums[0]),
        margin_of_confidence: measure(sums[1]),
        ratio_of_confidence: measure(sums[2]),
        entropy: measure(sums[3]),
        n,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn one(row: Vec<f64>) -> UncertaintyReport {
        let m = row.len();
        uncertainty_metrics(&Tensor::matrix(1, m, row).unwrap()).unwrap()
    }

    fn means(r: &UncertaintyReport) -> [f64; 4] {
        [
            r.least_confidence.mean,
            r.margin_of_confidence.mean,
            r.ratio_of_confidence.mean,
            r.entropy.mean,
        ]
    }

    #[test]
    fn full_confidence_is_zero() {
        assert_eq!(means(&one(vec![1.0, 0.0])), [0.0; 4]);
    }

    #[test]
    fn uniform_is_one() {
        for v in means(&one(vec![0.25; 4])) {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn three_way_hand_values() {
        let [lc, margin, ratio, h] = means(&one(vec![0.5, 0.3, 0.2]));
        assert!((lc - 0.75).abs() < 1e-15);
        assert!((margin - 0.8).abs() < 1e-15);
        assert!((ratio - 0.6).abs() < 1e-15);
        // -(0.5 log2 0.5 + 0.3 log2 0.3 + 0.2 log2 0.2) / log2 3
        assert!((h - 0.9372305632161295).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        assert!(uncertainty_metrics(&Tensor::filled(&[1, 1], 1.0)).is_err());
        assert!(uncertainty_metrics(&Tensor::filled(&[1, 2], 0.6)).is_err());
    }

    fn simplex_row() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.001f64..1.0, 2..7).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn measures_in_unit_interval_and_sum_consistent(rows in proptest::collection::vec(simplex_row(), 1..5)) {
            let m = rows[0].len();
            let rows: Vec<Vec<f64>> = rows.into_iter().filter(|r| r.len() == m).collect();
            let t = Tensor::from_rows(&rows).unwrap();
            let r = uncertainty_metrics(&t).unwrap();
            for meas in [r.least_confidence, r.margin_of_confidence, r.ratio_of_confidence, r.entropy] {
                prop_assert!(meas.mean >= -1e-12 && meas.mean <= 1.0 + 1e-12);
                prop_assert!((meas.sum - meas.mean * r.n as f64).abs() < 1e-9);
            }
        }

        #[test]
        fn entropy_permutation_invariant(row in simplex_row()) {
            let mut rev = row.clone();
            rev.reverse();
            let a = sample_uncertainty(&row);
            let b = sample_uncertainty(&rev);
            for k in 0..4 {
                prop_assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }
}
