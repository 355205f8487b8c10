use alloc::format;
use alloc::vec::Vec;

use crate::error::{dim, Error, Result};
use crate::math;
use crate::tensor::Tensor;

/// Smallest probability passed to a logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossEntropy {
    pub loss: f64,
    /// Gradient with respect to the probabilities.
    pub grad: Tensor,
    /// Some true-label probability fell below [`LOG_FLOOR`].
    pub clamped: bool,
}

/// Mean negative log-likelihood of `labels` under row-stochastic `probs`,
/// optionally weighting each sample by `class_weights[label]`.
pub fn cross_entropy(
    probs: &Tensor,
    labels: &[usize],
    class_weights: Option<&[f64]>,
) -> Result<CrossEntropy> {
    let (n, m) = (probs.rows(), probs.cols());
    if labels.len() != n {
        return Err(dim("cross-entropy labels", n, labels.len()));
    }
    if let Some(w) = class_weights {
        if w.len() != m {
            return Err(dim("cross-entropy class weights", m, w.len()));
        }
    }
    let mut grad = Tensor::zeros(&[n, m]);
    let mut loss = 0.0;
    let mut clamped = false;
    for (i, &y) in labels.iter().enumerate() {
        if y >= m {
            return Err(Error::UnknownClass {
                class: y,
                n_classes: m,
            });
        }
        let row = probs.row(i);
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("row {i} of probabilities sums to {s}")));
        }
        let w = class_weights.map_or(1.0, |w| w[y]);
        let p = if row[y] < LOG_FLOOR {
            clamped = true;
            LOG_FLOOR
        } else {
            row[y]
        };
        loss -= w * math::ln(p);
        grad.set(i, y, -w / (p * n as f64));
    }
    Ok(CrossEntropy {
        loss: loss / n.max(1) as f64,
        grad,
        clamped,
    })
}

/// Mean over all entries of the squared difference.
pub fn mean_squared(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(Error::Consistency(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let count = pred.len().max(1) as f64;
    let diff: Vec<f64> = pred.data().iter().zip(target.data()).map(|(p, t)| p - t).collect();
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / count;
    let grad = Tensor::new(
        pred.shape().to_vec(),
        diff.iter().map(|d| 2.0 * d / count).collect(),
    )?;
    Ok((loss, grad))
}

/// Mean binary log-loss of `[n x 1]` probabilities against 0/1 targets.
pub fn binary_cross_entropy(probs: &Tensor, targets: &[f64]) -> Result<(f64, Tensor)> {
    let n = probs.rows();
    if targets.len() != n || probs.cols() != 1 {
        return Err(dim("binary cross-entropy targets", n, targets.len()));
    }
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(&[n, 1]);
    for (i, &t) in targets.iter().enumerate() {
        let p = probs.data()[i].clamp(LOG_FLOOR, 1.0 - LOG_FLOOR);
        loss -= t * math::ln(p) + (1.0 - t) * math::ln(1.0 - p);
        grad.data_mut()[i] = (-t / p + (1.0 - t) / (1.0 - p)) / n as f64;
    }
    Ok((loss / n.max(1) as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn certain_true_label_is_free() {
        let p = Tensor::matrix(1, 2, vec![1.0, 0.0]).unwrap();
        assert_eq!(cross_entropy(&p, &[0], None).unwrap().loss, 0.0);
    }

    #[test]
    fn uniform_four_classes() {
        let p = Tensor::filled(&[3, 4], 0.25);
        let ce = cross_entropy(&p, &[0, 1, 3], None).unwrap();
        assert!((ce.loss - 1.3862943611198906).abs() < 1e-12);
    }

    #[test]
    fn weighted_single_sample() {
        let p = Tensor::matrix(1, 2, vec![0.8, 0.2]).unwrap();
        let ce = cross_entropy(&p, &[0], Some(&[0.3, 1.0])).unwrap();
        assert!((ce.loss - 0.066943065394262).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_is_clamped_and_flagged() {
        let p = Tensor::matrix(1, 2, vec![0.0, 1.0]).unwrap();
        let ce = cross_entropy(&p, &[0], None).unwrap();
        assert!(ce.clamped);
        assert!((ce.loss - 27.631021115928547).abs() < 1e-9);
    }

    #[test]
    fn label_out_of_range() {
        let p = Tensor::filled(&[1, 2], 0.5);
        assert!(matches!(
            cross_entropy(&p, &[2], None),
            Err(Error::UnknownClass { .. })
        ));
    }
}
