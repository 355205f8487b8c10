use alloc::vec;
use alloc::vec::Vec;

use super::config::LabelFallback;
use crate::data::ClassPriors;
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Class `i` with probability proportional to `p_k - p_i`.
    PriorGap,
    /// Uniform over every class except the majority.
    UniformMinority,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelWeights {
    /// Normalized sampling distribution over all classes.
    pub weights: Vec<f64>,
    /// Every gap was zero and the fallback distribution was used.
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelSample {
    pub labels: Vec<usize>,
    pub fallback_used: bool,
}

pub fn label_weights(priors: &ClassPriors, mode: LabelMode, fallback: LabelFallback) -> Result<LabelWeights> {
    let k = priors.n_classes();
    if k < 2 {
        return Err(Error::InvalidArgument("label sampling needs at least two classes".into()));
    }
    let major = priors.majority();
    let p_k = priors.majority_prior();
    let minority = |c: usize| if c == major { 0.0 } else { 1.0 };
    let mut fallback_used = false;
    let mut w: Vec<f64> = match mode {
        LabelMode::PriorGap => (0..k)
            .map(|c| if c == major { 0.0 } else { p_k - priors.priors[c] })
            .collect(),
        LabelMode::UniformMinority => (0..k).map(minority).collect(),
    };
    if w.iter().sum::<f64>() <= 0.0 {
        fallback_used = true;
        w = match fallback {
            LabelFallback::UniformAll => vec![1.0; k],
            LabelFallback::UniformMinority => (0..k).map(minority).collect(),
        };
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    Ok(LabelWeights {
        weights: w,
        fallback_used,
    })
}

/// Draws `n` generator labels; the majority class is never drawn unless the
/// `UniformAll` fallback fires.
pub fn sample_minority_labels(
    priors: &ClassPriors,
    n: usize,
    mode: LabelMode,
    fallback: LabelFallback,
    rng: &mut Rng,
) -> Result<LabelSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("label sample size must be positive".into()));
    }
    let w = label_weights(priors, mode, fallback)?;
    Ok(LabelSample {
        labels: (0..n).map(|_| rng.weighted(&w.weights)).collect(),
        fallback_used: w.fallback_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn priors(p: &[f64]) -> ClassPriors {
        ClassPriors::from_priors(p.to_vec()).unwrap()
    }

    #[test]
    fn prior_gap_weights() {
        let w = label_weights(&priors(&[0.2, 0.3, 0.5]), LabelMode::PriorGap, LabelFallback::UniformMinority)
            .unwrap();
        assert!((w.weights[0] - 0.6).abs() < 1e-12);
        assert!((w.weights[1] - 0.4).abs() < 1e-12);
        assert_eq!(w.weights[2], 0.0);
        assert!(!w.fallback_used);
    }

    #[test]
    fn uniform_minority_four_classes() {
        let w = label_weights(
            &priors(&[0.1, 0.2, 0.3, 0.4]),
            LabelMode::UniformMinority,
            LabelFallback::UniformMinority,
        )
        .unwrap();
        for c in 0..3 {
            assert!((w.weights[c] - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(w.weights[3], 0.0);
    }

    #[test]
    fn majority_never_drawn() {
        let s = sample_minority_labels(
            &priors(&[0.1, 0.7, 0.2]),
            20_000,
            LabelMode::PriorGap,
            LabelFallback::UniformMinority,
            &mut Rng::new(1),
        )
        .unwrap();
        assert!(s.labels.iter().all(|&l| l != 1));
    }

    #[test]
    fn equal_priors_trigger_fallback() {
        let p = priors(&[0.5, 0.5]);
        let s = sample_minority_labels(&p, 10, LabelMode::PriorGap, LabelFallback::UniformMinority, &mut Rng::new(0))
            .unwrap();
        assert!(s.fallback_used);
        // Ties resolve the majority to the last class in ascending order.
        assert!(s.labels.iter().all(|&l| l == 0));
        let all = label_weights(&p, LabelMode::PriorGap, LabelFallback::UniformAll).unwrap();
        assert_eq!(all.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn single_class_rejected() {
        assert!(label_weights(&priors(&[1.0]), LabelMode::PriorGap, LabelFallback::UniformAll).is_err());
    }
}
