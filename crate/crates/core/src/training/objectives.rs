use alloc::vec;
use alloc::vec::Vec;

use crate::data::ClassPriors;
use crate::error::{dim, Error, Result};
use crate::math;
use crate::models::{check_classifier, check_critic, condition};
use crate::nn::{backward, forward, input_gradient, input_gradient_vjp, Gradients, Network, LOG_FLOOR};
use crate::rng::Rng;
use crate::tensor::Tensor;

fn check_labels(labels: &[usize], n_classes: usize) -> Result<()> {
    match labels.iter().find(|&&l| l >= n_classes) {
        Some(&class) => Err(Error::UnknownClass { class, n_classes }),
        None => Ok(()),
    }
}

/// Classifier objective evaluated on given probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierValue {
    pub value: f64,
    /// `d value / d probs`.
    pub grad: Tensor,
    /// A log argument fell below [`LOG_FLOOR`] and was clamped.
    pub clamped: bool,
}

/// Batch mean of `p_i ln C(x|i) + sum_{j != i} (p_k - p_j) ln(1 - C(x|j))`
/// for samples of class `i`.
pub fn classifier_value(probs: &Tensor, labels: &[usize], priors: &ClassPriors) -> Result<ClassifierValue> {
    let (n, k) = (probs.rows(), probs.cols());
    if labels.len() != n {
        return Err(dim("classifier labels", n, labels.len()));
    }
    if k != priors.n_classes() {
        return Err(dim("classifier classes", priors.n_classes(), k));
    }
    check_labels(labels, k)?;
    let p_k = priors.majority_prior();
    let inv_n = 1.0 / n.max(1) as f64;
    let mut grad = Tensor::zeros(&[n, k]);
    let mut value = 0.0;
    let mut clamped = false;
    for (r, &i) in labels.iter().enumerate() {
        let row = probs.row(r);
        for j in 0..k {
            let (weight, arg, sign) = if j == i {
                (priors.priors[i], row[j], 1.0)
            } else {
                (p_k - priors.priors[j], 1.0 - row[j], -1.0)
            };
            if weight == 0.0 {
                continue;
            }
            if arg < LOG_FLOOR {
                clamped = true;
                value += weight * math::ln(LOG_FLOOR);
            } else {
                value += weight * math::ln(arg);
                grad.set(r, j, sign * weight / arg * inv_n);
            }
        }
    }
    Ok(ClassifierValue {
        value: value * inv_n,
        grad,
        clamped,
    })
}

/// Classifier objective with gradients for the network and its input.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierObjective {
    pub value: f64,
    pub clamped: bool,
    pub params: Gradients,
    /// `d value / d batch`, used when the batch came from the generator.
    pub input: Tensor,
}

pub fn classifier_objective(
    c_net: &Network,
    batch: &Tensor,
    labels: &[usize],
    priors: &ClassPriors,
) -> Result<ClassifierObjective> {
    check_classifier(c_net)?;
    let trace = forward(c_net, batch)?;
    let v = classifier_value(trace.output(), labels, priors)?;
    let back = backward(c_net, &trace, &v.grad)?;
    Ok(ClassifierObjective {
        value: v.value,
        clamped: v.clamped,
        params: back.params,
        input: back.input,
    })
}

/// Critic objective evaluated on given scores.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticValue {
    pub value: f64,
    pub grad_real: Tensor,
    pub grad_fake: Tensor,
}

fn class_counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    labels.iter().for_each(|&l| c[l] += 1);
    c
}

/// `sum_i [p_i mean_{real of i} D - (p_k - p_i) mean_{fake of i} D]` over
/// the classes present in each batch.
pub fn critic_value(
    real_scores: &Tensor,
    real_labels: &[usize],
    fake_scores: &Tensor,
    fake_labels: &[usize],
    priors: &ClassPriors,
) -> Result<CriticValue> {
    let k = priors.n_classes();
    if real_scores.rows() != real_labels.len() {
        return Err(dim("critic real labels", real_scores.rows(), real_labels.len()));
    }
    if fake_scores.rows() != fake_labels.len() {
        return Err(dim("critic fake labels", fake_scores.rows(), fake_labels.len()));
    }
    check_labels(real_labels, k)?;
    check_labels(fake_labels, k)?;
    let p_k = priors.majority_prior();
    let real_n = class_counts(real_labels, k);
    let fake_n = class_counts(fake_labels, k);
    let mut value = 0.0;
    let mut grad_real = Tensor::zeros(&[real_labels.len(), 1]);
    let mut grad_fake = Tensor::zeros(&[fake_labels.len(), 1]);
    for (r, &i) in real_labels.iter().enumerate() {
        let w = priors.priors[i] / real_n[i] as f64;
        value += w * real_scores.get(r, 0);
        grad_real.set(r, 0, w);
    }
    for (r, &i) in fake_labels.iter().enumerate() {
        let w = -(p_k - priors.priors[i]) / fake_n[i] as f64;
        value += w * fake_scores.get(r, 0);
        grad_fake.set(r, 0, w);
    }
    Ok(CriticValue {
        value,
        grad_real,
        grad_fake,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticObjective {
    pub value: f64,
    pub params: Gradients,
    /// `d value / d fake`, feature columns only.
    pub fake_input: Tensor,
}

/// Critic objective for a label-conditioned critic whose input is the
/// feature row followed by the one-hot class.
pub fn critic_objective(
    d_net: &Network,
    real: &Tensor,
    real_labels: &[usize],
    fake: &Tensor,
    fake_labels: &[usize],
    priors: &ClassPriors,
) -> Result<CriticObjective> {
    check_critic(d_net)?;
    let k = priors.n_classes();
    check_labels(real_labels, k)?;
    check_labels(fake_labels, k)?;
    let real_trace = forward(d_net, &condition(real, real_labels, k)?)?;
    let fake_trace = forward(d_net, &condition(fake, fake_labels, k)?)?;
    let v = critic_value(real_trace.output(), real_labels, fake_trace.output(), fake_labels, priors)?;
    let real_back = backward(d_net, &real_trace, &v.grad_real)?;
    let fake_back = backward(d_net, &fake_trace, &v.grad_fake)?;
    let mut params = real_back.params;
    params.add(&fake_back.params)?;
    Ok(CriticObjective {
        value: v.value,
        params,
        fake_input: fake_back.input.take_cols(fake.cols()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientPenalty {
    /// Mean of `(||grad_x D(x_hat)|| - 1)^2`, before any weighting.
    pub value: f64,
    pub params: Gradients,
}

/// Gradient penalty on random interpolates of paired real and fake rows.
///
/// With `condition = Some((labels, k))` the critic input carries the one-hot
/// label, which is held fixed; only the feature part of the input gradient
/// enters the norm.
pub fn gradient_penalty(
    d_net: &Network,
    real: &Tensor,
    fake: &Tensor,
    condition_on: Option<(&[usize], usize)>,
    rng: &mut Rng,
) -> Result<GradientPenalty> {
    check_critic(d_net)?;
    if real.shape() != fake.shape() {
        return Err(Error::Consistency("real and fake batches differ in shape".into()));
    }
    let (n, d) = (real.rows(), real.cols());
    let mut interp = Tensor::zeros(&[n, d]);
    for i in 0..n {
        let u = rng.uniform();
        for ((o, &r), &f) in interp.row_mut(i).iter_mut().zip(real.row(i)).zip(fake.row(i)) {
            *o = u * r + (1.0 - u) * f;
        }
    }
    let input = match condition_on {
        Some((labels, k)) => {
            check_labels(labels, k)?;
            condition(&interp, labels, k)?
        }
        None => interp,
    };
    let ig = input_gradient(d_net, &input, &Tensor::filled(&[n, 1], 1.0))?;
    let width = input.cols();
    let mut cotangent = Tensor::zeros(&[n, width]);
    let mut value = 0.0;
    for i in 0..n {
        let g = &ig.gradient.row(i)[..d];
        let norm = math::norm(g);
        value += math::powi(norm - 1.0, 2);
        if norm > 0.0 {
            let s = 2.0 * (norm - 1.0) / (norm * n as f64);
            for (c, &gv) in cotangent.row_mut(i)[..d].iter_mut().zip(g) {
                *c = s * gv;
            }
        }
    }
    let params = input_gradient_vjp(d_net, &ig, &cotangent)?;
    Ok(GradientPenalty {
        value: value / n.max(1) as f64,
        params,
    })
}
