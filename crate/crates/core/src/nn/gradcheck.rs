use alloc::vec::Vec;

use crate::nn::{backward, cross_entropy, forward, mean_squared, Activation, Network};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Scalar loss placed on top of a network for gradient checking.
#[derive(Debug, Clone)]
pub enum LossKind {
    MeanSquare(Tensor),
    /// Requires a softmax output.
    CrossEntropy(Vec<usize>),
}

const STEP: f64 = 1e-5;
/// Denominator floor so that vanishing gradients do not inflate the ratio.
const ABS_FLOOR: f64 = 1e-6;

fn loss_and_grad(net: &Network, batch: &Tensor, kind: &LossKind) -> Option<(f64, Tensor)> {
    let out = forward(net, batch).ok()?.into_output();
    match kind {
        LossKind::MeanSquare(t) => mean_squared(&out, t).ok(),
        LossKind::CrossEntropy(labels) => {
            let ce = cross_entropy(&out, labels, None).ok()?;
            Some((ce.loss, ce.grad))
        }
    }
}

/// Largest relative error between [`backward`] and central finite
/// differences over every parameter. Returns infinity when the loss cannot
/// be evaluated at all.
pub fn grad_check(net: &Network, batch: &Tensor, loss: &LossKind) -> f64 {
    if net.param_count() == 0 {
        return 0.0;
    }
    let Some((_, out_grad)) = loss_and_grad(net, batch, loss) else {
        return f64::INFINITY;
    };
    let trace = match forward(net, batch) {
        Ok(t) => t,
        Err(_) => return f64::INFINITY,
    };
    let analytic: Vec<f64> = match backward(net, &trace, &out_grad) {
        Ok(b) => b.params.values().copied().collect(),
        Err(_) => return f64::INFINITY,
    };
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (p, &a) in analytic.iter().enumerate() {
        let orig = *probe.params_mut().nth(p).expect("index in range");
        *probe.params_mut().nth(p).unwrap() = orig + STEP;
        let up = loss_and_grad(&probe, batch, loss).map_or(f64::NAN, |l| l.0);
        *probe.params_mut().nth(p).unwrap() = orig - STEP;
        let down = loss_and_grad(&probe, batch, loss).map_or(f64::NAN, |l| l.0);
        *probe.params_mut().nth(p).unwrap() = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(ABS_FLOOR);
        if err.is_nan() {
            return f64::INFINITY;
        }
        worst = worst.max(err);
    }
    worst
}

/// One network/loss pairing of [`grad_check_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCase {
    pub seed: u64,
    pub hidden: Activation,
    pub output: Activation,
    pub cross_entropy: bool,
    pub error: f64,
}

/// Every hidden activation against every output head (mean-square on the
/// pointwise heads, cross-entropy on softmax), one small net per seed.
/// Biases are randomized so no unit sits on a relu kink.
pub fn grad_check_suite(seeds: u64) -> Vec<GradCase> {
    let hidden = [Activation::Linear, Activation::Relu, Activation::Tanh, Activation::Sigmoid];
    let heads = [Activation::Linear, Activation::Tanh, Activation::Sigmoid, Activation::Softmax];
    let mut cases = Vec::new();
    for seed in 0..seeds {
        let mut rng = Rng::new(seed);
        for &h in &hidden {
            for &o in &heads {
                let mut net = Network::mlp(&[3, 5, 4, 3], h, o, &mut rng);
                for l in &mut net.layers {
                    l.bias.data_mut().iter_mut().for_each(|b| *b = 0.5 * rng.normal());
                }
                let x = Tensor::matrix(4, 3, rng.normal_vec(12)).expect("shape");
                let ce = o == Activation::Softmax;
                let loss = if ce {
                    LossKind::CrossEntropy((0..4).map(|_| rng.index(3)).collect())
                } else {
                    LossKind::MeanSquare(Tensor::matrix(4, 3, rng.normal_vec(12)).expect("shape"))
                };
                let error = grad_check(&net, &x, &loss);
                cases.push(GradCase { seed, hidden: h, output: o, cross_entropy: ce, error });
            }
        }
    }
    cases
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_mean_square() {
        let mut rng = Rng::new(11);
        let net = Network::mlp(&[3, 2], Activation::Linear, Activation::Linear, &mut rng);
        let x = Tensor::matrix(4, 3, rng.normal_vec(12)).unwrap();
        let t = Tensor::matrix(4, 2, rng.normal_vec(8)).unwrap();
        assert!(grad_check(&net, &x, &LossKind::MeanSquare(t)) < 1e-6);
    }

    #[test]
    fn softmax_cross_entropy() {
        let mut rng = Rng::new(12);
        let net = Network::mlp(&[3, 6, 4], Activation::Tanh, Activation::Softmax, &mut rng);
        let x = Tensor::matrix(4, 3, rng.normal_vec(12)).unwrap();
        assert!(grad_check(&net, &x, &LossKind::CrossEntropy(alloc::vec![0, 3, 2, 1])) < 1e-4);
    }

    #[test]
    fn suite_covers_every_pairing() {
        let cases = grad_check_suite(20);
        assert_eq!(cases.len(), 20 * 16);
        let worst = cases.iter().map(|c| c.error).fold(0.0, f64::max);
        let bad: Vec<_> = cases.iter().filter(|c| c.error >= 1e-4).collect();
        assert!(worst < 1e-4, "{bad:?}");
    }

    #[test]
    fn zero_parameter_net() {
        let x = Tensor::matrix(2, 2, alloc::vec![1.0; 4]).unwrap();
        assert_eq!(grad_check(&Network::default(), &x, &LossKind::MeanSquare(x.clone())), 0.0);
    }

    #[test]
    fn every_activation_over_twenty_seeds() {
        let acts = [
            Activation::Linear,
            Activation::Relu,
            Activation::Tanh,
            Activation::Sigmoid,
        ];
        for seed in 0..20u64 {
            let mut rng = Rng::new(seed);
            for &h in &acts {
                let net = Network::mlp(&[3, 5, 2], h, Activation::Linear, &mut rng);
                let x = Tensor::matrix(4, 3, rng.normal_vec(12)).unwrap();
                let t = Tensor::matrix(4, 2, rng.normal_vec(8)).unwrap();
                let e = grad_check(&net, &x, &LossKind::MeanSquare(t));
                assert!(e < 1e-4, "seed {seed} {h:?}: {e}");
            }
        }
    }
}
