
use crate::error::{Error, Result};
use crate::math;
use crate::nn::{Gradients, Network};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    /// lr 2e-4 with beta1 0.6; beta2 and epsilon are the usual defaults.
    fn default() -> Self {
        Self {
            lr: 2e-4,
            beta1: 0.6,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Descend,
    /// Maximize the objective; the gradient is negated.
    Ascend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub step_count: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(net: &Network, config: AdamConfig) -> Self {
        Self {
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
            step_count: 0,
            config,
        }
    }
}

/// One bias-corrected Adam update. Nothing is modified if validation fails.
pub fn adam_step(
    net: &mut Network,
    grads: &Gradients,
    state: &mut AdamState,
    direction: Direction,
) -> Result<()> {
    grads.check_against(net)?;
    state.first_moment.check_against(net)?;
    state.second_moment.check_against(net)?;
    for (i, g) in grads.layers.iter().enumerate() {
        if !g.weight.is_finite() || !g.bias.is_finite() {
            return Err(Error::NonFinite {
                what: "gradient".into(),
                layer: Some(i),
            });
        }
    }
    let AdamConfig {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    state.step_count += 1;
    let t = state.step_count as i32;
    let c1 = 1.0 - math::powi(beta1, t);
    let c2 = 1.0 - math::powi(beta2, t);
    let sign = match direction {
        Direction::Descend => 1.0,
        Direction::Ascend => -1.0,
    };
    for (((layer, g), m), v) in net
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.first_moment.layers)
        .zip(&mut state.second_moment.layers)
    {
        let pairs = [
            (layer.weight.data_mut(), g.weight.data(), m.weight.data_mut(), v.weight.data_mut()),
            (layer.bias.data_mut(), g.bias.data(), m.bias.data_mut(), v.bias.data_mut()),
        ];
        for (p, g, m, v) in pairs {
            for i in 0..p.len() {
                let gi = sign * g[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (math::sqrt(v_hat) + epsilon);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Layer};
    use crate::tensor::Tensor;
    use alloc::vec;

    fn scalar_net(w: f64) -> Network {
        Network::from_layers(vec![Layer {
            weight: Tensor::new(vec![1, 1], vec![w]).unwrap(),
            bias: Tensor::zeros(&[1]),
            activation: Activation::Linear,
        }])
        .unwrap()
    }

    fn grad_of(net: &Network, g: f64) -> Gradients {
        let mut grads = Gradients::zeros_like(net);
        grads.layers[0].weight.data_mut()[0] = g;
        grads
    }

    #[test]
    fn first_step_hand_trace() {
        let mut net = scalar_net(1.0);
        let mut st = AdamState::new(&net, AdamConfig::default());
        let g = grad_of(&net, 1.0);
        adam_step(&mut net, &g, &mut st, Direction::Descend).unwrap();
        assert!((st.first_moment.layers[0].weight.data()[0] - 0.4).abs() < 1e-15);
        assert!((st.second_moment.layers[0].weight.data()[0] - 0.001).abs() < 1e-15);
        let w = net.layers[0].weight.data()[0];
        assert!((w - (1.0 - 2e-4 / (1.0 + 1e-8))).abs() < 1e-15);
        assert!((w - 0.9998).abs() < 1e-9);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut net = scalar_net(0.37);
        let before = net.clone();
        let mut st = AdamState::new(&net, AdamConfig::default());
        for _ in 0..10 {
            let g = grad_of(&net, 0.0);
            adam_step(&mut net, &g, &mut st, Direction::Descend).unwrap();
        }
        assert_eq!(net, before);
        assert_eq!(st.step_count, 10);
    }

    #[test]
    fn ascend_equals_descend_of_negated() {
        let mut a = scalar_net(0.5);
        let mut b = scalar_net(0.5);
        let mut sa = AdamState::new(&a, AdamConfig::default());
        let mut sb = AdamState::new(&b, AdamConfig::default());
        for _ in 0..5 {
            let g = grad_of(&a, 1.0);
            adam_step(&mut a, &g, &mut sa, Direction::Ascend).unwrap();
            let g = grad_of(&b, -1.0);
            adam_step(&mut b, &g, &mut sb, Direction::Descend).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_gradient_names_layer() {
        let mut net = scalar_net(1.0);
        let mut st = AdamState::new(&net, AdamConfig::default());
        let g = grad_of(&net, f64::NAN);
        let err = adam_step(&mut net, &g, &mut st, Direction::Descend)
            .unwrap_err();
        assert_eq!(
            err,
            Error::NonFinite {
                what: "gradient".into(),
                layer: Some(0)
            }
        );
        assert_eq!(st.step_count, 0);
    }

    #[test]
    fn shape_mismatch() {
        let mut net = scalar_net(1.0);
        let other = Network::default();
        let mut st = AdamState::new(&net, AdamConfig::default());
        assert!(adam_step(&mut net, &Gradients::zeros_like(&other), &mut st, Direction::Descend).is_err());
    }
}
