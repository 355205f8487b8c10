use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::nn::AdamConfig;

/// What the label sampler does when every prior gap is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFallback {
    UniformAll,
    UniformMinority,
}

/// How the critic is kept (approximately) 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lipschitz {
    /// Penalty weighted by `gp_lambda`.
    GradientPenalty,
    /// Clamp every critic parameter to `[-c, c]` after each step.
    Clip(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    /// Classifier/critic/generator rounds per outer iteration.
    pub j_steps: usize,
    pub batch_size: usize,
    pub latent_dim: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub gp_lambda: f64,
    pub lipschitz: Lipschitz,
    /// Weight of the classifier term in the generator loss.
    pub lambda_c: f64,
    /// Weight of the critic term in the generator loss.
    pub lambda_d: f64,
    pub bank_size: usize,
    pub seed: u64,
    pub label_fallback: LabelFallback,
    /// Autoencoder pretraining epochs; 0 skips the initialisation.
    pub ae_epochs: usize,
    pub ae_lr: f64,
    /// Std of Gaussian jitter added to real feature batches; 0 disables it.
    pub jitter: f64,
    /// Hidden widths of `F`; `None` makes `F` the identity.
    pub extractor_hidden: Option<Vec<usize>>,
    /// Output width of `F` when it is a network.
    pub feature_dim: usize,
    pub classifier_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// Generator trunk widths; the last one is the pseudo-space width.
    pub generator_hidden: Vec<usize>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            j_steps: 3,
            batch_size: 64,
            latent_dim: 8,
            lr: 2e-4,
            beta1: 0.6,
            beta2: 0.999,
            epsilon: 1e-8,
            gp_lambda: 10.0,
            lipschitz: Lipschitz::GradientPenalty,
            lambda_c: 1.0,
            lambda_d: 1.0,
            bank_size: 64,
            seed: 0,
            label_fallback: LabelFallback::UniformMinority,
            ae_epochs: 20,
            ae_lr: 1e-3,
            jitter: 0.0,
            extractor_hidden: None,
            feature_dim: 16,
            classifier_hidden: vec![32],
            critic_hidden: vec![32, 32],
            generator_hidden: vec![32, 32],
        }
    }
}

impl TrainingConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if self.j_steps < 1 {
            return bad("j_steps must be at least 1");
        }
        if self.batch_size < 2 {
            return bad("batch_size must be at least 2");
        }
        if [self.lambda_c, self.lambda_d, self.gp_lambda, self.jitter]
            .iter()
            .any(|&v| !(v >= 0.0) || !v.is_finite())
        {
            return bad("lambda_c, lambda_d, gp_lambda and jitter must be finite and non-negative");
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("lr must be positive and betas in [0, 1)");
        }
        if self.latent_dim == 0 || self.bank_size == 0 {
            return bad("latent_dim and bank_size must be positive");
        }
        if self.generator_hidden.is_empty() {
            return bad("generator needs at least one trunk layer");
        }
        if let Lipschitz::Clip(c) = self.lipschitz {
            if !(c > 0.0) {
                return bad("clip value must be positive");
            }
        }
        if self.extractor_hidden.is_some() && self.feature_dim == 0 {
            return bad("feature_dim must be positive");
        }
        Ok(())
    }
}
