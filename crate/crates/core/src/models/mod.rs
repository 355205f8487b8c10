//! The four players: feature extractor, hull-constrained generator,
//! critic and classifier, plus the autoencoder that seeds the generator.

mod autoencoder;
mod bank;
mod generator;
mod hull;

use alloc::vec::Vec;

pub use autoencoder::{
    autoencoder_pretrain, init_generator_from_ae, AeConfig, Autoencoder, InitReport, LatentConditioner,
    VARIANCE_FLOOR,
};
pub use bank::ClassBank;
pub use generator::{generator_forward, GeneratedSample, Generator, GeneratorGrads, GeneratorPass};
pub use hull::{hull_membership, ConvexHull, HullMembership, HULL_TOLERANCE};

use crate::data::ClassPriors;
use crate::error::{dim, Error, Result};
use crate::nn::{Activation, Network};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Feature map `F`. Identity mode passes raw inputs through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureExtractor {
    Identity { dim: usize },
    Net(Network),
}

impl FeatureExtractor {
    /// Identity when `hidden` is `None`, otherwise a ReLU MLP
    /// `input -> hidden.. -> out_dim` with tanh output, which keeps the
    /// feature scale (and so every class hull) bounded.
    pub fn build(input_dim: usize, layers: Option<(&[usize], usize)>, rng: &mut Rng) -> Self {
        match layers {
            None => FeatureExtractor::Identity { dim: input_dim },
            Some((hidden, out)) => {
                let mut sizes = Vec::with_capacity(hidden.len() + 2);
                sizes.push(input_dim);
                sizes.extend_from_slice(hidden);
                sizes.push(out);
                FeatureExtractor::Net(Network::mlp(&sizes, Activation::Relu, Activation::Tanh, rng))
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            FeatureExtractor::Identity { dim } => *dim,
            FeatureExtractor::Net(n) => n.input_dim().unwrap_or(0),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureExtractor::Identity { dim } => *dim,
            FeatureExtractor::Net(n) => n.output_dim().unwrap_or(0),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, FeatureExtractor::Identity { .. })
    }
}

pub fn extract_features(f: &FeatureExtractor, batch: &Tensor) -> Result<Tensor> {
    match f {
        FeatureExtractor::Identity { dim: d } => {
            if batch.shape().len() != 2 || batch.cols() != *d {
                return Err(dim("feature extractor input", *d, batch.cols()));
            }
            Ok(batch.clone())
        }
        FeatureExtractor::Net(net) => net.predict(batch),
    }
}

/// Unbounded critic scores, one per row.
pub fn critic_score(d_net: &Network, batch: &Tensor) -> Result<Tensor> {
    check_critic(d_net)?;
    d_net.predict(batch)
}

pub(crate) fn check_critic(d_net: &Network) -> Result<()> {
    if d_net.output_dim() != Some(1) {
        return Err(dim("critic output", 1, d_net.output_dim().unwrap_or(0)));
    }
    if d_net.output_activation() != Some(Activation::Linear) {
        return Err(Error::InvalidArgument("critic output must be linear".into()));
    }
    Ok(())
}

/// Class probabilities, rows summing to one.
pub fn classify(c_net: &Network, batch: &Tensor) -> Result<Tensor> {
    check_classifier(c_net)?;
    c_net.predict(batch)
}

pub(crate) fn check_classifier(c_net: &Network) -> Result<()> {
    if c_net.output_activation() != Some(Activation::Softmax) {
        return Err(Error::InvalidArgument("classifier output must be softmax".into()));
    }
    Ok(())
}

/// Critic input: feature rows with the one-hot label appended.
pub fn condition(batch: &Tensor, labels: &[usize], n_classes: usize) -> Result<Tensor> {
    if labels.len() != batch.rows() {
        return Err(dim("conditioning labels", batch.rows(), labels.len()));
    }
    batch.hcat(&Tensor::one_hot(labels, n_classes))
}

/// A complete trained or freshly initialised model.
#[derive(Debug, Clone, PartialEq)]
pub struct PGanModel {
    pub extractor: FeatureExtractor,
    pub classifier: Network,
    /// Input width is feature width plus the number of classes.
    pub critic: Network,
    pub generator: Generator,
    pub priors: ClassPriors,
}

impl PGanModel {
    pub fn n_classes(&self) -> usize {
        self.priors.n_classes()
    }

    pub fn features(&self, raw: &Tensor) -> Result<Tensor> {
        extract_features(&self.extractor, raw)
    }

    /// `C(F(x))`.
    pub fn predict(&self, raw: &Tensor) -> Result<Tensor> {
        classify(&self.classifier, &self.features(raw)?)
    }

    pub fn generate(&self, labels: &[usize], rng: &mut Rng) -> Result<Tensor> {
        self.generator.generate(labels, rng)
    }
}
