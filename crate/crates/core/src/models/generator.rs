use alloc::vec::Vec;

use super::autoencoder::LatentConditioner;
use super::bank::ClassBank;
use crate::error::{dim, Error, Result};
use crate::nn::{backward, forward, Activation, Gradients, Network, Trace};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Generator `G(z|k) = sum_j softmax(P(Q(z, onehot(k))))_j * x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// Trunk: latent `z` concatenated with the one-hot class, to pseudo-space.
    pub q_net: Network,
    /// Pseudo-space to `bank.capacity()` logits, softmax output.
    pub p_head: Network,
    pub bank: ClassBank,
    pub latent_dim: usize,
    /// Class-conditional latent Gaussians; standard normal when absent.
    pub conditioner: Option<LatentConditioner>,
}

/// One sample and its mixing weights folded onto the class bank.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub sample: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Everything a batch forward pass needs to run backward later.
#[derive(Debug, Clone)]
pub struct GeneratorPass {
    pub labels: Vec<usize>,
    q_trace: Trace,
    p_trace: Trace,
    /// `[n x d]` generated feature rows.
    pub samples: Tensor,
}

impl GeneratorPass {
    /// `[n x B]` unfolded mixing weights.
    pub fn weights(&self) -> &Tensor {
        self.p_trace.output()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorGrads {
    pub q: Gradients,
    pub p: Gradients,
}

impl Generator {
    /// Random generator with trunk widths `hidden` (last entry is the
    /// pseudo-space width).
    pub fn new(latent_dim: usize, hidden: &[usize], bank: ClassBank, rng: &mut Rng) -> Result<Self> {
        if latent_dim == 0 || hidden.is_empty() {
            return Err(Error::InvalidArgument(
                "generator needs a latent dimension and at least one trunk layer".into(),
            ));
        }
        let mut sizes = Vec::with_capacity(hidden.len() + 1);
        sizes.push(latent_dim + bank.n_classes());
        sizes.extend_from_slice(hidden);
        let q_net = Network::mlp(&sizes, Activation::Relu, Activation::Relu, rng);
        let p_head = Network::mlp(
            &[*hidden.last().unwrap(), bank.capacity()],
            Activation::Relu,
            Activation::Softmax,
            rng,
        );
        Ok(Self {
            q_net,
            p_head,
            bank,
            latent_dim,
            conditioner: None,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.bank.n_classes()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        (0..self.n_classes()).find_map(|c| self.bank.anchors(c).ok().map(Tensor::cols))
    }

    /// Latent codes for `labels`, one row each.
    pub fn sample_latent(&self, labels: &[usize], rng: &mut Rng) -> Tensor {
        let mut z = Tensor::zeros(&[labels.len(), self.latent_dim]);
        for (i, &k) in labels.iter().enumerate() {
            match &self.conditioner {
                Some(c) => c.sample_into(k, rng, z.row_mut(i)),
                None => z.row_mut(i).iter_mut().for_each(|v| *v = rng.normal()),
            }
        }
        z
    }

    fn check_labels(&self, labels: &[usize]) -> Result<()> {
        let n_classes = self.n_classes();
        for &k in labels {
            if k >= n_classes {
                return Err(Error::UnknownClass { class: k, n_classes });
            }
            self.bank.anchors(k)?;
        }
        Ok(())
    }

    /// Batch forward pass.
    pub fn forward(&self, z: &Tensor, labels: &[usize]) -> Result<GeneratorPass> {
        if z.rows() != labels.len() {
            return Err(dim("generator labels", z.rows(), labels.len()));
        }
        if z.cols() != self.latent_dim {
            return Err(dim("generator latent", self.latent_dim, z.cols()));
        }
        self.check_labels(labels)?;
        let input = z.hcat(&Tensor::one_hot(labels, self.n_classes()))?;
        let q_trace = forward(&self.q_net, &input)?;
        let p_trace = forward(&self.p_head, q_trace.output())?;
        let d = self.feature_dim().unwrap_or(0);
        let mut samples = Tensor::zeros(&[labels.len(), d]);
        for (i, &k) in labels.iter().enumerate() {
            let s = self.bank.combine(k, p_trace.output().row(i))?;
            samples.row_mut(i).copy_from_slice(&s);
        }
        Ok(GeneratorPass {
            labels: labels.to_vec(),
            q_trace,
            p_trace,
            samples,
        })
    }

    /// Draws latents and generates `labels.len()` samples.
    pub fn generate(&self, labels: &[usize], rng: &mut Rng) -> Result<Tensor> {
        let z = self.sample_latent(labels, rng);
        Ok(self.forward(&z, labels)?.samples)
    }

    /// Parameter gradients given `d loss / d samples`.
    pub fn backward(&self, pass: &GeneratorPass, grad_samples: &Tensor) -> Result<GeneratorGrads> {
        if grad_samples.shape() != pass.samples.shape() {
            return Err(Error::Consistency("sample gradient shape differs from samples".into()));
        }
        let b = self.bank.capacity();
        let mut grad_w = Tensor::zeros(&[pass.labels.len(), b]);
        for (i, &k) in pass.labels.iter().enumerate() {
            let anchors = self.bank.anchors(k)?;
            let bc = anchors.rows();
            let gs = grad_samples.row(i);
            for j in 0..b {
                let v = crate::math::dot(gs, anchors.row(j % bc));
                grad_w.set(i, j, v);
            }
        }
        let p = backward(&self.p_head, &pass.p_trace, &grad_w)?;
        let q = backward(&self.q_net, &pass.q_trace, &p.input)?;
        Ok(GeneratorGrads {
            q: q.params,
            p: p.params,
        })
    }
}

/// Single-sample convenience form of [`Generator::forward`].
pub fn generator_forward(g: &Generator, z: &[f64], class: usize) -> Result<GeneratedSample> {
    let zt = Tensor::matrix(1, z.len(), z.to_vec())?;
    let pass = g.forward(&zt, &[class])?;
    Ok(GeneratedSample {
        sample: pass.samples.row(0).to_vec(),
        weights: g.bank.fold(class, pass.weights().row(0))?,
    })
}
