use alloc::vec;
use alloc::vec::Vec;

use super::generator::Generator;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math;
use crate::nn::{adam_step, backward, forward, mean_squared, Activation, AdamConfig, AdamState, Direction, Network};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Smallest latent variance the conditioner will report.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Per-class diagonal Gaussians in the autoencoder's latent space.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentConditioner {
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl LatentConditioner {
    /// Fits class Gaussians to latent rows; empty classes get `N(0, I)`.
    pub fn fit(latents: &Tensor, labels: &[usize], n_classes: usize) -> Self {
        let d = latents.cols();
        let mut means = vec![vec![0.0; d]; n_classes];
        let mut variances = vec![vec![1.0; d]; n_classes];
        for c in 0..n_classes {
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            if rows.is_empty() {
                continue;
            }
            let n = rows.len() as f64;
            for j in 0..d {
                let mean = rows.iter().map(|&i| latents.get(i, j)).sum::<f64>() / n;
                let var = rows.iter().map(|&i| math::powi(latents.get(i, j) - mean, 2)).sum::<f64>() / n;
                means[c][j] = mean;
                variances[c][j] = var.max(VARIANCE_FLOOR);
            }
        }
        Self { means, variances }
    }

    pub fn latent_dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.means.len()
    }

    pub fn sample_into(&self, class: usize, rng: &mut Rng, out: &mut [f64]) {
        for ((o, &m), &v) in out.iter_mut().zip(&self.means[class]).zip(&self.variances[class]) {
            *o = m + math::sqrt(v) * rng.normal();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeConfig {
    pub latent_dim: usize,
    /// Decoder hidden widths from the latent side; the encoder mirrors them.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        Self {
            latent_dim: 8,
            hidden: vec![32, 32],
            epochs: 20,
            batch_size: 64,
            adam: AdamConfig {
                lr: 1e-3,
                ..AdamConfig::default()
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub encoder: Network,
    pub decoder: Network,
    pub conditioner: LatentConditioner,
    /// Full-data reconstruction loss before training, then after each epoch.
    pub losses: Vec<f64>,
}

impl Autoencoder {
    pub fn encode(&self, batch: &Tensor) -> Result<Tensor> {
        self.encoder.predict(batch)
    }

    pub fn reconstruct(&self, batch: &Tensor) -> Result<Tensor> {
        self.decoder.predict(&self.encoder.predict(batch)?)
    }
}

fn reconstruction_loss(encoder: &Network, decoder: &Network, x: &Tensor) -> Result<f64> {
    let recon = decoder.predict(&encoder.predict(x)?)?;
    Ok(mean_squared(&recon, x)?.0)
}

/// Trains an unconditional autoencoder on every row of `ds`, then fits the
/// class-conditional latent Gaussians from the encoder outputs.
pub fn autoencoder_pretrain(ds: &Dataset, cfg: &AeConfig) -> Result<Autoencoder> {
    if ds.is_empty() {
        return Err(Error::InvalidArgument("autoencoder needs at least one sample".into()));
    }
    if cfg.latent_dim == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("latent_dim and batch_size must be positive".into()));
    }
    let d = ds.dim();
    let mut rng = Rng::new(cfg.seed);
    let mut dec_sizes = vec![cfg.latent_dim];
    dec_sizes.extend_from_slice(&cfg.hidden);
    dec_sizes.push(d);
    let enc_sizes: Vec<usize> = dec_sizes.iter().rev().copied().collect();
    let mut encoder = Network::mlp(&enc_sizes, Activation::Relu, Activation::Linear, &mut rng);
    let mut decoder = Network::mlp(&dec_sizes, Activation::Relu, Activation::Linear, &mut rng);
    let mut enc_state = AdamState::new(&encoder, cfg.adam);
    let mut dec_state = AdamState::new(&decoder, cfg.adam);

    let x = &ds.features;
    let mut losses = vec![reconstruction_loss(&encoder, &decoder, x)?];
    let mut order: Vec<usize> = (0..ds.len()).collect();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = x.select_rows(chunk);
            let enc_trace = forward(&encoder, &batch)?;
            let dec_trace = forward(&decoder, enc_trace.output())?;
            let (loss, grad) = mean_squared(dec_trace.output(), &batch)?;
            if !loss.is_finite() {
                return Err(diverged());
            }
            let dec_back = backward(&decoder, &dec_trace, &grad)?;
            let enc_back = backward(&encoder, &enc_trace, &dec_back.input)?;
            adam_step(&mut decoder, &dec_back.params, &mut dec_state, Direction::Descend)?;
            adam_step(&mut encoder, &enc_back.params, &mut enc_state, Direction::Descend)?;
        }
        let loss = reconstruction_loss(&encoder, &decoder, x)?;
        if !loss.is_finite() {
            return Err(diverged());
        }
        losses.push(loss);
    }
    let conditioner = LatentConditioner::fit(&encoder.predict(x)?, &ds.labels, ds.n_classes);
    Ok(Autoencoder {
        encoder,
        decoder,
        conditioner,
        losses,
    })
}

fn diverged() -> Error {
    Error::NonFinite {
        what: "autoencoder reconstruction loss (try a lower learning rate)".into(),
        layer: None,
    }
}

/// What [`init_generator_from_ae`] transferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitReport {
    /// Trunk layers whose weights now equal the decoder's.
    pub copied_layers: Vec<usize>,
    pub conditioner_installed: bool,
}

impl InitReport {
    /// No weights were transferred; the generator stays at random init.
    pub fn is_empty(&self) -> bool {
        self.copied_layers.is_empty()
    }
}

/// Copies the decoder's leading layers into the generator trunk and
/// installs the latent conditioner.
///
/// Trunk layer 0 sees `z` concatenated with the one-hot class, so only its
/// latent columns are copied; later layers must match shape and activation
/// exactly. Transfer stops at the first mismatch.
pub fn init_generator_from_ae(ae: &Autoencoder, g: &Generator) -> (Generator, InitReport) {
    let mut out = g.clone();
    let mut copied = Vec::new();
    for (l, (q, dec)) in out.q_net.layers.iter_mut().zip(&ae.decoder.layers).enumerate() {
        let fits = q.activation == dec.activation
            && q.output_dim() == dec.output_dim()
            && if l == 0 {
                dec.input_dim() == g.latent_dim && q.input_dim() >= dec.input_dim()
            } else {
                q.input_dim() == dec.input_dim()
            };
        if !fits {
            break;
        }
        let (rows, dec_cols, q_cols) = (dec.output_dim(), dec.input_dim(), q.input_dim());
        for r in 0..rows {
            for c in 0..dec_cols {
                q.weight.data_mut()[r * q_cols + c] = dec.weight.data()[r * dec_cols + c];
            }
        }
        q.bias = dec.bias.clone();
        copied.push(l);
    }
    let install = ae.conditioner.latent_dim() == g.latent_dim && ae.conditioner.n_classes() == g.n_classes();
    if install {
        out.conditioner = Some(ae.conditioner.clone());
    }
    (
        out,
        InitReport {
            copied_layers: copied,
            conditioner_installed: install,
        },
    )
}
