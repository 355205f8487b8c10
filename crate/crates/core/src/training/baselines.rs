use alloc::vec;
use alloc::vec::Vec;

use super::config::TrainingConfig;
use super::pgan::{build_classifier, build_critic, build_extractor, check_trainable, jitter, Guard, InitStreams};
use super::{Clock, LossCurve, LossRecord, NoClock};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{condition, extract_features, FeatureExtractor};
use crate::nn::{
    adam_step, backward, binary_cross_entropy, cross_entropy, forward, Activation, AdamState, Direction, Network,
};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// `F` and `C` trained with plain cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainModel {
    pub extractor: FeatureExtractor,
    pub classifier: Network,
    /// Only `loss_c` is populated; the other series are zero.
    pub curve: LossCurve,
}

impl PlainModel {
    pub fn predict(&self, raw: &Tensor) -> Result<Tensor> {
        self.classifier.predict(&extract_features(&self.extractor, raw)?)
    }
}

pub fn train_plain_classifier(ds: &Dataset, cfg: &TrainingConfig) -> Result<PlainModel> {
    train_plain_classifier_with(ds, cfg, &NoClock)
}

/// Uses the same initialisation streams as the full model, so `F` and `C`
/// start from identical weights.
pub fn train_plain_classifier_with(ds: &Dataset, cfg: &TrainingConfig, clock: &dyn Clock) -> Result<PlainModel> {
    cfg.validate()?;
    check_trainable(ds, 1)?;
    let mut s = InitStreams::new(cfg.seed);
    let mut extractor = build_extractor(ds.dim(), cfg, &mut s.f);
    let mut classifier = build_classifier(extractor.output_dim(), ds.n_classes, cfg, &mut s.c);
    let adam = cfg.adam();
    let mut f_state = match &extractor {
        FeatureExtractor::Net(n) => Some(AdamState::new(n, adam)),
        FeatureExtractor::Identity { .. } => None,
    };
    let mut c_state = AdamState::new(&classifier, adam);
    let mut rng = s.train;
    let mut curve = LossCurve::new();
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut iteration = 0;
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            iteration += 1;
            let guard = Guard {
                iteration,
                curve: &curve,
            };
            let x = ds.features.select_rows(chunk);
            let y: Vec<usize> = chunk.iter().map(|&i| ds.labels[i]).collect();
            let loss = match (&mut extractor, &mut f_state) {
                (FeatureExtractor::Net(f_net), Some(fs)) => {
                    let f_trace = forward(f_net, &x)?;
                    let c_trace = forward(&classifier, f_trace.output())?;
                    let ce = cross_entropy(c_trace.output(), &y, None)?;
                    guard.check("loss_C", ce.loss)?;
                    let c_back = backward(&classifier, &c_trace, &ce.grad)?;
                    let f_back = backward(f_net, &f_trace, &c_back.input)?;
                    adam_step(&mut classifier, &c_back.params, &mut c_state, Direction::Descend)?;
                    adam_step(f_net, &f_back.params, fs, Direction::Descend)?;
                    ce.loss
                }
                _ => {
                    let mut x = x;
                    jitter(&mut x, cfg.jitter, &mut rng);
                    let c_trace = forward(&classifier, &x)?;
                    let ce = cross_entropy(c_trace.output(), &y, None)?;
                    guard.check("loss_C", ce.loss)?;
                    let c_back = backward(&classifier, &c_trace, &ce.grad)?;
                    adam_step(&mut classifier, &c_back.params, &mut c_state, Direction::Descend)?;
                    ce.loss
                }
            };
            curve.push(LossRecord {
                iteration,
                loss_g: 0.0,
                loss_d: 0.0,
                loss_c: loss,
                wall_ms: clock.elapsed_ms(),
            })?;
        }
    }
    Ok(PlainModel {
        extractor,
        classifier,
        curve,
    })
}

/// Unconditional GAN with a sigmoid discriminator and log-loss.
#[derive(Debug, Clone, PartialEq)]
pub struct VanillaGan {
    pub generator: Network,
    pub discriminator: Network,
    pub latent_dim: usize,
    pub curve: LossCurve,
}

impl VanillaGan {
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Tensor> {
        let z = Tensor::matrix(n, self.latent_dim, rng.normal_vec(n * self.latent_dim))?;
        self.generator.predict(&z)
    }
}

/// Label-conditioned GAN: the one-hot class is appended to both inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Cgan {
    pub generator: Network,
    pub discriminator: Network,
    pub latent_dim: usize,
    pub n_classes: usize,
    pub curve: LossCurve,
}

impl Cgan {
    pub fn sample(&self, labels: &[usize], rng: &mut Rng) -> Result<Tensor> {
        let n = labels.len();
        let z = Tensor::matrix(n, self.latent_dim, rng.normal_vec(n * self.latent_dim))?;
        self.generator.predict(&condition(&z, labels, self.n_classes)?)
    }
}

fn build_generator(input: usize, output: usize, cfg: &TrainingConfig, rng: &mut Rng) -> Network {
    let mut sizes = vec![input];
    sizes.extend_from_slice(&cfg.generator_hidden);
    sizes.push(output);
    Network::mlp(&sizes, Activation::Relu, Activation::Linear, rng)
}

/// Shared log-loss GAN loop; `n_classes = Some(k)` conditions both players.
fn train_gan(
    ds: &Dataset,
    cfg: &TrainingConfig,
    n_classes: Option<usize>,
    clock: &dyn Clock,
) -> Result<(Network, Network, LossCurve)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::InvalidArgument("GAN training needs at least one sample".into()));
    }
    let mut s = InitStreams::new(cfg.seed);
    let d = ds.dim();
    let extra = n_classes.unwrap_or(0);
    let cond = |x: &Tensor, labels: &[usize]| -> Result<Tensor> {
        match n_classes {
            Some(k) => condition(x, labels, k),
            None => Ok(x.clone()),
        }
    };
    let mut gen = build_generator(cfg.latent_dim + extra, d, cfg, &mut s.g);
    let mut disc = build_critic(d + extra, cfg, Activation::Sigmoid, &mut s.d);
    let adam = cfg.adam();
    let mut g_state = AdamState::new(&gen, adam);
    let mut d_state = AdamState::new(&disc, adam);
    let mut rng = s.train;
    let mut curve = LossCurve::new();
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut iteration = 0;
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            iteration += 1;
            let guard = Guard {
                iteration,
                curve: &curve,
            };
            let m = chunk.len();
            let labels: Vec<usize> = chunk.iter().map(|&i| ds.labels[i]).collect();
            let mut real = ds.features.select_rows(chunk);
            jitter(&mut real, cfg.jitter, &mut rng);

            // D descends the log-loss: real -> 1, fake -> 0.
            let z = Tensor::matrix(m, cfg.latent_dim, rng.normal_vec(m * cfg.latent_dim))?;
            let fake = gen.predict(&cond(&z, &labels)?)?;
            let real_trace = forward(&disc, &cond(&real, &labels)?)?;
            let fake_trace = forward(&disc, &cond(&fake, &labels)?)?;
            let (lr, gr) = binary_cross_entropy(real_trace.output(), &vec![1.0; m])?;
            let (lf, gf) = binary_cross_entropy(fake_trace.output(), &vec![0.0; m])?;
            let loss_d = guard.check("loss_D", lr + lf)?;
            let mut dg = backward(&disc, &real_trace, &gr)?.params;
            dg.add(&backward(&disc, &fake_trace, &gf)?.params)?;
            adam_step(&mut disc, &dg, &mut d_state, Direction::Descend)?;

            // G descends -log D(G(z)) (non-saturating form).
            let z = Tensor::matrix(m, cfg.latent_dim, rng.normal_vec(m * cfg.latent_dim))?;
            let g_trace = forward(&gen, &cond(&z, &labels)?)?;
            let d_trace = forward(&disc, &cond(g_trace.output(), &labels)?)?;
            let (lg, gg) = binary_cross_entropy(d_trace.output(), &vec![1.0; m])?;
            let loss_g = guard.check("loss_G", lg)?;
            let through_d = backward(&disc, &d_trace, &gg)?.input.take_cols(d);
            let g_back = backward(&gen, &g_trace, &through_d)?;
            adam_step(&mut gen, &g_back.params, &mut g_state, Direction::Descend)?;

            curve.push(LossRecord {
                iteration,
                loss_g,
                loss_d,
                loss_c: 0.0,
                wall_ms: clock.elapsed_ms(),
            })?;
        }
    }
    Ok((gen, disc, curve))
}

pub fn train_vanilla_gan(ds: &Dataset, cfg: &TrainingConfig) -> Result<VanillaGan> {
    train_vanilla_gan_with(ds, cfg, &NoClock)
}

pub fn train_vanilla_gan_with(ds: &Dataset, cfg: &TrainingConfig, clock: &dyn Clock) -> Result<VanillaGan> {
    let (generator, discriminator, curve) = train_gan(ds, cfg, None, clock)?;
    Ok(VanillaGan {
        generator,
        discriminator,
        latent_dim: cfg.latent_dim,
        curve,
    })
}

pub fn train_cgan(ds: &Dataset, cfg: &TrainingConfig) -> Result<Cgan> {
    train_cgan_with(ds, cfg, &NoClock)
}

pub fn train_cgan_with(ds: &Dataset, cfg: &TrainingConfig, clock: &dyn Clock) -> Result<Cgan> {
    let (generator, discriminator, curve) = train_gan(ds, cfg, Some(ds.n_classes), clock)?;
    Ok(Cgan {
        generator,
        discriminator,
        latent_dim: cfg.latent_dim,
        n_classes: ds.n_classes,
        curve,
    })
}

/// One unconditional GAN per class, used as a per-class sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassGans {
    pub gans: Vec<Option<VanillaGan>>,
}

/// Trains a GAN on each listed class's rows alone.
pub fn train_class_gans(ds: &Dataset, cfg: &TrainingConfig, classes: &[usize], clock: &dyn Clock) -> Result<ClassGans> {
    let mut gans = vec![None; ds.n_classes];
    for &c in classes {
        if c >= ds.n_classes {
            return Err(Error::UnknownClass {
                class: c,
                n_classes: ds.n_classes,
            });
        }
        let rows = ds.class_indices(c);
        if rows.is_empty() {
            return Err(Error::Insufficient {
                class: c,
                requested: 1,
                available: 0,
            });
        }
        let sub = ds.subset(&rows);
        let class_cfg = TrainingConfig {
            seed: cfg.seed.wrapping_add(c as u64),
            ..cfg.clone()
        };
        gans[c] = Some(train_vanilla_gan_with(&sub, &class_cfg, clock)?);
    }
    Ok(ClassGans { gans })
}

impl ClassGans {
    /// Concatenated loss curves, renumbered to keep iterations increasing.
    pub fn curve(&self) -> LossCurve {
        let mut out = LossCurve::new();
        let mut offset = 0;
        for g in self.gans.iter().flatten() {
            for r in g.curve.records() {
                let _ = out.push(LossRecord {
                    iteration: offset + r.iteration,
                    ..*r
                });
            }
            offset += g.curve.records().last().map_or(0, |r| r.iteration);
        }
        out
    }

    pub fn sample(&self, class: usize, n: usize, rng: &mut Rng) -> Result<Tensor> {
        match self.gans.get(class) {
            Some(Some(g)) => g.sample(n, rng),
            _ => Err(Error::EmptyBank { class }),
        }
    }
}
