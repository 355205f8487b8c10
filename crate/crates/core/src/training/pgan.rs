use alloc::boxed::Box;
use alloc::vec::Vec;

use super::config::{Lipschitz, TrainingConfig};
use super::labels::{sample_minority_labels, LabelMode};
use super::objectives::{classifier_objective, critic_objective, gradient_penalty};
use super::{Clock, LossCurve, LossRecord, NoClock};
use crate::data::{class_priors, Dataset};
use crate::error::{Divergence, Error, Result};
use crate::models::{
    autoencoder_pretrain, condition, extract_features, init_generator_from_ae, AeConfig, ClassBank,
    FeatureExtractor, Generator, InitReport, PGanModel,
};
use crate::nn::{adam_step, backward, cross_entropy, forward, Activation, AdamConfig, AdamState, Direction, Network};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Losses above this magnitude abort training.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Independent random streams for every initialisation, in a fixed order so
/// the plain baseline and the full model share `F` and `C` initialisations.
pub(crate) struct InitStreams {
    pub f: Rng,
    pub c: Rng,
    pub d: Rng,
    pub g: Rng,
    pub bank: Rng,
    pub ae_seed: u64,
    pub train: Rng,
}

impl InitStreams {
    pub fn new(seed: u64) -> Self {
        let mut root = Rng::new(seed);
        Self {
            f: root.fork(),
            c: root.fork(),
            d: root.fork(),
            g: root.fork(),
            bank: root.fork(),
            ae_seed: root.next_u64(),
            train: root.fork(),
        }
    }
}

pub(crate) fn build_extractor(input_dim: usize, cfg: &TrainingConfig, rng: &mut Rng) -> FeatureExtractor {
    FeatureExtractor::build(
        input_dim,
        cfg.extractor_hidden.as_deref().map(|h| (h, cfg.feature_dim)),
        rng,
    )
}

pub(crate) fn build_classifier(feature_dim: usize, n_classes: usize, cfg: &TrainingConfig, rng: &mut Rng) -> Network {
    let mut sizes = Vec::with_capacity(cfg.classifier_hidden.len() + 2);
    sizes.push(feature_dim);
    sizes.extend_from_slice(&cfg.classifier_hidden);
    sizes.push(n_classes);
    Network::mlp(&sizes, Activation::Relu, Activation::Softmax, rng)
}

pub(crate) fn build_critic(input_dim: usize, cfg: &TrainingConfig, output: Activation, rng: &mut Rng) -> Network {
    let mut sizes = Vec::with_capacity(cfg.critic_hidden.len() + 2);
    sizes.push(input_dim);
    sizes.extend_from_slice(&cfg.critic_hidden);
    sizes.push(1);
    Network::mlp(&sizes, Activation::Tanh, output, rng)
}

pub(crate) fn check_trainable(ds: &Dataset, min_per_class: usize) -> Result<()> {
    if ds.n_classes < 2 {
        return Err(Error::InvalidArgument("training needs at least two classes".into()));
    }
    for (class, &available) in ds.counts().iter().enumerate() {
        if available < min_per_class {
            return Err(Error::Insufficient {
                class,
                requested: min_per_class,
                available,
            });
        }
    }
    Ok(())
}

pub(crate) struct Guard<'a> {
    pub iteration: usize,
    pub curve: &'a LossCurve,
}

impl Guard<'_> {
    pub fn check(&self, loss: &'static str, value: f64) -> Result<f64> {
        if !value.is_finite() || value.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Divergence(Box::new(Divergence {
                iteration: self.iteration,
                loss,
                value,
                curve: self.curve.clone(),
            })));
        }
        Ok(value)
    }
}

pub(crate) fn jitter(batch: &mut Tensor, sigma: f64, rng: &mut Rng) {
    if sigma > 0.0 {
        batch.data_mut().iter_mut().for_each(|v| *v += sigma * rng.normal());
    }
}

/// Fresh model: random networks, a bank drawn from the initial features and,
/// when `cfg.ae_epochs > 0`, an autoencoder-initialised generator.
pub fn init_model(ds: &Dataset, cfg: &TrainingConfig) -> Result<(PGanModel, Option<InitReport>)> {
    cfg.validate()?;
    check_trainable(ds, 2)?;
    let mut s = InitStreams::new(cfg.seed);
    let priors = class_priors(ds)?;
    let k = ds.n_classes;
    let extractor = build_extractor(ds.dim(), cfg, &mut s.f);
    let d_f = extractor.output_dim();
    let classifier = build_classifier(d_f, k, cfg, &mut s.c);
    let critic = build_critic(d_f + k, cfg, Activation::Linear, &mut s.d);
    let feats = extract_features(&extractor, &ds.features)?;
    let bank = ClassBank::draw(&feats, &ds.labels, k, cfg.bank_size, &mut s.bank)?;
    let mut generator = Generator::new(cfg.latent_dim, &cfg.generator_hidden, bank, &mut s.g)?;
    let mut report = None;
    if cfg.ae_epochs > 0 {
        let feature_ds = ds.with_features(feats, crate::data::FeatureSpace::Extracted)?;
        let ae = autoencoder_pretrain(
            &feature_ds,
            &AeConfig {
                latent_dim: cfg.latent_dim,
                hidden: cfg.generator_hidden.clone(),
                epochs: cfg.ae_epochs,
                batch_size: cfg.batch_size,
                adam: AdamConfig {
                    lr: cfg.ae_lr,
                    ..cfg.adam()
                },
                seed: s.ae_seed,
            },
        )?;
        let (g, r) = init_generator_from_ae(&ae, &generator);
        generator = g;
        report = Some(r);
    }
    Ok((
        PGanModel {
            extractor,
            classifier,
            critic,
            generator,
            priors,
        },
        report,
    ))
}

#[derive(Debug, Clone)]
pub struct PGanOutcome {
    pub model: PGanModel,
    pub curve: LossCurve,
    pub init: Option<InitReport>,
    /// The label sampler had to use its fallback at least once.
    pub fallback_used: bool,
}

pub fn pgan_train(ds: &Dataset, cfg: &TrainingConfig) -> Result<PGanOutcome> {
    pgan_train_with(ds, cfg, &NoClock, &mut |_, _| {})
}

/// [`pgan_train`] with a wall clock and a per-iteration observer.
pub fn pgan_train_with(
    ds: &Dataset,
    cfg: &TrainingConfig,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(usize, &PGanModel),
) -> Result<PGanOutcome> {
    let (model, init) = init_model(ds, cfg)?;
    observer(0, &model);
    let (model, curve, fallback_used) = train_model(model, ds, cfg, clock, observer)?;
    Ok(PGanOutcome {
        model,
        curve,
        init,
        fallback_used,
    })
}

/// A model plus optimizer state for every player, exposing one update per
/// player. Each step returns the objective value before the update.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub model: PGanModel,
    pub cfg: TrainingConfig,
    f: Option<AdamState>,
    c: AdamState,
    d: AdamState,
    q: AdamState,
    p: AdamState,
}

impl Trainer {
    pub fn new(model: PGanModel, cfg: &TrainingConfig) -> Result<Self> {
        cfg.validate()?;
        let adam = cfg.adam();
        Ok(Self {
            f: match &model.extractor {
                FeatureExtractor::Net(n) => Some(AdamState::new(n, adam)),
                FeatureExtractor::Identity { .. } => None,
            },
            c: AdamState::new(&model.classifier, adam),
            d: AdamState::new(&model.critic, adam),
            q: AdamState::new(&model.generator.q_net, adam),
            p: AdamState::new(&model.generator.p_head, adam),
            model,
            cfg: cfg.clone(),
        })
    }

    /// `F` descends cross-entropy of `C(F(x))` with `C` fixed; `None` for an
    /// identity extractor.
    pub fn f_step(&mut self, x: &Tensor, y: &[usize]) -> Result<Option<f64>> {
        let (FeatureExtractor::Net(f_net), Some(state)) = (&mut self.model.extractor, &mut self.f) else {
            return Ok(None);
        };
        let f_trace = forward(f_net, x)?;
        let c_trace = forward(&self.model.classifier, f_trace.output())?;
        let ce = cross_entropy(c_trace.output(), y, None)?;
        let c_back = backward(&self.model.classifier, &c_trace, &ce.grad)?;
        let f_back = backward(f_net, &f_trace, &c_back.input)?;
        adam_step(f_net, &f_back.params, state, Direction::Descend)?;
        Ok(Some(ce.loss))
    }

    /// `C` ascends the classifier objective on a feature batch.
    pub fn c_step(&mut self, batch: &Tensor, labels: &[usize]) -> Result<f64> {
        let obj = classifier_objective(&self.model.classifier, batch, labels, &self.model.priors)?;
        adam_step(&mut self.model.classifier, &obj.params, &mut self.c, Direction::Ascend)?;
        Ok(obj.value)
    }

    /// `D` ascends its objective minus the weighted penalty (or is clipped).
    /// `paired` holds one same-class real row per fake row for the penalty.
    pub fn d_step(
        &mut self,
        real: &Tensor,
        real_labels: &[usize],
        fake: &Tensor,
        fake_labels: &[usize],
        paired: &Tensor,
        rng: &mut Rng,
    ) -> Result<f64> {
        let k = self.model.n_classes();
        let crit = critic_objective(&self.model.critic, real, real_labels, fake, fake_labels, &self.model.priors)?;
        let mut grads = crit.params;
        let mut value = crit.value;
        if self.cfg.lipschitz == Lipschitz::GradientPenalty && self.cfg.gp_lambda > 0.0 {
            let gp = gradient_penalty(&self.model.critic, paired, fake, Some((fake_labels, k)), rng)?;
            let mut pen = gp.params;
            pen.scale(-self.cfg.gp_lambda);
            grads.add(&pen)?;
            value -= self.cfg.gp_lambda * gp.value;
        }
        adam_step(&mut self.model.critic, &grads, &mut self.d, Direction::Ascend)?;
        if let Lipschitz::Clip(c) = self.cfg.lipschitz {
            self.model.critic.clip(c);
        }
        Ok(value)
    }

    /// Generator loss `lambda_C * S_C(G) - lambda_D * mean D(G)` for fixed
    /// latents, without updating anything.
    pub fn g_loss(&self, z: &Tensor, labels: &[usize]) -> Result<f64> {
        let samples = self.model.generator.forward(z, labels)?.samples;
        let s_c = classifier_objective(&self.model.classifier, &samples, labels, &self.model.priors)?;
        let k = self.model.n_classes();
        let score = self.model.critic.predict(&condition(&samples, labels, k)?)?.mean();
        Ok(self.cfg.lambda_c * s_c.value - self.cfg.lambda_d * score)
    }

    /// `G` descends its loss with `C` and `D` fixed.
    pub fn g_step(&mut self, z: &Tensor, labels: &[usize]) -> Result<f64> {
        let k = self.model.n_classes();
        let g = &self.model.generator;
        let pass = g.forward(z, labels)?;
        let s_c = classifier_objective(&self.model.classifier, &pass.samples, labels, &self.model.priors)?;
        let d_trace = forward(&self.model.critic, &condition(&pass.samples, labels, k)?)?;
        let m = labels.len() as f64;
        let mean_score = d_trace.output().mean();
        let d_back = backward(&self.model.critic, &d_trace, &Tensor::filled(&[labels.len(), 1], 1.0 / m))?;
        let mut grad_samples = s_c.input;
        grad_samples.scale(self.cfg.lambda_c);
        let mut from_d = d_back.input.take_cols(pass.samples.cols());
        from_d.scale(-self.cfg.lambda_d);
        grad_samples.add_assign(&from_d)?;
        let grads = g.backward(&pass, &grad_samples)?;
        let g = &mut self.model.generator;
        adam_step(&mut g.q_net, &grads.q, &mut self.q, Direction::Descend)?;
        adam_step(&mut g.p_head, &grads.p, &mut self.p, Direction::Descend)?;
        Ok(self.cfg.lambda_c * s_c.value - self.cfg.lambda_d * mean_score)
    }
}

/// The outer loop, starting from an existing model.
pub fn train_model(
    model: PGanModel,
    ds: &Dataset,
    cfg: &TrainingConfig,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(usize, &PGanModel),
) -> Result<(PGanModel, LossCurve, bool)> {
    check_trainable(ds, 2)?;
    let mut t = Trainer::new(model, cfg)?;
    let mut rng = InitStreams::new(cfg.seed).train;
    let n = ds.len();
    let priors = t.model.priors.clone();
    let mut curve = LossCurve::new();
    let mut fallback_used = false;
    let mut iteration = 0;
    let mut order: Vec<usize> = (0..n).collect();

    for _epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut feats = t.model.features(&ds.features)?;
        t.model.generator.bank.redraw(&feats, &ds.labels, &mut rng)?;
        for chunk in order.chunks(cfg.batch_size) {
            iteration += 1;
            let guard = Guard {
                iteration,
                curve: &curve,
            };
            let y: Vec<usize> = chunk.iter().map(|&i| ds.labels[i]).collect();
            if let Some(loss_f) = t.f_step(&ds.features.select_rows(chunk), &y)? {
                guard.check("loss_F", loss_f)?;
                feats = t.model.features(&ds.features)?;
                t.model.generator.bank.refresh(&feats);
            }

            let (mut loss_g, mut loss_d, mut loss_c) = (0.0, 0.0, 0.0);
            for j in 0..cfg.j_steps {
                let idx: Vec<usize> = if j == 0 {
                    chunk.to_vec()
                } else {
                    (0..chunk.len()).map(|_| rng.index(n)).collect()
                };
                let mut real = feats.select_rows(&idx);
                jitter(&mut real, cfg.jitter, &mut rng);
                let real_labels: Vec<usize> = idx.iter().map(|&i| ds.labels[i]).collect();
                loss_c = guard.check("loss_C", -t.c_step(&real, &real_labels)?)?;

                let gen = sample_minority_labels(&priors, cfg.batch_size, LabelMode::PriorGap, cfg.label_fallback, &mut rng)?;
                fallback_used |= gen.fallback_used;
                let fake = t.model.generator.generate(&gen.labels, &mut rng)?;
                guard.check("loss_C", -t.c_step(&fake, &gen.labels)?)?;

                let paired = paired_real(&t.model.generator.bank, &gen.labels, &mut rng)?;
                loss_d = guard.check("loss_D", -t.d_step(&real, &real_labels, &fake, &gen.labels, &paired, &mut rng)?)?;

                let uni = sample_minority_labels(
                    &priors,
                    cfg.batch_size,
                    LabelMode::UniformMinority,
                    cfg.label_fallback,
                    &mut rng,
                )?;
                fallback_used |= uni.fallback_used;
                let z = t.model.generator.sample_latent(&uni.labels, &mut rng);
                loss_g = guard.check("loss_G", t.g_step(&z, &uni.labels)?)?;
            }
            curve.push(LossRecord {
                iteration,
                loss_g,
                loss_d,
                loss_c,
                wall_ms: clock.elapsed_ms(),
            })?;
            observer(iteration, &t.model);
        }
    }
    Ok((t.model, curve, fallback_used))
}

/// One real anchor per generated label, drawn from that class's bank, so the
/// penalty interpolates within a class.
pub fn paired_real(bank: &ClassBank, labels: &[usize], rng: &mut Rng) -> Result<Tensor> {
    let mut rows = Vec::with_capacity(labels.len());
    let mut d = 0;
    for &c in labels {
        let a = bank.anchors(c)?;
        d = a.cols();
        rows.extend_from_slice(a.row(rng.index(a.rows())));
    }
    Tensor::matrix(labels.len(), d, rows)
}
