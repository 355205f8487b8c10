use alloc::vec::Vec;

use super::baselines::{train_cgan_with, train_class_gans, train_plain_classifier_with};
use super::config::TrainingConfig;
use super::pgan::pgan_train_with;
use super::rebalance::{rebalance_with, RebalanceTarget};
use super::{Clock, LossCurve};
use crate::data::{random_oversample, smote_oversample, Dataset, FeatureSpace};
use crate::error::Result;
use crate::metrics::{f1_report, uncertainty_metrics, MetricsReport, UncertaintyReport};
use crate::models::{extract_features, FeatureExtractor, PGanModel};
use crate::nn::Network;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Plain,
    Oversample,
    Smote { k: usize },
    VanillaGan,
    Cgan,
    PGan,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Plain => "plain",
            Method::Oversample => "oversample",
            Method::Smote { .. } => "smote",
            Method::VanillaGan => "vanilla_gan",
            Method::Cgan => "cgan",
            Method::PGan => "pgan",
        }
    }
}

/// Which classifier the full model is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// The classifier trained inside the adversarial game.
    AdversarialC,
    /// A fresh classifier trained on the generator-rebalanced features.
    RetrainedC,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::AdversarialC => "adversarial-c",
            EvalMode::RetrainedC => "retrained-c",
        }
    }
}

/// Result of running one method end to end on a training split.
#[derive(Debug, Clone)]
pub struct Trained {
    pub method: Method,
    pub extractor: FeatureExtractor,
    pub classifier: Network,
    /// Curve of the method's main training stage.
    pub curve: LossCurve,
    pub pgan: Option<PGanModel>,
    /// Class counts the final classifier was trained on.
    pub train_counts: Vec<usize>,
}

impl Trained {
    pub fn predict(&self, raw: &Tensor) -> Result<Tensor> {
        self.classifier.predict(&extract_features(&self.extractor, raw)?)
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<Evaluation> {
        let probs = self.predict(&test.features)?;
        Ok(Evaluation {
            metrics: f1_report(&probs.argmax_rows(), &test.labels, test.n_classes)?,
            uncertainty: uncertainty_metrics(&probs)?,
            probs,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    pub uncertainty: UncertaintyReport,
    pub probs: Tensor,
}

/// Fresh classifier on an already feature-mapped dataset.
fn retrain_classifier(features: &Dataset, cfg: &TrainingConfig, clock: &dyn Clock) -> Result<(Network, LossCurve)> {
    let cfg = TrainingConfig {
        extractor_hidden: None,
        ..cfg.clone()
    };
    let m = train_plain_classifier_with(features, &cfg, clock)?;
    Ok((m.classifier, m.curve))
}

fn feature_dataset(ds: &Dataset, f: &FeatureExtractor) -> Result<Dataset> {
    ds.with_features(extract_features(f, &ds.features)?, FeatureSpace::Extracted)
}

/// Trains `method` on `train`.
///
/// Rebalancing baselines reuse the plain model's `F`, rebalance in feature
/// space, then retrain a fresh `C`.
pub fn run_method(
    train: &Dataset,
    cfg: &TrainingConfig,
    method: Method,
    mode: EvalMode,
    clock: &dyn Clock,
) -> Result<Trained> {
    run_method_with(train, cfg, method, mode, clock, &mut |_, _| {})
}

/// [`run_method`] with the P-GAN per-iteration observer; other methods never
/// call it.
pub fn run_method_with(
    train: &Dataset,
    cfg: &TrainingConfig,
    method: Method,
    mode: EvalMode,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(usize, &PGanModel),
) -> Result<Trained> {
    let rebalance_seed = cfg.seed ^ 0x5eed_0f_ba1a;
    if method == Method::PGan {
        let out = pgan_train_with(train, cfg, clock, observer)?;
        let model = out.model;
        if mode == EvalMode::AdversarialC {
            return Ok(Trained {
                method,
                extractor: model.extractor.clone(),
                classifier: model.classifier.clone(),
                curve: out.curve,
                train_counts: train.counts(),
                pgan: Some(model),
            });
        }
        let feats = feature_dataset(train, &model.extractor)?;
        let balanced = rebalance_with(&feats, &model, &RebalanceTarget::Equalize, rebalance_seed)?;
        let (classifier, _) = retrain_classifier(&balanced, cfg, clock)?;
        return Ok(Trained {
            method,
            extractor: model.extractor.clone(),
            classifier,
            curve: out.curve,
            train_counts: balanced.counts(),
            pgan: Some(model),
        });
    }

    let plain = train_plain_classifier_with(train, cfg, clock)?;
    if method == Method::Plain {
        return Ok(Trained {
            method,
            extractor: plain.extractor,
            classifier: plain.classifier,
            curve: plain.curve,
            pgan: None,
            train_counts: train.counts(),
        });
    }
    let feats = feature_dataset(train, &plain.extractor)?;
    let target = RebalanceTarget::Equalize.resolve(&feats)?;
    let (balanced, gan_curve) = match method {
        Method::Oversample => (random_oversample(&feats, &target, rebalance_seed)?, None),
        Method::Smote { k } => (smote_oversample(&feats, k, &target, rebalance_seed)?, None),
        Method::Cgan => {
            let gan = train_cgan_with(&feats, cfg, clock)?;
            let curve = gan.curve.clone();
            (rebalance_with(&feats, &gan, &RebalanceTarget::Equalize, rebalance_seed)?, Some(curve))
        }
        Method::VanillaGan => {
            let counts = feats.counts();
            let classes: Vec<usize> = (0..feats.n_classes).filter(|&c| counts[c] < target[c]).collect();
            let gans = train_class_gans(&feats, cfg, &classes, clock)?;
            let curve = gans.curve();
            (rebalance_with(&feats, &gans, &RebalanceTarget::Equalize, rebalance_seed)?, Some(curve))
        }
        Method::Plain | Method::PGan => unreachable!(),
    };
    let (classifier, retrain_curve) = retrain_classifier(&balanced, cfg, clock)?;
    Ok(Trained {
        method,
        extractor: plain.extractor,
        classifier,
        curve: gan_curve.unwrap_or(retrain_curve),
        pgan: None,
        train_counts: balanced.counts(),
    })
}
