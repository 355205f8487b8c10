//! The three-player training schedule, its objectives, baseline trainers
//! and generator-driven rebalancing.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub iteration: usize,
    pub loss_g: f64,
    pub loss_d: f64,
    pub loss_c: f64,
    /// Milliseconds since training began, as reported by the [`Clock`].
    pub wall_ms: f64,
}

/// Ordered per-iteration loss records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossCurve {
    records: Vec<LossRecord>,
}

impl LossCurve {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; iterations must strictly increase.
    pub fn push(&mut self, record: LossRecord) -> crate::Result<()> {
        if let Some(last) = self.records.last() {
            if record.iteration <= last.iteration {
                return Err(crate::Error::InvalidArgument(alloc::format!(
                    "loss curve iteration {} does not follow {}",
                    record.iteration,
                    last.iteration
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[LossRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Wall-clock source; the core has no clock of its own.
pub trait Clock {
    fn elapsed_ms(&self) -> f64;
}

/// Reports zero elapsed time, which keeps curves reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> f64 {
        0.0
    }
}

mod baselines;
mod config;
mod labels;
mod objectives;
mod pgan;
mod pipeline;
mod rebalance;

pub use baselines::{
    train_cgan, train_cgan_with, train_class_gans, train_plain_classifier, train_plain_classifier_with,
    train_vanilla_gan, train_vanilla_gan_with, Cgan, ClassGans, PlainModel, VanillaGan,
};
pub use config::{LabelFallback, Lipschitz, TrainingConfig};
pub use labels::{label_weights, sample_minority_labels, LabelMode, LabelSample, LabelWeights};
pub use objectives::{
    classifier_objective, classifier_value, critic_objective, critic_value, gradient_penalty, ClassifierObjective,
    ClassifierValue, CriticObjective, CriticValue, GradientPenalty,
};
pub use pgan::{
    init_model, paired_real, pgan_train, pgan_train_with, train_model, PGanOutcome, Trainer, DIVERGENCE_LIMIT,
};
pub use pipeline::{run_method, run_method_with, EvalMode, Evaluation, Method, Trained};
pub use rebalance::{rebalance_dataset, rebalance_with, ClassSampler, RebalanceTarget};
