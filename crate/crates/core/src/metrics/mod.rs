//! Evaluation: per-class F1, uncertainty-sampling measures, KL divergence
//! and exact discrete earth-mover distance.

mod divergence;
mod emd;
mod f1;
mod uncertainty;

pub use divergence::kl_divergence;
pub use emd::{distribution_shift, emd_1d_samples, emd_discrete, Metric, Emd, TransportPlan};
pub use f1::{f1_report, ClassMetrics, MetricsReport};
pub use uncertainty::{sample_uncertainty, uncertainty_metrics, Measure, UncertaintyReport};
