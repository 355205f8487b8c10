use alloc::vec;
use alloc::vec::Vec;

use super::baselines::{ClassGans, Cgan};
use crate::data::Dataset;
use crate::error::{dim, Error, Result};
use crate::models::PGanModel;
use crate::rng::Rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RebalanceTarget {
    /// Every class up to the largest class count.
    Equalize,
    Counts(Vec<usize>),
}

impl RebalanceTarget {
    /// Per-class targets for `ds`; never below the current counts.
    pub fn resolve(&self, ds: &Dataset) -> Result<Vec<usize>> {
        let counts = ds.counts();
        let target = match self {
            RebalanceTarget::Equalize => vec![counts.iter().copied().max().unwrap_or(0); counts.len()],
            RebalanceTarget::Counts(t) => {
                if t.len() != counts.len() {
                    return Err(dim("rebalance targets", counts.len(), t.len()));
                }
                t.clone()
            }
        };
        for (c, (&t, &have)) in target.iter().zip(&counts).enumerate() {
            if t < have {
                return Err(Error::InvalidArgument(alloc::format!(
                    "class {c}: target {t} is below the current count {have}; rebalancing never removes data"
                )));
            }
        }
        Ok(target)
    }
}

/// Anything that can emit feature rows for a requested class.
pub trait ClassSampler {
    fn sample_class(&self, class: usize, n: usize, rng: &mut Rng) -> Result<Tensor>;
}

impl ClassSampler for PGanModel {
    fn sample_class(&self, class: usize, n: usize, rng: &mut Rng) -> Result<Tensor> {
        self.generator.generate(&vec![class; n], rng)
    }
}

impl ClassSampler for Cgan {
    fn sample_class(&self, class: usize, n: usize, rng: &mut Rng) -> Result<Tensor> {
        self.sample(&vec![class; n], rng)
    }
}

impl ClassSampler for ClassGans {
    fn sample_class(&self, class: usize, n: usize, rng: &mut Rng) -> Result<Tensor> {
        self.sample(class, n, rng)
    }
}

/// Appends sampler output per class until `target` is met; appended rows are
/// flagged synthetic.
pub fn rebalance_with(ds: &Dataset, sampler: &dyn ClassSampler, target: &RebalanceTarget, seed: u64) -> Result<Dataset> {
    let target = target.resolve(ds)?;
    let counts = ds.counts();
    let mut rng = Rng::new(seed);
    let mut out = ds.clone();
    for (c, (&t, &have)) in target.iter().zip(&counts).enumerate() {
        let need = t - have;
        if need == 0 {
            continue;
        }
        let rows = sampler.sample_class(c, need, &mut rng)?;
        if rows.cols() != ds.dim() {
            return Err(dim("sampler output width", ds.dim(), rows.cols()));
        }
        out.append_synthetic(&rows, &vec![c; need])?;
    }
    Ok(out)
}

/// Rebalances a feature-space dataset with the trained generator.
pub fn rebalance_dataset(ds: &Dataset, model: &PGanModel, target: &RebalanceTarget, seed: u64) -> Result<Dataset> {
    rebalance_with(ds, model, target, seed)
}
