use alloc::vec::Vec;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Subsample each class without replacement to exactly `target_counts`.
///
/// Per class the indices are shuffled with the seeded stream and a prefix is
/// kept; the surviving rows retain their original relative order.
pub fn apply_imbalance(ds: &Dataset, target_counts: &[usize], seed: u64) -> Result<Dataset> {
    if target_counts.len() != ds.n_classes {
        return Err(Error::InvalidArgument(alloc::format!(
            "{} target counts for {} classes",
            target_counts.len(),
            ds.n_classes
        )));
    }
    let mut rng = Rng::new(seed);
    let mut keep = Vec::new();
    for (c, &target) in target_counts.iter().enumerate() {
        let mut idx = ds.class_indices(c);
        if target > idx.len() {
            return Err(Error::Insufficient {
                class: c,
                requested: target,
                available: idx.len(),
            });
        }
        rng.shuffle(&mut idx);
        keep.extend_from_slice(&idx[..target]);
    }
    keep.sort_unstable();
    let mut out = ds.subset(&keep);
    out.notes = ds.notes.clone();
    Ok(out)
}

/// Hold out `per_class` random rows of every class; returns `(rest, held_out)`.
pub fn split_per_class(ds: &Dataset, per_class: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = Rng::new(seed);
    let mut test = Vec::new();
    for c in 0..ds.n_classes {
        let mut idx = ds.class_indices(c);
        if idx.len() < per_class {
            return Err(Error::Insufficient {
                class: c,
                requested: per_class,
                available: idx.len(),
            });
        }
        rng.shuffle(&mut idx);
        test.extend_from_slice(&idx[..per_class]);
    }
    Ok(partition(ds, test))
}

/// Stratified split holding out `fraction` (rounded) of every class.
pub fn split_stratified(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument("test fraction must be in [0, 1)".into()));
    }
    let mut rng = Rng::new(seed);
    let mut test = Vec::new();
    for c in 0..ds.n_classes {
        let mut idx = ds.class_indices(c);
        let take = libm::round(idx.len() as f64 * fraction) as usize;
        rng.shuffle(&mut idx);
        test.extend_from_slice(&idx[..take]);
    }
    Ok(partition(ds, test))
}

fn partition(ds: &Dataset, mut test: Vec<usize>) -> (Dataset, Dataset) {
    test.sort_unstable();
    let mut is_test = alloc::vec![false; ds.len()];
    for &i in &test {
        is_test[i] = true;
    }
    let train: Vec<usize> = (0..ds.len()).filter(|&i| !is_test[i]).collect();
    (ds.subset(&train), ds.subset(&test))
}
