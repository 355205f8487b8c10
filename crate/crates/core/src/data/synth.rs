use alloc::format;
use alloc::vec::Vec;

use super::{Dataset, Note};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Isotropic Gaussian clusters, class `c` drawn around `centers[c]`.
pub fn make_blobs(
    n_per_class: &[usize],
    centers: &[Vec<f64>],
    stddev: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_class.is_empty() {
        return Err(Error::InvalidArgument("no classes requested".into()));
    }
    if centers.len() != n_per_class.len() {
        return Err(Error::InvalidArgument(format!(
            "{} centers for {} classes",
            centers.len(),
            n_per_class.len()
        )));
    }
    if !(stddev > 0.0) {
        return Err(Error::InvalidArgument("stddev must be positive".into()));
    }
    let d = centers[0].len();
    if d == 0 || centers.iter().any(|c| c.len() != d) {
        return Err(Error::InvalidArgument("centers must share a non-zero dimension".into()));
    }
    for i in 0..centers.len() {
        for j in 0..i {
            if centers[i] == centers[j] {
                return Err(Error::InvalidArgument(format!("centers {j} and {i} coincide")));
            }
        }
    }
    let mut rng = Rng::new(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, (&n, center)) in n_per_class.iter().zip(centers).enumerate() {
        for _ in 0..n {
            data.extend(center.iter().map(|&m| m + stddev * rng.normal()));
            labels.push(c);
        }
    }
    let n = labels.len();
    Dataset::new(Tensor::matrix(n, d, data)?, labels, n_per_class.len(), "blobs")
}

/// Concentric noisy circles in the plane, class `c` at radius `radii[c]`.
pub fn make_rings(n_per_class: &[usize], radii: &[f64], noise: f64, seed: u64) -> Result<Dataset> {
    if n_per_class.is_empty() || radii.len() != n_per_class.len() {
        return Err(Error::InvalidArgument("one radius per class required".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    if noise < 0.0 {
        return Err(Error::InvalidArgument("noise must be non-negative".into()));
    }
    let mut rng = Rng::new(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, (&n, &r)) in n_per_class.iter().zip(radii).enumerate() {
        for _ in 0..n {
            let theta = rng.uniform() * 2.0 * core::f64::consts::PI;
            let rr = if noise > 0.0 { r + noise * rng.normal() } else { r };
            data.push(rr * math::cos(theta));
            data.push(rr * math::sin(theta));
            labels.push(c);
        }
    }
    let n = labels.len();
    let mut ds = Dataset::new(Tensor::matrix(n, 2, data)?, labels, n_per_class.len(), "rings")?;
    for c in 1..radii.len() {
        if radii[c] - radii[c - 1] < 6.0 * noise {
            ds.notes.push(Note::OverlappingRings {
                inner: c - 1,
                outer: c,
            });
        }
    }
    Ok(ds)
}
