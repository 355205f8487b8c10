use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Per-class anchor sets the generator mixes over.
///
/// Anchors are stored both as row indices into the training set and as the
/// feature rows themselves, so they can be refreshed when the feature map
/// changes without losing provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBank {
    capacity: usize,
    indices: Vec<Vec<usize>>,
    anchors: Vec<Tensor>,
}

impl ClassBank {
    /// Draws `min(n_c, capacity)` distinct rows per class.
    pub fn draw(
        features: &Tensor,
        labels: &[usize],
        n_classes: usize,
        capacity: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("bank size must be at least 1".into()));
        }
        let mut indices = Vec::with_capacity(n_classes);
        for c in 0..n_classes {
            let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            rng.shuffle(&mut rows);
            rows.truncate(capacity);
            rows.sort_unstable();
            indices.push(rows);
        }
        Self::from_indices(features, indices, capacity)
    }

    pub fn from_indices(features: &Tensor, indices: Vec<Vec<usize>>, capacity: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().flatten().find(|&&i| i >= features.rows()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "bank index {bad} outside dataset of {} rows",
                features.rows()
            )));
        }
        if indices.iter().any(|ix| ix.len() > capacity) {
            return Err(Error::InvalidArgument("bank class exceeds capacity".into()));
        }
        let anchors = indices.iter().map(|ix| features.select_rows(ix)).collect();
        Ok(Self {
            capacity,
            indices,
            anchors,
        })
    }

    /// Redraws every class from scratch.
    pub fn redraw(&mut self, features: &Tensor, labels: &[usize], rng: &mut Rng) -> Result<()> {
        *self = Self::draw(features, labels, self.indices.len(), self.capacity, rng)?;
        Ok(())
    }

    /// Re-reads anchor rows after the feature map changed.
    pub fn refresh(&mut self, features: &Tensor) {
        for (a, ix) in self.anchors.iter_mut().zip(&self.indices) {
            *a = features.select_rows(ix);
        }
    }

    /// Mixing width `B`: the softmax head always emits this many weights.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_classes(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self, class: usize) -> &[usize] {
        &self.indices[class]
    }

    pub fn all_indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn size(&self, class: usize) -> usize {
        self.indices.get(class).map_or(0, Vec::len)
    }

    pub fn anchors(&self, class: usize) -> Result<&Tensor> {
        let n_classes = self.n_classes();
        let a = self.anchors.get(class).ok_or(Error::UnknownClass { class, n_classes })?;
        if a.rows() == 0 {
            return Err(Error::EmptyBank { class });
        }
        Ok(a)
    }

    /// Folds `capacity` mixing weights onto the class's `B_c` anchors:
    /// weight `j` lands on anchor `j mod B_c`.
    pub fn fold(&self, class: usize, weights: &[f64]) -> Result<Vec<f64>> {
        let b = self.anchors(class)?.rows();
        let mut folded = alloc::vec![0.0; b];
        for (j, &w) in weights.iter().enumerate() {
            folded[j % b] += w;
        }
        Ok(folded)
    }

    /// Convex combination of the class anchors under (unfolded) weights.
    pub fn combine(&self, class: usize, weights: &[f64]) -> Result<Vec<f64>> {
        let a = self.anchors(class)?;
        let b = a.rows();
        let mut out = alloc::vec![0.0; a.cols()];
        for (j, &w) in weights.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(a.row(j % b)) {
                *o += w * x;
            }
        }
        Ok(out)
    }
}
