//! Datasets, class priors, synthetic generators, the imbalance protocol and
//! SMOTE-style oversampling.

mod imbalance;
mod smote;
mod synth;

pub use imbalance::{apply_imbalance, split_per_class, split_stratified};
pub use smote::{random_oversample, smote_oversample};
pub use synth::{make_blobs, make_rings};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim, Error, Result};
use crate::tensor::Tensor;

/// Per-class sample counts used by the MNIST-style protocols
/// (majority first).
pub const MNIST_PROTOCOL_COUNTS: [usize; 10] = [5000, 4000, 3000, 2000, 1500, 1000, 500, 250, 100, 50];
/// Per-class counts of the CIFAR-style protocol (step 500).
pub const CIFAR_PROTOCOL_COUNTS: [usize; 10] =
    [5000, 4500, 4000, 3500, 3000, 2500, 2000, 1500, 1000, 500];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSpace {
    Raw,
    Extracted,
}

/// Metadata recorded while building or transforming a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Note {
    /// Adjacent rings closer than six noise deviations.
    OverlappingRings { inner: usize, outer: usize },
    /// SMOTE had a single sample for this class and fell back to jittered duplicates.
    SingletonFallback { class: usize },
    /// Class has no samples.
    Degenerate { class: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `[n x d]`
    pub features: Tensor,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub name: String,
    pub feature_space: FeatureSpace,
    /// Row was appended by a rebalancer.
    pub synthetic: Vec<bool>,
    pub notes: Vec<Note>,
}

impl Dataset {
    pub fn new(
        features: Tensor,
        labels: Vec<usize>,
        n_classes: usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        if features.shape().len() != 2 {
            return Err(Error::InvalidArgument("features must be a matrix".into()));
        }
        if labels.len() != features.rows() {
            return Err(dim("dataset labels", features.rows(), labels.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::UnknownClass {
                class: bad,
                n_classes,
            });
        }
        if !features.is_finite() {
            return Err(Error::NonFinite {
                what: "dataset features".into(),
                layer: None,
            });
        }
        let n = labels.len();
        let mut ds = Self {
            features,
            labels,
            n_classes,
            name: name.into(),
            feature_space: FeatureSpace::Raw,
            synthetic: vec![false; n],
            notes: Vec::new(),
        };
        for (c, &count) in ds.counts().iter().enumerate() {
            if count == 0 {
                ds.notes.push(Note::Degenerate { class: c });
            }
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }

    /// Feature rows of one class.
    pub fn class_features(&self, class: usize) -> Tensor {
        self.features.select_rows(&self.class_indices(class))
    }

    /// Rows `idx` in the given order; notes are not carried over.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            name: self.name.clone(),
            feature_space: self.feature_space,
            synthetic: idx.iter().map(|&i| self.synthetic[i]).collect(),
            notes: Vec::new(),
        }
    }

    /// Same labels, replaced features (e.g. after feature extraction).
    pub fn with_features(&self, features: Tensor, space: FeatureSpace) -> Result<Dataset> {
        if features.rows() != self.len() {
            return Err(dim("replacement features", self.len(), features.rows()));
        }
        Ok(Dataset {
            features,
            feature_space: space,
            ..self.clone()
        })
    }

    /// Append rows flagged as synthetic.
    pub fn append_synthetic(&mut self, features: &Tensor, labels: &[usize]) -> Result<()> {
        if features.rows() != labels.len() {
            return Err(dim("synthetic labels", features.rows(), labels.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.n_classes) {
            return Err(Error::UnknownClass {
                class: bad,
                n_classes: self.n_classes,
            });
        }
        self.features = self.features.vcat(features)?;
        self.labels.extend_from_slice(labels);
        self.synthetic.extend(labels.iter().map(|_| true));
        Ok(())
    }
}

/// Empirical class priors with their ascending ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPriors {
    pub priors: Vec<f64>,
    /// `ascending_order[r]` is the class with the `r`-th smallest prior; ties
    /// keep class-id order, so the majority is always the last entry.
    pub ascending_order: Vec<usize>,
}

impl ClassPriors {
    pub fn from_priors(priors: Vec<f64>) -> Result<Self> {
        let s: f64 = priors.iter().sum();
        if priors.is_empty() || (s - 1.0).abs() > 1e-9 || priors.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument(format!("priors must be a distribution, sum {s}")));
        }
        let mut order: Vec<usize> = (0..priors.len()).collect();
        order.sort_by(|&a, &b| priors[a].partial_cmp(&priors[b]).unwrap().then(a.cmp(&b)));
        Ok(Self {
            priors,
            ascending_order: order,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.priors.len()
    }

    /// The class `k` with the largest prior.
    pub fn majority(&self) -> usize {
        *self.ascending_order.last().expect("non-empty priors")
    }

    pub fn majority_prior(&self) -> f64 {
        self.priors[self.majority()]
    }
}

pub fn class_priors(ds: &Dataset) -> Result<ClassPriors> {
    if ds.is_empty() {
        return Err(Error::InvalidArgument("class priors of an empty dataset".into()));
    }
    let n = ds.len() as f64;
    ClassPriors::from_priors(ds.counts().iter().map(|&c| c as f64 / n).collect())
}

/// Per-feature `(min, max)` over all rows.
pub fn feature_ranges(features: &Tensor) -> Vec<(f64, f64)> {
    let d = features.cols();
    let mut r = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for i in 0..features.rows() {
        for (j, &v) in features.row(i).iter().enumerate() {
            r[j].0 = r[j].0.min(v);
            r[j].1 = r[j].1.max(v);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_counts(counts: &[usize]) -> Dataset {
        let labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| core::iter::repeat_n(c, n))
            .collect();
        let n = labels.len();
        Dataset::new(Tensor::zeros(&[n, 1]), labels, counts.len(), "t").unwrap()
    }

    #[test]
    fn balanced_priors() {
        let p = class_priors(&with_counts(&[50, 50])).unwrap();
        assert_eq!(p.priors, vec![0.5, 0.5]);
        assert_eq!(p.majority(), 1);
    }

    #[test]
    fn mnist_protocol_smallest_prior() {
        let total: usize = MNIST_PROTOCOL_COUNTS.iter().sum();
        assert_eq!(total, 17400);
        let p = class_priors(&with_counts(&MNIST_PROTOCOL_COUNTS)).unwrap();
        assert!((p.priors[9] - 50.0 / 17400.0).abs() < 1e-15);
        assert!((p.priors[9] - 0.00287).abs() < 1e-5);
        assert_eq!(p.ascending_order[0], 9);
        assert_eq!(p.majority(), 0);
        let s: f64 = p.priors.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_class() {
        let p = class_priors(&with_counts(&[7])).unwrap();
        assert_eq!(p.priors, vec![1.0]);
        assert_eq!(p.ascending_order, vec![0]);
    }

    #[test]
    fn rejects_bad_labels_and_nan() {
        assert!(Dataset::new(Tensor::zeros(&[1, 1]), vec![3], 2, "x").is_err());
        let t = Tensor::matrix(1, 1, vec![f64::NAN]).unwrap();
        assert!(Dataset::new(t, vec![0], 1, "x").is_err());
    }

    #[test]
    fn empty_class_marked_degenerate() {
        let ds = Dataset::new(Tensor::zeros(&[1, 1]), vec![0], 2, "x").unwrap();
        assert_eq!(ds.notes, vec![Note::Degenerate { class: 1 }]);
    }
}
