use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// No support and no predictions: F1 is reported as 0.
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    /// Unweighted mean of per-class recall over classes with support.
    pub average_accuracy: f64,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<usize>>,
}

pub fn f1_report(predictions: &[usize], labels: &[usize], n_classes: usize) -> Result<MetricsReport> {
    if predictions.len() != labels.len() {
        return Err(dim("predictions", labels.len(), predictions.len()));
    }
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        if p >= n_classes || y >= n_classes {
            return Err(Error::UnknownClass {
                class: p.max(y),
                n_classes,
            });
        }
        confusion[y][p] += 1;
    }
    let mut per_class = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let tp = confusion[c][c] as f64;
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = confusion.iter().map(|r| r[c]).sum();
        let fn_ = support as f64 - tp;
        let fp = predicted as f64 - tp;
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if support > 0 { tp / support as f64 } else { 0.0 };
        let denom = tp + 0.5 * (fp + fn_);
        let f1 = if denom > 0.0 { tp / denom } else { 0.0 };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
            undefined: support == 0 && predicted == 0,
        });
    }
    let macro_f1 = if n_classes > 0 {
        per_class.iter().map(|m| m.f1).sum::<f64>() / n_classes as f64
    } else {
        0.0
    };
    let supported: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
    let average_accuracy = if supported.is_empty() {
        0.0
    } else {
        supported.iter().map(|m| m.recall).sum::<f64>() / supported.len() as f64
    };
    Ok(MetricsReport {
        per_class,
        macro_f1,
        average_accuracy,
        confusion,
    })
}
