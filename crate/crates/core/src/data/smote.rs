use alloc::vec::Vec;

use super::{feature_ranges, Dataset, Note};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Relative jitter used when a class has a single sample.
const SINGLETON_JITTER: f64 = 0.01;

fn check_targets(ds: &Dataset, target_counts: &[usize]) -> Result<Vec<usize>> {
    if target_counts.len() != ds.n_classes {
        return Err(Error::InvalidArgument(alloc::format!(
            "{} target counts for {} classes",
            target_counts.len(),
            ds.n_classes
        )));
    }
    let counts = ds.counts();
    for (c, (&have, &want)) in counts.iter().zip(target_counts).enumerate() {
        if want < have {
            return Err(Error::InvalidArgument(alloc::format!(
                "class {c}: target {want} below current count {have}"
            )));
        }
        if want > have && have == 0 {
            return Err(Error::Insufficient {
                class: c,
                requested: want,
                available: 0,
            });
        }
    }
    Ok(counts)
}

/// `k` nearest same-class neighbours of every member (excluding itself).
fn neighbours(points: &Tensor, k: usize) -> Vec<Vec<usize>> {
    let n = points.rows();
    (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (math::dist(points.row(i), points.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Interpolate new minority rows `x + u (x_nn - x)` between same-class
/// neighbours until every class reaches its target count.
pub fn smote_oversample(ds: &Dataset, k: usize, target_counts: &[usize], seed: u64) -> Result<Dataset> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let counts = check_targets(ds, target_counts)?;
    let ranges = feature_ranges(&ds.features);
    let mut rng = Rng::new(seed);
    let mut out = ds.clone();
    for c in 0..ds.n_classes {
        let need = target_counts[c] - counts[c];
        if need == 0 {
            continue;
        }
        let members = ds.class_features(c);
        let d = members.cols();
        let mut rows = Vec::with_capacity(need * d);
        if members.rows() == 1 {
            out.notes.push(Note::SingletonFallback { class: c });
            let x = members.row(0);
            for _ in 0..need {
                for (j, &v) in x.iter().enumerate() {
                    let span = ranges[j].1 - ranges[j].0;
                    let span = if span > 0.0 { span } else { 1.0 };
                    rows.push(v + SINGLETON_JITTER * span * rng.normal());
                }
            }
        } else {
            let nn = neighbours(&members, k.min(members.rows() - 1));
            for _ in 0..need {
                let i = rng.index(members.rows());
                let j = nn[i][rng.index(nn[i].len())];
                let u = rng.uniform();
                let (xi, xj) = (members.row(i), members.row(j));
                rows.extend(xi.iter().zip(xj).map(|(a, b)| a + u * (b - a)));
            }
        }
        let synth = Tensor::matrix(need, d, rows)?;
        out.append_synthetic(&synth, &alloc::vec![c; need])?;
    }
    Ok(out)
}

/// Duplicate random rows of each class until targets are met.
pub fn random_oversample(ds: &Dataset, target_counts: &[usize], seed: u64) -> Result<Dataset> {
    let counts = check_targets(ds, target_counts)?;
    let mut rng = Rng::new(seed);
    let mut out = ds.clone();
    for c in 0..ds.n_classes {
        let need = target_counts[c] - counts[c];
        if need == 0 {
            continue;
        }
        let idx = ds.class_indices(c);
        let pick: Vec<usize> = (0..need).map(|_| idx[rng.index(idx.len())]).collect();
        out.append_synthetic(&ds.features.select_rows(&pick), &alloc::vec![c; need])?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn segment_interpolation() {
        let ds = Dataset::new(
            Tensor::matrix(3, 2, vec![0.0, 0.0, 2.0, 0.0, 9.0, 9.0]).unwrap(),
            vec![0, 0, 1],
            2,
            "seg",
        )
        .unwrap();
        let out = smote_oversample(&ds, 1, &[50, 1], 3).unwrap();
        assert_eq!(out.counts(), vec![50, 1]);
        for i in 3..out.len() {
            let r = out.features.row(i);
            assert_eq!(out.labels[i], 0);
            assert!(out.synthetic[i]);
            assert_eq!(r[1], 0.0);
            assert!((0.0..=2.0).contains(&r[0]));
        }
        assert!(!out.synthetic[..3].iter().any(|&s| s));
    }

    #[test]
    fn target_equal_is_noop() {
        let ds = Dataset::new(Tensor::zeros(&[2, 1]), vec![0, 1], 2, "x").unwrap();
        assert_eq!(smote_oversample(&ds, 3, &[1, 1], 0).unwrap(), ds);
    }

    #[test]
    fn singleton_falls_back_to_jitter() {
        let ds = Dataset::new(
            Tensor::matrix(3, 1, vec![0.0, 1.0, 10.0]).unwrap(),
            vec![0, 0, 1],
            2,
            "x",
        )
        .unwrap();
        let out = smote_oversample(&ds, 2, &[2, 5], 1).unwrap();
        assert!(out.notes.contains(&Note::SingletonFallback { class: 1 }));
        for i in 3..7 {
            assert!((out.features.row(i)[0] - 10.0).abs() < 1.0);
        }
    }

    #[test]
    fn shrinking_target_rejected() {
        let ds = Dataset::new(Tensor::zeros(&[2, 1]), vec![0, 0], 1, "x").unwrap();
        assert!(smote_oversample(&ds, 1, &[1], 0).is_err());
        assert!(random_oversample(&ds, &[1], 0).is_err());
    }
}
