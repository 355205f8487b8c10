//! Convex-hull membership: exact polygon test in the plane, linear-program
//! feasibility in higher dimensions.

use alloc::vec;
use alloc::vec::Vec;

use crate::lp::{self, LpOutcome};
use crate::math;
use crate::tensor::Tensor;

/// Membership tolerance.
pub const HULL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullMembership {
    pub inside: bool,
    /// Signed distance to the hull boundary, negative outside.
    ///
    /// Exact for one and two dimensions. Above two dimensions the value is
    /// a conservative bound: outside it is minus the L-infinity distance to
    /// the hull, inside it is the inscribed cross-polytope radius divided by
    /// `sqrt(d)`.
    pub margin: f64,
}

#[derive(Debug, Clone)]
enum Shape {
    Empty,
    Interval(f64, f64),
    /// Counter-clockwise vertices; one or two entries for degenerate hulls.
    Polygon(Vec<[f64; 2]>),
    General(Tensor),
}

/// Hull of a point set, prepared once for repeated queries.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    shape: Shape,
    dim: usize,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear points are dropped.
fn monotone_chain(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    math::dist(&p, &[a[0] + t * ab[0], a[1] + t * ab[1]])
}

impl ConvexHull {
    /// Hull of the rows of `anchors`.
    pub fn new(anchors: &Tensor) -> Self {
        let dim = anchors.cols();
        let shape = if anchors.rows() == 0 {
            Shape::Empty
        } else if dim == 1 {
            let (lo, hi) = anchors
                .data()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            Shape::Interval(lo, hi)
        } else if dim == 2 {
            Shape::Polygon(monotone_chain(
                (0..anchors.rows()).map(|i| [anchors.get(i, 0), anchors.get(i, 1)]).collect(),
            ))
        } else {
            Shape::General(anchors.clone())
        };
        Self { shape, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polygon vertices in counter-clockwise order (planar hulls only).
    pub fn vertices(&self) -> Option<&[[f64; 2]]> {
        match &self.shape {
            Shape::Polygon(v) => Some(v),
            _ => None,
        }
    }

    pub fn membership(&self, point: &[f64]) -> HullMembership {
        let outside = |d: f64| HullMembership {
            inside: d <= HULL_TOLERANCE,
            margin: -d,
        };
        match &self.shape {
            Shape::Empty => HullMembership {
                inside: false,
                margin: f64::NEG_INFINITY,
            },
            Shape::Interval(lo, hi) => {
                let x = point[0];
                let margin = (x - lo).min(hi - x);
                HullMembership {
                    inside: margin >= -HULL_TOLERANCE,
                    margin,
                }
            }
            Shape::Polygon(v) => {
                let p = [point[0], point[1]];
                match v.len() {
                    1 => outside(math::dist(&p, &v[0])),
                    2 => outside(segment_distance(p, v[0], v[1])),
                    n => {
                        let mut min_signed = f64::INFINITY;
                        for k in 0..n {
                            let (a, b) = (v[k], v[(k + 1) % n]);
                            let len = math::dist(&a, &b);
                            min_signed = min_signed.min(cross(a, b, p) / len);
                        }
                        if min_signed >= -HULL_TOLERANCE {
                            HullMembership {
                                inside: true,
                                margin: min_signed,
                            }
                        } else {
                            let d = (0..n)
                                .map(|k| segment_distance(p, v[k], v[(k + 1) % n]))
                                .fold(f64::INFINITY, f64::min);
                            HullMembership {
                                inside: d <= HULL_TOLERANCE,
                                margin: -d,
                            }
                        }
                    }
                }
            }
            Shape::General(anchors) => general_membership(anchors, point),
        }
    }
}

/// Minimum L-infinity residual `max_i |(A^T lambda - p)_i|` over the simplex.
fn linf_residual(anchors: &Tensor, point: &[f64]) -> f64 {
    let (b, d) = (anchors.rows(), anchors.cols());
    // Columns: lambda (b) | s | slack_lo (d) | slack_hi (d)
    let n = b + 1 + 2 * d;
    let mut a = Vec::with_capacity(2 * d + 1);
    let mut rhs = Vec::with_capacity(2 * d + 1);
    for i in 0..d {
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for j in 0..b {
            lo[j] = anchors.get(j, i);
            hi[j] = anchors.get(j, i);
        }
        // A^T lambda - s + slack = p   (residual <= s)
        lo[b] = -1.0;
        lo[b + 1 + i] = 1.0;
        // A^T lambda + s - slack = p   (residual >= -s)
        hi[b] = 1.0;
        hi[b + 1 + d + i] = -1.0;
        a.push(lo);
        rhs.push(point[i]);
        a.push(hi);
        rhs.push(point[i]);
    }
    let mut simplex = vec![0.0; n];
    simplex[..b].iter_mut().for_each(|v| *v = 1.0);
    a.push(simplex);
    rhs.push(1.0);
    let mut c = vec![0.0; n];
    c[b] = 1.0;
    match lp::solve(&c, &a, &rhs) {
        LpOutcome::Optimal { value, .. } => value.max(0.0),
        _ => f64::INFINITY,
    }
}

/// Largest `t` with `point + t * dir` in the hull.
fn ray_depth(anchors: &Tensor, point: &[f64], axis: usize, sign: f64) -> f64 {
    let (b, d) = (anchors.rows(), anchors.cols());
    let n = b + 1;
    let mut a = Vec::with_capacity(d + 1);
    let mut rhs = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut row = vec![0.0; n];
        for j in 0..b {
            row[j] = anchors.get(j, i);
        }
        if i == axis {
            row[b] = -sign;
        }
        a.push(row);
        rhs.push(point[i]);
    }
    let mut simplex = vec![1.0; n];
    simplex[b] = 0.0;
    a.push(simplex);
    rhs.push(1.0);
    let mut c = vec![0.0; n];
    c[b] = -1.0;
    match lp::solve(&c, &a, &rhs) {
        LpOutcome::Optimal { value, .. } => (-value).max(0.0),
        _ => 0.0,
    }
}

fn general_membership(anchors: &Tensor, point: &[f64]) -> HullMembership {
    let residual = linf_residual(anchors, point);
    if residual > HULL_TOLERANCE {
        return HullMembership {
            inside: false,
            margin: -residual,
        };
    }
    let d = anchors.cols();
    let mut depth = f64::INFINITY;
    for axis in 0..d {
        for sign in [1.0, -1.0] {
            depth = depth.min(ray_depth(anchors, point, axis, sign));
        }
    }
    HullMembership {
        inside: true,
        margin: depth / math::sqrt(d as f64),
    }
}

/// One-shot membership of `point` in the hull of the rows of `anchors`.
pub fn hull_membership(point: &[f64], anchors: &Tensor) -> HullMembership {
    ConvexHull::new(anchors).membership(point)
}
