//! Exact earth-mover distance between discrete distributions.
//!
//! The optimal plan is found with the transportation simplex (northwest
//! corner start, potentials for pricing, cycle pivots on the basis tree).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim, Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => math::dist(a, b),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

/// Mass moved between support points: `flow[i][j]` from `p_i` to `q_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub flow: Vec<Vec<f64>>,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.flow.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.flow.first().map_or(0, |r| r.len());
        (0..n).map(|j| self.flow.iter().map(|r| r[j]).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emd {
    pub distance: f64,
    pub plan: TransportPlan,
}

fn check_distribution(name: &str, d: &[f64]) -> Result<f64> {
    let s: f64 = d.iter().sum();
    if d.is_empty() || (s - 1.0).abs() > 1e-6 || d.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "{name} is not a distribution (sum {s})"
        )));
    }
    Ok(s)
}

/// Exact optimal-transport cost between `p` on the rows of `p_support` and
/// `q` on the rows of `q_support`.
pub fn emd_discrete(
    p: &[f64],
    p_support: &Tensor,
    q: &[f64],
    q_support: &Tensor,
    metric: Metric,
) -> Result<Emd> {
    if p.len() != p_support.rows() {
        return Err(dim("p support", p.len(), p_support.rows()));
    }
    if q.len() != q_support.rows() {
        return Err(dim("q support", q.len(), q_support.rows()));
    }
    if p_support.cols() != q_support.cols() {
        return Err(dim("support dimension", p_support.cols(), q_support.cols()));
    }
    let sp = check_distribution("p", p)?;
    let sq = check_distribution("q", q)?;
    let rows: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let cols: Vec<usize> = (0..q.len()).filter(|&j| q[j] > 0.0).collect();
    let supply: Vec<f64> = rows.iter().map(|&i| p[i]).collect();
    // Rescale q so both sides carry identical total mass.
    let demand: Vec<f64> = cols.iter().map(|&j| q[j] * sp / sq).collect();
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| metric.distance(p_support.row(i), q_support.row(j)))
                .collect()
        })
        .collect();
    let reduced = transport(&supply, &demand, &cost);
    let mut flow = vec![vec![0.0; q.len()]; p.len()];
    let mut distance = 0.0;
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            flow[i][j] = reduced[a][b];
            distance += reduced[a][b] * cost[a][b];
        }
    }
    Ok(Emd {
        distance,
        plan: TransportPlan { flow },
    })
}

/// Balanced transportation problem; returns the optimal flow matrix.
fn transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, n) = (supply.len(), demand.len());
    let mut flow = vec![vec![0.0; n]; m];
    let mut basic = vec![vec![false; n]; m];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);

    // Northwest corner: a staircase of exactly m + n - 1 cells.
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]);
        flow[i][j] = x;
        basic[i][j] = true;
        basis.push((i, j));
        if i == m - 1 && j == n - 1 {
            break;
        }
        let row_done = s[i] <= d[j];
        if (row_done && i < m - 1) || j == n - 1 {
            d[j] -= x;
            s[i] = 0.0;
            i += 1;
        } else {
            s[i] -= x;
            d[j] = 0.0;
            j += 1;
        }
    }

    let scale = cost
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &c| a.max(c.abs()))
        .max(1.0);
    let tol = 1e-12 * scale;
    let max_iter = 50 * (m + n) * (m + n) + 100;
    for _ in 0..max_iter {
        let (u, v) = potentials(m, n, &basis, cost);
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..m {
            for b in 0..n {
                if basic[a][b] {
                    continue;
                }
                let rc = cost[a][b] - u[a] - v[b];
                if rc < -tol && best.is_none_or(|(_, _, r)| rc < r) {
                    best = Some((a, b, rc));
                }
            }
        }
        let Some((ei, ej, _)) = best else {
            break;
        };
        let path = tree_path(m, n, &basis, ei, ej);
        // path alternates: first cell shares row ei (sign -), then +, -, ...
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &bi) in path.iter().enumerate() {
            if k % 2 == 0 {
                let (a, b) = basis[bi];
                if flow[a][b] < theta {
                    theta = flow[a][b];
                    leave = bi;
                }
            }
        }
        for (k, &bi) in path.iter().enumerate() {
            let (a, b) = basis[bi];
            if k % 2 == 0 {
                flow[a][b] -= theta;
            } else {
                flow[a][b] += theta;
            }
        }
        flow[ei][ej] = theta;
        let (la, lb) = basis[leave];
        flow[la][lb] = 0.0;
        basic[la][lb] = false;
        basic[ei][ej] = true;
        basis[leave] = (ei, ej);
    }
    for row in flow.iter_mut() {
        for x in row.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }
    flow
}

/// Dual potentials with `u[0] = 0` and `u_i + v_j = c_ij` on basic cells.
fn potentials(m: usize, n: usize, basis: &[(usize, usize)], cost: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    let adj = adjacency(m, n, basis);
    u[0] = 0.0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        for &(other, _) in &adj[node] {
            if node < m {
                let j = other - m;
                if v[j].is_nan() {
                    v[j] = cost[node][j] - u[node];
                    queue.push_back(other);
                }
            } else if u[other].is_nan() {
                u[other] = cost[other][node - m] - v[node - m];
                queue.push_back(other);
            }
        }
    }
    (u, v)
}

/// Node adjacency of the basis tree; rows are nodes `0..m`, columns `m..m+n`.
fn adjacency(m: usize, n: usize, basis: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (k, &(i, j)) in basis.iter().enumerate() {
        adj[i].push((m + j, k));
        adj[m + j].push((i, k));
    }
    adj
}

/// Basis cells on the tree path from row node `ei` to column node `ej`.
fn tree_path(m: usize, n: usize, basis: &[(usize, usize)], ei: usize, ej: usize) -> Vec<usize> {
    let adj = adjacency(m, n, basis);
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[ei] = true;
    let mut queue = VecDeque::from([ei]);
    let target = m + ej;
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        for &(other, k) in &adj[node] {
            if !seen[other] {
                seen[other] = true;
                prev[other] = Some((node, k));
                queue.push_back(other);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = target;
    while let Some((p, k)) = prev[node] {
        path.push(k);
        node = p;
    }
    path.reverse();
    path
}

/// Exact 1-D EMD between two equally weighted samples, as the integral of
/// the absolute difference of their empirical CDFs.
pub fn emd_1d_samples(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    let mut last = xa[0].min(xb[0]);
    while i < xa.len() || j < xb.len() {
        let next = match (xa.get(i), xb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - last);
        while i < xa.len() && xa[i] <= next {
            i += 1;
        }
        while j < xb.len() && xb[j] <= next {
            j += 1;
        }
        last = next;
    }
    total
}

/// Sliced EMD: mean exact 1-D EMD over `n_proj` seeded random unit directions.
pub fn distribution_shift(real: &Tensor, generated: &Tensor, n_proj: usize, seed: u64) -> Result<f64> {
    if real.rows() == 0 || generated.rows() == 0 {
        return Err(Error::InvalidArgument("distribution shift needs non-empty sets".into()));
    }
    if real.cols() != generated.cols() {
        return Err(dim("generated features", real.cols(), generated.cols()));
    }
    let mut rng = Rng::new(seed);
    let mut total = 0.0;
    for _ in 0..n_proj.max(1) {
        let dir = rng.unit_vector(real.cols());
        let pa: Vec<f64> = (0..real.rows()).map(|i| math::dot(real.row(i), &dir)).collect();
        let pb: Vec<f64> = (0..generated.rows()).map(|i| math::dot(generated.row(i), &dir)).collect();
        total += emd_1d_samples(&pa, &pb);
    }
    Ok(total / n_proj.max(1) as f64)
}
