//! Dense two-phase simplex for small linear programs in standard form
//!
//! ```text
//! minimize c^T x   subject to   A x = b,  x >= 0
//! ```
//!
//! Bland's rule is used for both entering and leaving variables, which
//! rules out cycling at the price of speed; the programs solved here have a
//! few hundred columns at most.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimize `cost` over the current basis; columns not in `allowed` never enter.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            // Reduced costs c_j - c_B^T B^{-1} A_j.
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for (r, &b) in self.basis.iter().enumerate() {
                    rc -= cost[b] * self.t[r][j];
                }
                if rc < -PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let rhs = self.cols;
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.t[r][rhs] / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, best)) => {
                            if ratio < best - 1e-12
                                || ((ratio - best).abs() <= 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                None => return false,
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

/// Solve the program; `a` is row-major `b.len() x c.len()`.
pub fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = b.len();
    let n = c.len();
    let cols = n + m;
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[cols] = sign * b[i];
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        cols,
    };
    let mut phase1 = vec![0.0; cols];
    for v in phase1.iter_mut().skip(n) {
        *v = 1.0;
    }
    let all = vec![true; cols];
    tab.optimize(&phase1, &all);
    let infeasibility: f64 = (0..m)
        .filter(|&r| tab.basis[r] >= n)
        .map(|r| tab.t[r][cols])
        .sum();
    if infeasibility > FEASIBILITY_EPS {
        return LpOutcome::Infeasible;
    }
    // Drive remaining (zero-valued) artificials out where possible.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[r][j].abs() > PIVOT_EPS && !tab.basis.contains(&j)) {
                tab.pivot(r, j);
            }
        }
    }
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(c);
    let mut allowed = vec![true; cols];
    for v in allowed.iter_mut().skip(n) {
        *v = false;
    }
    if !tab.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = tab.t[r][cols];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}
