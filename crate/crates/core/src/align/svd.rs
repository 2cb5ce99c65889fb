//! One-sided (Hestenes) Jacobi SVD.
//!
//! Columns of the working matrix are orthogonalized by plane rotations that
//! are accumulated into `V`. On convergence the column norms are the singular
//! values and the normalized columns form `U`.

use super::AlignError;
use crate::linalg::{dot, Matrix};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 60;

#[derive(Clone, Debug)]
pub struct Svd {
    /// rows x cols, orthonormal columns.
    pub u: Matrix,
    /// Non-negative, descending.
    pub sigma: Vec<f64>,
    /// cols x cols, orthogonal.
    pub v: Matrix,
    pub sweeps: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.sigma.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }
}

pub fn svd(m: &Matrix, tol: f64) -> Result<Svd, AlignError> {
    svd_with_budget(m, tol, DEFAULT_MAX_SWEEPS)
}

/// Requires `rows >= cols`. `tol` bounds the cosine between any two working
/// columns at convergence.
pub fn svd_with_budget(m: &Matrix, tol: f64, max_sweeps: usize) -> Result<Svd, AlignError> {
    let (rows, n) = (m.rows(), m.cols());
    if n == 0 || rows < n {
        return Err(AlignError::Shape(format!("svd needs rows >= cols >= 1, got {rows}x{n}")));
    }
    if !m.is_finite() {
        return Err(AlignError::NonFinite);
    }
    // Work on transposes so that columns are contiguous rows.
    let mut a = m.transpose();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    let negligible = (f64::EPSILON * scale).powi(2);

    let mut sweeps = 0;
    let mut converged = scale == 0.0;
    let mut off = 0.0;
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(a.row(p), a.row(p));
                let beta = dot(a.row(q), a.row(q));
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(a.row(p), a.row(q));
                let cosine = gamma.abs() / (alpha * beta).sqrt();
                off = off.max(cosine);
                if cosine <= tol {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = off <= tol;
    }
    if !converged {
        return Err(AlignError::NoConvergence { sweeps, off_diagonal: off });
    }

    let mut sigma: Vec<f64> = (0..n).map(|j| dot(a.row(j), a.row(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let smax = order.first().map_or(0.0, |&i| sigma[i]);
    let cutoff = smax * f64::EPSILON * rows as f64;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sorted = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for &j in &order {
        let s = sigma[j];
        sorted.push(s);
        if s > cutoff && s > 0.0 {
            u_cols.push(a.row(j).iter().map(|x| x / s).collect());
        } else {
            deficient.push(u_cols.len());
            u_cols.push(vec![0.0; rows]);
        }
        // `v` rows hold rotated basis vectors; row j is column j of V.
        v_cols.push(v.row(j).to_vec());
    }
    complete_basis(&mut u_cols, &deficient);
    sigma = sorted;

    let mut u = Matrix::zeros(rows, n);
    let mut vm = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..rows {
            u[(i, j)] = u_cols[j][i];
        }
        for i in 0..n {
            vm[(i, j)] = v_cols[j][i];
        }
    }
    Ok(Svd { u, sigma, v: vm, sweeps })
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    for k in 0..cols {
        let xp = m[(p, k)];
        let xq = m[(q, k)];
        m[(p, k)] = c * xp - s * xq;
        m[(q, k)] = s * xp + c * xq;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to all
/// others, by Gram-Schmidt over the standard basis.
fn complete_basis(cols: &mut [Vec<f64>], missing: &[usize]) {
    let dim = cols.first().map_or(0, Vec::len);
    let mut candidate = 0;
    for &m in missing {
        while candidate < dim {
            let mut e = vec![0.0; dim];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if j == m || (missing.contains(&j) && c.iter().all(|x| *x == 0.0)) {
                        continue;
                    }
                    let d = dot(&e, c);
                    e.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
                }
            }
            let n = dot(&e, &e).sqrt();
            if n > 1e-8 {
                cols[m] = e.into_iter().map(|x| x / n).collect();
                break;
            }
        }
    }
}
