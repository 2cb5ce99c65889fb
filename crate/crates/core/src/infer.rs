//! Logistic GLM by IRLS, Wald tests, the Wilcoxon signed-rank test and
//! variance inflation factors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cholesky_solve, dot, norm, spd_inverse, Matrix};
use crate::select::average_ranks;

#[derive(Debug, Error, PartialEq)]
pub enum InferError {
    #[error("design has {rows} rows for {cols} columns; need more rows than columns")]
    TooFewRows { rows: usize, cols: usize },
    #[error("{names} column names for {cols} design columns")]
    Names { names: usize, cols: usize },
    #[error("labels have {labels} entries for {rows} design rows")]
    LabelLength { labels: usize, rows: usize },
    #[error("labels must be 0 or 1 and contain both classes")]
    Labels,
    #[error("design or labels contain non-finite values")]
    NonFinite,
    #[error("design is rank deficient: {} depend on earlier columns", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("complete separation: coefficients diverge (norm {norm:.3e} after {iterations} iterations)")]
    Separation { norm: f64, iterations: usize },
    #[error("all differences are zero; the signed-rank test is undefined")]
    AllZero,
}

/// Column-named design matrix; column 0 is the intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub x: Matrix,
}

impl Design {
    /// Prepends an intercept column to the given feature columns.
    pub fn with_intercept(features: &[(&str, &[f64])]) -> Self {
        let n = features.first().map_or(0, |f| f.1.len());
        let p = features.len() + 1;
        let mut x = Matrix::zeros(n, p);
        for i in 0..n {
            x[(i, 0)] = 1.0;
            for (j, (_, col)) in features.iter().enumerate() {
                x[(i, j + 1)] = col[i];
            }
        }
        let mut names = vec!["intercept".to_string()];
        names.extend(features.iter().map(|f| f.0.to_string()));
        Self { names, x }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlsOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100 }
    }
}

/// Norm beyond which diverging coefficients are reported as separation.
pub const SEPARATION_NORM: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    #[serde(default)]
    pub tau: Option<f64>,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted step, starting from the null
    /// coefficient vector.
    pub ll_history: Vec<f64>,
    pub n: usize,
}

impl GlmFit {
    pub fn coefficient(&self, name: &str) -> Option<(f64, f64)> {
        let j = self.names.iter().position(|n| n == name)?;
        Some((self.coefficients[j], self.p_values[j]))
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^eta)` without overflow.
fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

pub fn log_likelihood(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    (0..x.rows())
        .map(|i| {
            let eta = dot(x.row(i), beta);
            y[i] * eta - softplus(eta)
        })
        .sum()
}

/// Gradient and Fisher information of the Bernoulli log-likelihood.
fn score_and_information(x: &Matrix, y: &[f64], beta: &[f64]) -> (Vec<f64>, Matrix, f64) {
    let p = x.cols();
    let mut grad = vec![0.0; p];
    let mut info = Matrix::zeros(p, p);
    let mut max_resid: f64 = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let mu = sigmoid(dot(row, beta));
        let r = y[i] - mu;
        max_resid = max_resid.max(r.abs());
        let w = mu * (1.0 - mu);
        for a in 0..p {
            grad[a] += row[a] * r;
            for b in 0..=a {
                info[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (grad, info, max_resid)
}

/// Columns that are (numerically) linear combinations of earlier columns.
pub fn dependent_columns(x: &Matrix) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..x.cols() {
        let mut c = x.column(j);
        let scale = norm(&c);
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&c, b);
                c.iter_mut().zip(b).for_each(|(v, w)| *v -= d * w);
            }
        }
        let r = norm(&c);
        if r <= 1e-9 * scale.max(1.0) {
            dependent.push(j);
        } else {
            basis.push(c.into_iter().map(|v| v / r).collect());
        }
    }
    dependent
}

/// Maximum-likelihood logistic regression by Fisher scoring with step
/// halving. Converges when the largest coefficient change falls below `tol`.
pub fn fit_logistic_irls(design: &Design, y: &[f64], options: IrlsOptions) -> Result<GlmFit, InferError> {
    let x = &design.x;
    let (n, p) = (x.rows(), x.cols());
    if design.names.len() != p {
        return Err(InferError::Names { names: design.names.len(), cols: p });
    }
    if y.len() != n {
        return Err(InferError::LabelLength { labels: y.len(), rows: n });
    }
    if n <= p {
        return Err(InferError::TooFewRows { rows: n, cols: p });
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(InferError::NonFinite);
    }
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    if y.iter().any(|&v| v != 0.0 && v != 1.0) || positives == 0 || positives == n {
        return Err(InferError::Labels);
    }
    let dependent = dependent_columns(x);
    if !dependent.is_empty() {
        return Err(InferError::RankDeficient {
            columns: dependent.iter().map(|&j| design.names[j].clone()).collect(),
        });
    }

    let mut beta = vec![0.0; p];
    let mut ll = log_likelihood(x, y, &beta);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        iterations += 1;
        let (grad, info, max_resid) = score_and_information(x, y, &beta);
        let separated = |beta: &[f64]| InferError::Separation { norm: norm(beta), iterations };
        if max_resid < 1e-6 {
            return Err(separated(&beta));
        }
        let Some(step) = cholesky_solve(&info, &grad) else {
            return Err(separated(&beta));
        };
        let mut scale = 1.0;
        let mut candidate: Vec<f64>;
        let mut cand_ll;
        loop {
            candidate = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            cand_ll = log_likelihood(x, y, &candidate);
            if cand_ll >= ll || scale < 1e-10 {
                break;
            }
            scale *= 0.5;
        }
        if cand_ll < ll {
            // No ascent along the Newton direction: at the optimum to
            // working precision.
            converged = true;
            break;
        }
        let change = beta.iter().zip(&candidate).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        beta = candidate;
        ll = cand_ll;
        history.push(ll);
        if norm(&beta) > SEPARATION_NORM {
            return Err(separated(&beta));
        }
        if change < options.tol {
            converged = true;
            break;
        }
    }

    let (_, info, _) = score_and_information(x, y, &beta);
    let cov = spd_inverse(&info).ok_or(InferError::Separation { norm: norm(&beta), iterations })?;
    let std_errors: Vec<f64> = (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let z: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = beta.iter().zip(&std_errors).map(|(&b, &s)| wald_pvalue(b, s)).collect();
    Ok(GlmFit {
        tau: None,
        names: design.names.clone(),
        coefficients: beta,
        std_errors,
        z,
        p_values,
        iterations,
        converged,
        log_likelihood: ll,
        ll_history: history,
        n,
    })
}

/// Upper tail of the standard normal distribution.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Two-sided Wald p-value `2 * P(Z > |beta / se|)`.
pub fn wald_pvalue(coefficient: f64, standard_error: f64) -> f64 {
    (2.0 * normal_sf((coefficient / standard_error).abs())).min(1.0)
}

/// Largest sample without zeros for which the exact null distribution is used.
pub const WILCOXON_EXACT_MAX: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub w_plus: f64,
    /// Non-zero differences.
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

fn signed_ranks(diffs: &[f64]) -> Result<(Vec<f64>, Vec<bool>), InferError> {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    if nz.is_empty() {
        return Err(InferError::AllZero);
    }
    let ranks = average_ranks(&nz.iter().map(|d| d.abs()).collect::<Vec<_>>());
    Ok((ranks, nz.iter().map(|d| *d > 0.0).collect()))
}

/// Two-sided signed-rank test with zeros dropped. Small samples use the exact
/// permutation distribution, larger ones the tie- and continuity-corrected
/// normal approximation.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<WilcoxonResult, InferError> {
    let (ranks, positive) = signed_ranks(diffs)?;
    let n = ranks.len();
    let w_plus: f64 = ranks.iter().zip(&positive).filter(|p| *p.1).map(|p| p.0).sum();
    if n <= WILCOXON_EXACT_MAX {
        return Ok(WilcoxonResult { w_plus, n, p_value: exact_p(&ranks, w_plus), exact: true });
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut sorted = ranks.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let dev = ((w_plus - mean).abs() - 0.5).max(0.0);
    let p_value = (2.0 * normal_sf(dev / var.sqrt())).min(1.0);
    Ok(WilcoxonResult { w_plus, n, p_value, exact: false })
}

/// Exact two-sided p-value of `w_plus` under random signs on `ranks`.
/// Ranks are integers or half-integers, so doubled sums index a count table.
pub fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = counts[..=w.min(total)].iter().sum();
    let upper: f64 = counts[w.min(total + 1)..].iter().sum();
    (2.0 * lower.min(upper) / all).min(1.0)
}

/// Variance inflation factor of each non-intercept column (column 0 is the
/// intercept). Columns explained exactly by the others get `f64::INFINITY`.
pub fn vif(design: &Design) -> Result<Vec<f64>, InferError> {
    let x = &design.x;
    let (n, p) = (x.rows(), x.cols());
    if n <= p {
        return Err(InferError::TooFewRows { rows: n, cols: p });
    }
    Ok((1..p)
        .map(|j| {
            let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
            let target = x.column(j);
            let mean = target.iter().sum::<f64>() / n as f64;
            let ss_tot: f64 = target.iter().map(|v| (v - mean).powi(2)).sum();
            if ss_tot == 0.0 {
                return f64::INFINITY;
            }
            let q = others.len();
            let mut xtx = Matrix::zeros(q, q);
            let mut xty = vec![0.0; q];
            for i in 0..n {
                let row = x.row(i);
                for (a, &ka) in others.iter().enumerate() {
                    xty[a] += row[ka] * target[i];
                    for (b, &kb) in others.iter().enumerate() {
                        xtx[(a, b)] += row[ka] * row[kb];
                    }
                }
            }
            let Some(coef) = cholesky_solve(&xtx, &xty) else {
                return f64::INFINITY;
            };
            let ss_res: f64 = (0..n)
                .map(|i| {
                    let row = x.row(i);
                    let fit: f64 = others.iter().zip(&coef).map(|(&k, c)| row[k] * c).sum();
                    (target[i] - fit).powi(2)
                })
                .sum();
            if ss_res <= 1e-12 * ss_tot {
                f64::INFINITY
            } else {
                ss_tot / ss_res
            }
        })
        .collect())
}
