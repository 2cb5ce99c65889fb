//! Orthogonal Procrustes alignment of the MODERN space onto HISTORICAL
//! coordinates. Words are rows and the rotation is applied on the right:
//! `aligned = modern · R`.

pub mod svd;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbeddingSpace;
use crate::linalg::{norm, Matrix};

pub use svd::{svd, Svd};

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("the two spaces share no vocabulary")]
    NoAnchors,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("SVD did not converge after {sweeps} sweeps (max column cosine {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("{0}")]
    Shape(String),
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignOptions {
    /// Unit-normalize anchor rows before fitting. Off by default.
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotationMap {
    pub rotation: Matrix,
    pub anchor_count: usize,
    /// Frobenius norm of `anchors_modern · R - anchors_historical`.
    pub residual: f64,
}

impl RotationMap {
    pub fn identity(dim: usize) -> Self {
        Self { rotation: Matrix::identity(dim), anchor_count: 0, residual: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.rotation.rows()
    }

    /// Max-abs entry of `RᵀR - I`.
    pub fn orthogonality_error(&self) -> f64 {
        self.rotation.t_matmul(&self.rotation).sub(&Matrix::identity(self.dim())).max_abs()
    }

    pub fn write_text(&self, path: &Path) -> Result<(), AlignError> {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {:.16e}", self.dim(), self.anchor_count, self.residual);
        for i in 0..self.dim() {
            let row: Vec<String> = self.rotation.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        fs::write(path, out).map_err(|source| AlignError::Io { path: path.to_path_buf(), source })
    }

    pub fn read_text(path: &Path) -> Result<Self, AlignError> {
        let text =
            fs::read_to_string(path).map_err(|source| AlignError::Io { path: path.to_path_buf(), source })?;
        let fail = |line: usize, message: &str| AlignError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        let (Some(d), Some(n), Some(r)) = (
            header.first().and_then(|t| t.parse::<usize>().ok()),
            header.get(1).and_then(|t| t.parse::<usize>().ok()),
            header.get(2).and_then(|t| t.parse::<f64>().ok()),
        ) else {
            return Err(fail(1, "header must be `<dim> <anchor_count> <residual>`"));
        };
        let mut data = Vec::with_capacity(d * d);
        for (i, line) in lines.take(d).enumerate() {
            let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let row = row.map_err(|_| fail(i + 2, "bad matrix entry"))?;
            if row.len() != d {
                return Err(fail(i + 2, &format!("expected {d} entries")));
            }
            data.extend(row);
        }
        if data.len() != d * d {
            return Err(fail(d + 1, "truncated matrix"));
        }
        Ok(Self { rotation: Matrix::from_vec(d, d, data), anchor_count: n, residual: r })
    }
}

/// Orthogonal `R` minimising `‖modern · R − historical‖_F` for row-aligned
/// anchor matrices: with `modernᵀ · historical = U Σ Vᵀ`, `R = U Vᵀ`.
pub fn fit_rotation(modern: &Matrix, historical: &Matrix) -> Result<RotationMap, AlignError> {
    if modern.cols() != historical.cols() {
        return Err(AlignError::DimensionMismatch { expected: historical.cols(), found: modern.cols() });
    }
    if modern.rows() != historical.rows() {
        return Err(AlignError::Shape("anchor matrices must have the same number of rows".into()));
    }
    if modern.rows() == 0 {
        return Err(AlignError::NoAnchors);
    }
    let cross = modern.t_matmul(historical);
    let dec = svd(&cross, svd::DEFAULT_TOL)?;
    let rotation = dec.u.matmul(&dec.v.transpose());
    let residual = alignment_residual(modern, historical, &rotation);
    Ok(RotationMap { rotation, anchor_count: modern.rows(), residual })
}

pub fn alignment_residual(modern: &Matrix, historical: &Matrix, rotation: &Matrix) -> f64 {
    modern.matmul(rotation).sub(historical).frobenius_norm()
}

/// Shared words of both spaces in lexicographic order.
pub fn anchor_words(historical: &EmbeddingSpace, modern: &EmbeddingSpace) -> Vec<String> {
    let mut shared: Vec<String> = modern.words().iter().filter(|w| historical.contains(w)).cloned().collect();
    shared.sort();
    shared
}

/// Fits the rotation using every word present in both spaces as an anchor.
pub fn fit_procrustes(
    historical: &EmbeddingSpace,
    modern: &EmbeddingSpace,
    options: AlignOptions,
) -> Result<RotationMap, AlignError> {
    if historical.dim() != modern.dim() {
        return Err(AlignError::DimensionMismatch { expected: historical.dim(), found: modern.dim() });
    }
    let anchors = anchor_words(historical, modern);
    if anchors.is_empty() {
        return Err(AlignError::NoAnchors);
    }
    let rows = |space: &EmbeddingSpace| -> Matrix {
        let d = space.dim();
        let mut data = Vec::with_capacity(anchors.len() * d);
        for w in &anchors {
            let v = space.vector(w).expect("anchor present in both spaces");
            let n = norm(v);
            if options.normalize && n > 0.0 {
                data.extend(v.iter().map(|x| x / n));
            } else {
                data.extend_from_slice(v);
            }
        }
        Matrix::from_vec(anchors.len(), d, data)
    };
    fit_rotation(&rows(modern), &rows(historical))
}

/// `v · R`, a MODERN vector in HISTORICAL coordinates.
pub fn project(map: &RotationMap, vector: &[f64]) -> Result<Vec<f64>, AlignError> {
    if vector.len() != map.dim() {
        return Err(AlignError::DimensionMismatch { expected: map.dim(), found: vector.len() });
    }
    Ok(map.rotation.vecmul(vector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
    }

    /// Random orthogonal matrix from the QR factorisation of a Gaussian-ish matrix.
    fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let m = random_matrix(d, d, rng);
        let q = nalgebra::DMatrix::from_row_slice(d, d, m.as_slice()).qr().q();
        let mut out = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = q[(i, j)];
            }
        }
        out
    }

    fn space(words: &[String], m: Matrix) -> EmbeddingSpace {
        EmbeddingSpace::new(words.to_vec(), m).unwrap()
    }

    #[test]
    fn identical_spaces_give_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
        let h = random_matrix(40, 6, &mut rng);
        let map = fit_procrustes(&space(&words, h.clone()), &space(&words, h), AlignOptions::default()).unwrap();
        assert!(map.rotation.sub(&Matrix::identity(6)).max_abs() < 1e-10);
        assert!(map.residual < 1e-10);
        assert_eq!(map.anchor_count, 40);
    }

    #[test]
    fn planted_rotation_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_matrix(200, 10, &mut rng);
        let q = random_orthogonal(10, &mut rng);
        let m = h.matmul(&q);
        let map = fit_rotation(&m, &h).unwrap();
        assert!(map.rotation.sub(&q.transpose()).max_abs() < 1e-6);
        assert!(map.residual < 1e-6);
        assert!(map.orthogonality_error() < 1e-8);
        assert!((map.rotation.determinant().abs() - 1.0).abs() < 1e-6);
        for i in 0..5 {
            let p = project(&map, m.row(i)).unwrap();
            for (a, b) in p.iter().zip(h.row(i)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn noisy_copy_improves_on_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_matrix(100, 8, &mut rng);
        let q = random_orthogonal(8, &mut rng);
        let noise = random_matrix(100, 8, &mut rng);
        let mut m = h.matmul(&q);
        for i in 0..100 {
            for j in 0..8 {
                m[(i, j)] += 0.01 * noise[(i, j)];
            }
        }
        let map = fit_rotation(&m, &h).unwrap();
        let unaligned = alignment_residual(&m, &h, &Matrix::identity(8));
        assert!(map.residual <= unaligned);
        for _ in 0..100 {
            let other = random_orthogonal(8, &mut rng);
            assert!(map.residual <= alignment_residual(&m, &h, &other) + 1e-12);
        }
    }

    #[test]
    fn anchor_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let words: Vec<String> = (0..30).map(|i| format!("w{i:02}")).collect();
        let h = random_matrix(30, 5, &mut rng);
        let q = random_orthogonal(5, &mut rng);
        let m = h.matmul(&q);
        let a = fit_procrustes(&space(&words, h.clone()), &space(&words, m.clone()), AlignOptions::default())
            .unwrap();
        let rev: Vec<usize> = (0..30).rev().collect();
        let rw: Vec<String> = rev.iter().map(|&i| words[i].clone()).collect();
        let rows = |x: &Matrix| Matrix::from_rows(&rev.iter().map(|&i| x.row(i).to_vec()).collect::<Vec<_>>());
        let b = fit_procrustes(&space(&rw, rows(&h)), &space(&rw, rows(&m)), AlignOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projection_preserves_norms_and_cosines() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_orthogonal(7, &mut rng);
        let map = RotationMap { rotation: q, anchor_count: 0, residual: 0.0 };
        let vs = random_matrix(6, 7, &mut rng);
        let ps: Vec<Vec<f64>> = (0..6).map(|i| project(&map, vs.row(i)).unwrap()).collect();
        for i in 0..6 {
            assert!((norm(&ps[i]) - norm(vs.row(i))).abs() < 1e-9);
            for j in 0..6 {
                let before = crate::linalg::dot(vs.row(i), vs.row(j)) / (norm(vs.row(i)) * norm(vs.row(j)));
                let after = crate::linalg::dot(&ps[i], &ps[j]) / (norm(&ps[i]) * norm(&ps[j]));
                assert!((before - after).abs() < 1e-9);
            }
        }
        assert_eq!(project(&RotationMap::identity(3), &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(project(&map, &[1.0]), Err(AlignError::DimensionMismatch { .. })));
    }

    #[test]
    fn errors() {
        let a = space(&["x".to_string()], Matrix::from_vec(1, 2, vec![1.0, 0.0]));
        let b = space(&["y".to_string()], Matrix::from_vec(1, 2, vec![0.0, 1.0]));
        assert!(matches!(fit_procrustes(&a, &b, AlignOptions::default()), Err(AlignError::NoAnchors)));
        let c = space(&["x".to_string()], Matrix::from_vec(1, 3, vec![0.0, 1.0, 0.0]));
        assert!(matches!(
            fit_procrustes(&a, &c, AlignOptions::default()),
            Err(AlignError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn persistence_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let map = RotationMap { rotation: random_orthogonal(4, &mut rng), anchor_count: 17, residual: 0.125 };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.txt");
        map.write_text(&p).unwrap();
        assert_eq!(RotationMap::read_text(&p).unwrap(), map);
    }
}
