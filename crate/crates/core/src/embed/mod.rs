//! Word embedding spaces: SGNS training, similarity and exact neighbor scans.

mod sgns;
mod vocab;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sgns::{train_sgns, SgnsConfig};
pub use vocab::{build_vocab, count_tokens, Vocabulary};

use crate::corpus::Partition;
use crate::linalg::{dot, norm, Matrix};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid embedding config: {0}")]
    InvalidConfig(String),
    #[error("no word reaches min_count {min_count}")]
    EmptyVocabulary { min_count: u64 },
    #[error("corpus has {tokens} in-vocabulary tokens, shorter than one window of {window}")]
    CorpusTooShort { tokens: u64, window: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("embedding matrix has non-finite entries")]
    NonFinite,
    #[error("duplicate word `{0}` in embedding vocabulary")]
    DuplicateWord(String),
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
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Cosine,
    /// Negated Euclidean distance, so larger still means closer.
    Euclidean,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        }
    }
}

/// Cosine similarity, or negated Euclidean distance.
pub fn similarity(u: &[f64], v: &[f64], metric: Metric) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    match metric {
        Metric::Cosine => {
            let (nu, nv) = (norm(u), norm(v));
            if nu == 0.0 || nv == 0.0 {
                return Err(EmbedError::ZeroVector);
            }
            Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
        }
        Metric::Euclidean => Ok(-u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub word: String,
    pub similarity: f64,
}

/// Vocabulary-indexed dense vectors, one row per word.
#[derive(Clone, Debug)]
pub struct EmbeddingSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Matrix,
    norms: Vec<f64>,
    config: Option<SgnsConfig>,
    partition: Option<Partition>,
}

impl EmbeddingSpace {
    pub fn new(words: Vec<String>, matrix: Matrix) -> Result<Self, EmbedError> {
        if matrix.rows() != words.len() {
            return Err(EmbedError::DimensionMismatch { expected: words.len(), found: matrix.rows() });
        }
        if matrix.cols() == 0 {
            return Err(EmbedError::InvalidConfig("dimension must be positive".into()));
        }
        if !matrix.is_finite() {
            return Err(EmbedError::NonFinite);
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(EmbedError::DuplicateWord(w.clone()));
            }
        }
        let norms = (0..matrix.rows()).map(|i| norm(matrix.row(i))).collect();
        Ok(Self { words, index, matrix, norms, config: None, partition: None })
    }

    pub(crate) fn set_metadata(&mut self, config: Option<SgnsConfig>, partition: Option<Partition>) {
        self.config = config;
        self.partition = partition;
    }

    pub fn with_partition(mut self, partition: Partition) -> Self {
        self.partition = Some(partition);
        self
    }

    pub fn config(&self) -> Option<&SgnsConfig> {
        self.config.as_ref()
    }

    pub fn partition(&self) -> Option<Partition> {
        self.partition
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.matrix.row(i))
    }

    /// Similarity of `query` to row `i`. Zero rows have no cosine and yield `None`.
    fn row_similarity(&self, i: usize, query: &[f64], query_norm: f64, metric: Metric) -> Option<f64> {
        let row = self.matrix.row(i);
        match metric {
            Metric::Cosine => {
                let n = self.norms[i];
                (n > 0.0).then(|| (dot(row, query) / (n * query_norm)).clamp(-1.0, 1.0))
            }
            Metric::Euclidean => {
                Some(-row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            }
        }
    }

    /// All filter-passing words with similarity `>= tau`, most similar first
    /// (ties by word), truncated to `cap` entries when given.
    pub fn neighbors_above(
        &self,
        query: &[f64],
        tau: f64,
        metric: Metric,
        filter: impl Fn(&str) -> bool,
        cap: Option<usize>,
    ) -> Result<Vec<Neighbor>, EmbedError> {
        if query.len() != self.dim() {
            return Err(EmbedError::DimensionMismatch { expected: self.dim(), found: query.len() });
        }
        let qn = norm(query);
        if metric == Metric::Cosine && qn == 0.0 {
            return Err(EmbedError::ZeroVector);
        }
        let mut hits: Vec<(usize, f64)> = (0..self.len())
            .filter_map(|i| {
                let s = self.row_similarity(i, query, qn, metric)?;
                (s >= tau && filter(&self.words[i])).then_some((i, s))
            })
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.words[a.0].cmp(&self.words[b.0])));
        if let Some(cap) = cap {
            hits.truncate(cap);
        }
        Ok(hits.into_iter().map(|(i, s)| Neighbor { word: self.words[i].clone(), similarity: s }).collect())
    }

    /// The `k` most similar filter-passing words regardless of threshold.
    pub fn nearest(
        &self,
        query: &[f64],
        k: usize,
        metric: Metric,
        filter: impl Fn(&str) -> bool,
    ) -> Result<Vec<Neighbor>, EmbedError> {
        self.neighbors_above(query, f64::NEG_INFINITY, metric, filter, Some(k))
    }

    /// Text format: `<vocab_size> <dim>` then `word v1 .. vd`, 17 significant digits.
    pub fn write_text(&self, path: &Path) -> Result<(), EmbedError> {
        let mut out = String::with_capacity(self.len() * (self.dim() * 24 + 16));
        let _ = writeln!(out, "{} {}", self.len(), self.dim());
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in self.matrix.row(i) {
                let _ = write!(out, " {v:.16e}");
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| EmbedError::Io { path: path.to_path_buf(), source })
    }

    pub fn read_text(path: &Path) -> Result<Self, EmbedError> {
        let text =
            fs::read_to_string(path).map_err(|source| EmbedError::Io { path: path.to_path_buf(), source })?;
        let fail = |line: usize, message: &str| EmbedError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| fail(1, "missing header"))?;
        let dims: Vec<usize> = header.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        let [n, d] = dims[..] else { return Err(fail(1, "header must be `<vocab_size> <dim>`")) };
        let mut words = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * d);
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts.next().ok_or_else(|| fail(i + 2, "missing word"))?;
            let before = data.len();
            for p in parts {
                data.push(p.parse::<f64>().map_err(|_| fail(i + 2, "bad vector component"))?);
            }
            if data.len() - before != d {
                return Err(fail(i + 2, &format!("expected {d} components")));
            }
            words.push(word.to_string());
        }
        if words.len() != n {
            return Err(fail(1, &format!("header says {n} rows, found {}", words.len())));
        }
        Self::new(words, Matrix::from_vec(n, d, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_space(n: usize, d: usize, seed: u64) -> EmbeddingSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = (0..n).map(|i| format!("w{i:02}")).collect();
        let data = (0..n * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        EmbeddingSpace::new(words, Matrix::from_vec(n, d, data)).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let u = [1.0, 2.0];
        assert!((similarity(&u, &u, Metric::Cosine).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(similarity(&[1.0, 0.0], &[0.0, 3.0], Metric::Cosine).unwrap(), 0.0);
        let s = similarity(&[1.0, 2.0], &[2.0, 1.0], Metric::Cosine).unwrap();
        assert!((s - 4.0 / (5f64.sqrt() * 5f64.sqrt())).abs() < 1e-15);
        assert!((s - 0.8).abs() < 1e-15);
    }

    #[test]
    fn similarity_errors_and_euclidean() {
        assert!(matches!(similarity(&[0.0, 0.0], &[1.0, 0.0], Metric::Cosine), Err(EmbedError::ZeroVector)));
        assert!(matches!(
            similarity(&[1.0], &[1.0, 0.0], Metric::Cosine),
            Err(EmbedError::DimensionMismatch { .. })
        ));
        assert_eq!(similarity(&[0.0, 0.0], &[3.0, 4.0], Metric::Euclidean).unwrap(), -5.0);
    }

    #[test]
    fn neighbors_threshold_extremes() {
        let s = random_space(12, 4, 3);
        let q = s.matrix().row(0).to_vec();
        assert!(s.neighbors_above(&q, 1.01, Metric::Cosine, |_| true, None).unwrap().is_empty());
        assert_eq!(s.neighbors_above(&q, -1.0, Metric::Cosine, |_| true, None).unwrap().len(), 12);
        let capped = s.neighbors_above(&q, -1.0, Metric::Cosine, |_| true, Some(3)).unwrap();
        assert_eq!(capped.len(), 3);
        assert_eq!(capped[0].word, "w00");
    }

    #[test]
    fn neighbors_match_brute_force() {
        let s = random_space(10, 5, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let q: Vec<f64> = (0..5).map(|_| rng.random::<f64>() - 0.5).collect();
        let got = s.neighbors_above(&q, 0.3, Metric::Cosine, |_| true, None).unwrap();
        let mut expect = Vec::new();
        for (i, w) in s.words().iter().enumerate() {
            let r = s.matrix().row(i);
            let c: f64 = r.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>()
                / (r.iter().map(|a| a * a).sum::<f64>().sqrt() * q.iter().map(|a| a * a).sum::<f64>().sqrt());
            if c >= 0.3 {
                expect.push((w.clone(), c));
            }
        }
        expect.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        assert_eq!(got.len(), expect.len());
        for (g, e) in got.iter().zip(&expect) {
            assert_eq!(g.word, e.0);
            assert!((g.similarity - e.1).abs() < 1e-12);
        }
    }

    #[test]
    fn filter_is_applied() {
        let s = random_space(10, 3, 5);
        let q = s.matrix().row(1).to_vec();
        let got = s.neighbors_above(&q, -1.0, Metric::Cosine, |w| w.ends_with('1'), None).unwrap();
        assert_eq!(got.iter().map(|n| n.word.as_str()).collect::<Vec<_>>(), vec!["w01"]);
    }

    #[test]
    fn text_roundtrip_is_lossless() {
        let s = random_space(7, 6, 21);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.vec");
        s.write_text(&p).unwrap();
        let back = EmbeddingSpace::read_text(&p).unwrap();
        assert_eq!(back.words(), s.words());
        assert_eq!(back.matrix(), s.matrix());
    }

    #[test]
    fn malformed_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.vec");
        fs::write(&p, "2 2\na 1 2\nb 1\n").unwrap();
        assert!(matches!(EmbeddingSpace::read_text(&p), Err(EmbedError::Parse { line: 3, .. })));
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            u in prop::collection::vec(-5.0f64..5.0, 4),
            v in prop::collection::vec(-5.0f64..5.0, 4),
            alpha in 0.01f64..100.0,
        ) {
            prop_assume!(norm(&u) > 1e-3 && norm(&v) > 1e-3);
            let a = similarity(&u, &v, Metric::Cosine).unwrap();
            let b = similarity(&v, &u, Metric::Cosine).unwrap();
            let scaled: Vec<f64> = u.iter().map(|x| x * alpha).collect();
            let c = similarity(&scaled, &v, Metric::Cosine).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((a - c).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }

        #[test]
        fn neighbors_monotone_and_order_invariant(seed in 0u64..500, t1 in -1.0f64..1.0, dt in 0.0f64..1.0) {
            let s = random_space(15, 4, seed);
            let q = s.matrix().row(0).to_vec();
            let t2 = t1 + dt;
            let n1 = s.neighbors_above(&q, t1, Metric::Cosine, |_| true, None).unwrap();
            let n2 = s.neighbors_above(&q, t2, Metric::Cosine, |_| true, None).unwrap();
            prop_assert!(n2.len() <= n1.len());

            let mut order: Vec<usize> = (0..s.len()).collect();
            order.reverse();
            let words = order.iter().map(|&i| s.words()[i].clone()).collect();
            let rows: Vec<Vec<f64>> = order.iter().map(|&i| s.matrix().row(i).to_vec()).collect();
            let shuffled = EmbeddingSpace::new(words, Matrix::from_rows(&rows)).unwrap();
            let n3 = shuffled.neighbors_above(&q, t1, Metric::Cosine, |_| true, None).unwrap();
            prop_assert_eq!(n1, n3);
        }
    }
}
