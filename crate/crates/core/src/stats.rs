//! Neighborhood density and average frequency growth in the HISTORICAL space.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{project, AlignError, RotationMap};
use crate::corpus::{is_analysis_noun, FrequencyTable, Partition, PosLexicon};
use crate::embed::{EmbedError, EmbeddingSpace, Metric, Neighbor};
use crate::select::{growth_rate, PairedWordSet};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("`{word}` has no vector in the {partition} space")]
    MissingWord { word: String, partition: Partition },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("threshold {0} is outside (-1, 1] for cosine similarity")]
    Threshold(f64),
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsParams {
    pub metric: Metric,
    /// Keep at most this many nearest neighbors.
    pub cap: Option<usize>,
    /// Apply the cap to density as well as to the growth mean.
    pub cap_density: bool,
    pub noun_tag: String,
    /// Neighbors kept per record for export; 0 keeps none.
    pub export_neighbors: usize,
}

impl Default for StatsParams {
    fn default() -> Self {
        Self { metric: Metric::Cosine, cap: Some(5000), cap_density: true, noun_tag: "NN".into(), export_neighbors: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodRecord {
    pub word: String,
    pub is_neologism: bool,
    pub tau: f64,
    pub density: usize,
    pub avg_growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neighbors: Vec<Neighbor>,
}

/// The HISTORICAL side of the analysis: space, per-word eligibility and
/// precomputed growth rates of every eligible neighbor.
pub struct NeighborhoodIndex<'a> {
    historical: &'a EmbeddingSpace,
    modern: &'a EmbeddingSpace,
    map: &'a RotationMap,
    growth: HashMap<&'a str, Option<f64>>,
    params: StatsParams,
}

impl<'a> NeighborhoodIndex<'a> {
    pub fn new(
        historical: &'a EmbeddingSpace,
        modern: &'a EmbeddingSpace,
        map: &'a RotationMap,
        table: &FrequencyTable,
        lexicon: &PosLexicon,
        params: StatsParams,
    ) -> Self {
        let growth = historical
            .words()
            .iter()
            .filter(|w| is_analysis_noun(w, lexicon, table, Partition::Historical, &params.noun_tag))
            .map(|w| (w.as_str(), growth_rate(&table.historical_series(w))))
            .collect();
        Self { historical, modern, map, growth, params }
    }

    pub fn params(&self) -> &StatsParams {
        &self.params
    }

    /// Number of HISTORICAL words that may appear as neighbors.
    pub fn eligible_count(&self) -> usize {
        self.growth.len()
    }

    pub fn word_vector(&self, word: &str, is_neologism: bool) -> Result<Vec<f64>, StatsError> {
        word_vector_in_historical(word, is_neologism, self.historical, self.modern, self.map)
    }

    pub fn neighborhood_stats(&self, word: &str, is_neologism: bool, tau: f64) -> Result<NeighborhoodRecord, StatsError> {
        Ok(self.neighborhood_stats_multi(word, is_neologism, &[tau])?.remove(0))
    }

    /// One record per threshold, in the order given. The scan runs once at
    /// the lowest threshold.
    pub fn neighborhood_stats_multi(
        &self,
        word: &str,
        is_neologism: bool,
        taus: &[f64],
    ) -> Result<Vec<NeighborhoodRecord>, StatsError> {
        for &t in taus {
            check_tau(t, self.params.metric)?;
        }
        let Some(lowest) = taus.iter().copied().reduce(f64::min) else {
            return Ok(Vec::new());
        };
        let query = self.word_vector(word, is_neologism)?;
        let all = self.historical.neighbors_above(
            &query,
            lowest,
            self.params.metric,
            |u| u != word && self.growth.contains_key(u),
            None,
        )?;
        Ok(taus
            .iter()
            .map(|&tau| {
                let within = all.partition_point(|n| n.similarity >= tau);
                let kept = self.params.cap.map_or(within, |c| within.min(c));
                let density = if self.params.cap_density { kept } else { within };
                let avg_growth = mean_growth(all[..kept].iter().filter_map(|n| self.growth[n.word.as_str()]));
                let shown = kept.min(self.params.export_neighbors);
                NeighborhoodRecord {
                    word: word.to_string(),
                    is_neologism,
                    tau,
                    density,
                    avg_growth,
                    neighbors: all[..shown].to_vec(),
                }
            })
            .collect())
    }
}

fn check_tau(tau: f64, metric: Metric) -> Result<(), StatsError> {
    let ok = match metric {
        Metric::Cosine => tau > -1.0 && tau <= 1.0,
        Metric::Euclidean => tau <= 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(StatsError::Threshold(tau))
    }
}

fn mean_growth(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Neologisms are looked up in MODERN and rotated into HISTORICAL
/// coordinates; controls use their native HISTORICAL vector.
pub fn word_vector_in_historical(
    word: &str,
    is_neologism: bool,
    historical: &EmbeddingSpace,
    modern: &EmbeddingSpace,
    map: &RotationMap,
) -> Result<Vec<f64>, StatsError> {
    if is_neologism {
        let v = modern
            .vector(word)
            .ok_or_else(|| StatsError::MissingWord { word: word.into(), partition: Partition::Modern })?;
        Ok(project(map, v)?)
    } else {
        historical
            .vector(word)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| StatsError::MissingWord { word: word.into(), partition: Partition::Historical })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetMeans {
    pub tau: f64,
    pub neologism_density: f64,
    pub control_density: f64,
    pub neologism_growth: Option<f64>,
    pub control_growth: Option<f64>,
    /// Words with a defined growth value, per set.
    pub neologism_growth_n: usize,
    pub control_growth_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub metric: Metric,
    pub taus: Vec<f64>,
    /// Sorted by word, then by threshold.
    pub records: Vec<NeighborhoodRecord>,
}

impl StatsTable {
    pub fn record(&self, word: &str, tau: f64) -> Option<&NeighborhoodRecord> {
        let start = self.records.partition_point(|r| r.word.as_str() < word);
        self.records[start..].iter().take_while(|r| r.word == word).find(|r| r.tau == tau)
    }

    /// Per-set means of density and growth at every threshold.
    pub fn means(&self) -> Vec<SetMeans> {
        self.taus
            .iter()
            .map(|&tau| {
                let at: Vec<&NeighborhoodRecord> = self.records.iter().filter(|r| r.tau == tau).collect();
                let side = |neo: bool| {
                    let rs: Vec<&&NeighborhoodRecord> = at.iter().filter(|r| r.is_neologism == neo).collect();
                    let density = if rs.is_empty() {
                        0.0
                    } else {
                        rs.iter().map(|r| r.density as f64).sum::<f64>() / rs.len() as f64
                    };
                    let g: Vec<f64> = rs.iter().filter_map(|r| r.avg_growth).collect();
                    (density, mean_growth(g.iter().copied()), g.len())
                };
                let (nd, ng, nn) = side(true);
                let (cd, cg, cn) = side(false);
                SetMeans {
                    tau,
                    neologism_density: nd,
                    control_density: cd,
                    neologism_growth: ng,
                    control_growth: cg,
                    neologism_growth_n: nn,
                    control_growth_n: cn,
                }
            })
            .collect()
    }

    /// `word<TAB>is_neologism<TAB>tau<TAB>density<TAB>avg_growth`, preceded by
    /// a `# metric:` comment. Missing growth is written as `NA`.
    pub fn write_tsv(&self, path: &Path) -> Result<(), StatsError> {
        let mut out = format!("# metric: {}\nword\tis_neologism\ttau\tdensity\tavg_growth\n", self.metric.as_str());
        for r in &self.records {
            let g = r.avg_growth.map_or_else(|| "NA".to_string(), |g| format!("{g:.17e}"));
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", r.word, u8::from(r.is_neologism), r.tau, r.density, g);
        }
        fs::write(path, out).map_err(|source| StatsError::Io { path: path.to_path_buf(), source })
    }

    pub fn read_tsv(path: &Path) -> Result<Self, StatsError> {
        let text = fs::read_to_string(path).map_err(|source| StatsError::Io { path: path.to_path_buf(), source })?;
        let perr = |line: usize, message: String| StatsError::Parse { path: path.to_path_buf(), line, message };
        let mut metric = Metric::Cosine;
        let mut records = Vec::new();
        let mut taus: Vec<f64> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix("# metric: ") {
                metric = match m {
                    "cosine" => Metric::Cosine,
                    "euclidean" => Metric::Euclidean,
                    other => return Err(perr(i + 1, format!("unknown metric `{other}`"))),
                };
                continue;
            }
            if line.starts_with('#') || line.starts_with("word\t") {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(perr(i + 1, "expected 5 fields".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| perr(i + 1, format!("`{s}`: {e}")));
            let tau = num(f[2])?;
            if !taus.contains(&tau) {
                taus.push(tau);
            }
            records.push(NeighborhoodRecord {
                word: f[0].to_string(),
                is_neologism: f[1] == "1",
                tau,
                density: f[3].parse().map_err(|e| perr(i + 1, format!("density: {e}")))?,
                avg_growth: if f[4] == "NA" { None } else { Some(num(f[4])?) },
                neighbors: Vec::new(),
            });
        }
        Ok(Self { metric, taus, records })
    }

    /// Neighbor lists as JSON, for inspection in place of a 2-D layout.
    pub fn neighbors_json(&self) -> serde_json::Value {
        serde_json::json!({
            "metric": self.metric.as_str(),
            "records": self.records.iter().filter(|r| !r.neighbors.is_empty()).map(|r| serde_json::json!({
                "word": r.word,
                "is_neologism": r.is_neologism,
                "tau": r.tau,
                "neighbors": r.neighbors,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Records for every matched neologism and control at every threshold,
/// computed in parallel. Output order does not depend on worker count.
pub fn stats_table(set: &PairedWordSet, taus: &[f64], index: &NeighborhoodIndex<'_>) -> Result<StatsTable, StatsError> {
    let mut words: Vec<(&str, bool)> = set.matched().flat_map(|(n, c)| [(n, true), (c, false)]).collect();
    words.sort_unstable();
    words.dedup();
    let mut sorted_taus = taus.to_vec();
    sorted_taus.sort_by(f64::total_cmp);
    sorted_taus.dedup();
    let per_word: Vec<Vec<NeighborhoodRecord>> = words
        .par_iter()
        .map(|&(w, neo)| index.neighborhood_stats_multi(w, neo, &sorted_taus))
        .collect::<Result<_, _>>()?;
    Ok(StatsTable { metric: index.params.metric, taus: sorted_taus, records: per_word.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Slice, SlicedCorpus, TokenizerConfig};
    use crate::linalg::Matrix;
    use crate::select::{ControlMode, MatchParams, WordPair};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        hist: EmbeddingSpace,
        modern: EmbeddingSpace,
        table: FrequencyTable,
        lexicon: PosLexicon,
    }

    /// `n` HISTORICAL nouns `w00..` with random vectors and random 3-slice
    /// counts; some are tagged verbs or always capitalized. MODERN holds
    /// `neo` plus copies of the first few words.
    fn fixture(n: usize, dim: usize, seed: u64) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<String> = (0..n).map(|i| format!("w{i:03}")).collect();
        let mut rand_matrix = |rows: usize| {
            Matrix::from_vec(rows, dim, (0..rows * dim).map(|_| rng.random::<f64>() - 0.5).collect())
        };
        let hist = EmbeddingSpace::new(words.clone(), rand_matrix(n)).unwrap();
        let mut mwords = vec!["neo".to_string()];
        mwords.extend(words.iter().take(5).cloned());
        let modern = EmbeddingSpace::new(mwords, rand_matrix(6)).unwrap();

        let mut lexicon = PosLexicon::default();
        let mut texts = vec![String::new(); 3];
        for (i, w) in words.iter().enumerate() {
            lexicon.add(w, if i % 7 == 3 { "VB" } else { "NN" }, 1);
            for t in texts.iter_mut() {
                let c = rng.random_range(0..4);
                for _ in 0..c {
                    let s = if i % 11 == 5 { format!("W{} ", &w[1..]) } else { format!("{w} ") };
                    t.push_str(&s);
                }
            }
        }
        let mut slices: Vec<Slice> = texts
            .into_iter()
            .enumerate()
            .map(|(i, text)| Slice {
                id: format!("h{i}"),
                partition: Partition::Historical,
                documents: vec![Document { name: "d".into(), text: text + "pad pad" }],
            })
            .collect();
        slices.push(Slice {
            id: "m".into(),
            partition: Partition::Modern,
            documents: vec![Document { name: "d".into(), text: "neo w000".into() }],
        });
        let table = FrequencyTable::build(&SlicedCorpus::from_slices(slices, TokenizerConfig::default()).unwrap());
        Fixture { hist, modern, table, lexicon }
    }

    /// All-pairs scan with every filter spelled out.
    fn oracle(f: &Fixture, query: &[f64], word: &str, tau: f64) -> (usize, Option<f64>) {
        let mut hits = Vec::new();
        for (i, u) in f.hist.words().iter().enumerate() {
            if u == word || f.lexicon.dominant_tag(u) != Some("NN") {
                continue;
            }
            if f.table.capitalized_count(u, Partition::Historical) > f.table.lowercase_count(u, Partition::Historical) {
                continue;
            }
            let v = f.hist.matrix().row(i);
            let cos = crate::linalg::dot(v, query) / (crate::linalg::norm(v) * crate::linalg::norm(query));
            if cos >= tau {
                hits.push(growth_rate(&f.table.historical_series(u)));
            }
        }
        let g: Vec<f64> = hits.iter().flatten().copied().collect();
        (hits.len(), (!g.is_empty()).then(|| g.iter().sum::<f64>() / g.len() as f64))
    }

    fn index<'a>(f: &'a Fixture, map: &'a RotationMap) -> NeighborhoodIndex<'a> {
        NeighborhoodIndex::new(&f.hist, &f.modern, map, &f.table, &f.lexicon, StatsParams::default())
    }

    #[test]
    fn matches_brute_force_oracle() {
        let f = fixture(30, 8, 1);
        let map = RotationMap::identity(8);
        let idx = index(&f, &map);
        for w in f.hist.words() {
            for tau in [-0.5, 0.0, 0.2, 0.35, 0.45, 0.55] {
                let rec = idx.neighborhood_stats(w, false, tau).unwrap();
                let (d, g) = oracle(&f, f.hist.vector(w).unwrap(), w, tau);
                assert_eq!(rec.density, d, "{w} at {tau}");
                match (rec.avg_growth, g) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                    (a, b) => assert_eq!(a, b),
                }
            }
        }
        let rec = idx.neighborhood_stats("neo", true, 0.1).unwrap();
        assert_eq!(rec.density, oracle(&f, f.modern.vector("neo").unwrap(), "neo", 0.1).0);
    }

    #[test]
    fn unattainable_threshold_gives_empty_neighborhood() {
        let f = fixture(30, 8, 2);
        let map = RotationMap::identity(8);
        let r = index(&f, &map).neighborhood_stats("w001", false, 1.0).unwrap();
        assert_eq!((r.density, r.avg_growth), (0, None));
    }

    #[test]
    fn two_word_neighborhood_average() {
        // Query along e0; only "up" and "flat" are within reach.
        let words = vec!["up".to_string(), "flat".to_string(), "far".to_string()];
        let hist =
            EmbeddingSpace::new(words, Matrix::from_rows(&[vec![1.0, 0.1], vec![1.0, -0.1], vec![-1.0, 0.0]])).unwrap();
        let modern = EmbeddingSpace::new(vec!["neo".into()], Matrix::from_rows(&[vec![1.0, 0.0]])).unwrap();
        let slices = (0..3)
            .map(|i| Slice {
                id: format!("h{i}"),
                partition: Partition::Historical,
                documents: vec![Document {
                    name: "d".into(),
                    text: format!("{} flat flat far pad pad pad pad pad", "up ".repeat(i + 1)),
                }],
            })
            .collect();
        let table = FrequencyTable::build(&SlicedCorpus::from_slices(slices, TokenizerConfig::default()).unwrap());
        let mut lexicon = PosLexicon::default();
        for w in ["up", "flat", "far"] {
            lexicon.add(w, "NN", 1);
        }
        assert_eq!(growth_rate(&table.historical_series("up")), Some(1.0));
        let map = RotationMap::identity(2);
        let idx = NeighborhoodIndex::new(&hist, &modern, &map, &table, &lexicon, StatsParams::default());
        let r = idx.neighborhood_stats("neo", true, 0.5).unwrap();
        assert_eq!(r.density, 2);
        let flat = growth_rate(&table.historical_series("flat")).unwrap();
        assert!((r.avg_growth.unwrap() - (1.0 + flat) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cap_applies_to_both_statistics_unless_lifted() {
        let f = fixture(30, 4, 3);
        let map = RotationMap::identity(4);
        let capped = StatsParams { cap: Some(3), ..Default::default() };
        let idx = NeighborhoodIndex::new(&f.hist, &f.modern, &map, &f.table, &f.lexicon, capped.clone());
        let r = idx.neighborhood_stats("w000", false, -0.99).unwrap();
        assert_eq!(r.density, 3);
        let lifted = StatsParams { cap_density: false, ..capped };
        let idx = NeighborhoodIndex::new(&f.hist, &f.modern, &map, &f.table, &f.lexicon, lifted);
        let r2 = idx.neighborhood_stats("w000", false, -0.99).unwrap();
        assert!(r2.density > 3);
        assert_eq!(r.avg_growth, r2.avg_growth);
    }

    #[test]
    fn neologism_vector_is_projected() {
        let f = fixture(10, 3, 4);
        let q = Matrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let map = RotationMap { rotation: q.clone(), anchor_count: 0, residual: 0.0 };
        let v = word_vector_in_historical("neo", true, &f.hist, &f.modern, &map).unwrap();
        assert_eq!(v, q.vecmul(f.modern.vector("neo").unwrap()));
        let c = word_vector_in_historical("w001", false, &f.hist, &f.modern, &map).unwrap();
        assert_eq!(c, f.hist.vector("w001").unwrap());
        assert!(matches!(
            word_vector_in_historical("nope", true, &f.hist, &f.modern, &map),
            Err(StatsError::MissingWord { .. })
        ));
    }

    fn pairs(p: &[(&str, &str)]) -> PairedWordSet {
        PairedWordSet {
            pairs: p.iter().map(|(n, c)| WordPair { neologism: n.to_string(), control: Some(c.to_string()) }).collect(),
            mode: ControlMode::Stable,
            params: MatchParams::default(),
            seed: None,
        }
    }

    #[test]
    fn table_is_monotone_self_excluding_and_ordered() {
        let f = fixture(40, 5, 5);
        let map = RotationMap::identity(5);
        let params = StatsParams { export_neighbors: 100, ..Default::default() };
        let idx = NeighborhoodIndex::new(&f.hist, &f.modern, &map, &f.table, &f.lexicon, params);
        let set = pairs(&[("neo", "w010"), ("w000", "w020")]);
        let t = stats_table(&set, &[0.55, 0.35, 0.45], &idx).unwrap();
        assert_eq!(t.taus, vec![0.35, 0.45, 0.55]);
        assert_eq!(t.records.len(), 12);
        let keys: Vec<(&str, f64)> = t.records.iter().map(|r| (r.word.as_str(), r.tau)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)));
        assert_eq!(keys, sorted);
        for w in t.records.chunks(3) {
            assert!(w[0].density >= w[1].density && w[1].density >= w[2].density);
            for r in w {
                assert!(r.neighbors.iter().all(|n| n.word != r.word));
                assert!(r.neighbors.iter().all(|n| f.lexicon.dominant_tag(&n.word) == Some("NN")));
                assert_eq!(r.neighbors.len(), r.density);
            }
        }
        let empty = pairs(&[]);
        assert!(stats_table(&empty, &[0.35], &idx).unwrap().records.is_empty());
    }

    #[test]
    fn tsv_roundtrip_and_means() {
        let f = fixture(30, 5, 6);
        let map = RotationMap::identity(5);
        let idx = index(&f, &map);
        let t = stats_table(&pairs(&[("neo", "w010")]), &[0.0, 0.3], &idx).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.tsv");
        t.write_tsv(&path).unwrap();
        assert_eq!(StatsTable::read_tsv(&path).unwrap(), t);
        let m = t.means();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].neologism_density, t.record("neo", 0.0).unwrap().density as f64);
        assert_eq!(m[1].control_growth, t.record("w010", 0.3).unwrap().avg_growth);
    }
}
