//! Neologism selection, frequency growth rates, and stable/relaxed control
//! matching.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{is_analysis_noun, FrequencyTable, Partition, PosLexicon};

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("invalid parameter block {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Minimum number of defined points for a growth rate.
pub const MIN_GROWTH_POINTS: usize = 3;

/// Spearman correlation between timesteps `1..=T` and the series. Missing
/// points are dropped pairwise; fewer than three remaining points give
/// `None`. A constant series has no rank variance and is reported as 0.
pub fn growth_rate(series: &[Option<f64>]) -> Option<f64> {
    let points: Vec<(usize, f64)> = series.iter().enumerate().filter_map(|(t, v)| v.map(|v| (t, v))).collect();
    let n = points.len();
    if n < MIN_GROWTH_POINTS {
        return None;
    }
    // Timesteps are distinct and already increasing, so their ranks are 1..=n.
    let time_ranks: Vec<f64> = (1..=n).map(|r| r as f64).collect();
    let value_ranks = average_ranks(&points.iter().map(|p| p.1).collect::<Vec<_>>());
    Some(pearson(&time_ranks, &value_ranks).unwrap_or(0.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// `None` if either input has zero variance.
fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionParams {
    pub ratio_threshold: f64,
    pub top_k: usize,
    pub noun_tag: String,
    /// Neologisms must occur at least this often in MODERN.
    pub min_modern_count: u64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self { ratio_threshold: 20.0, top_k: 1000, noun_tag: "NN".into(), min_modern_count: 0 }
    }
}

/// `f_m / f_h > threshold`, where an unseen HISTORICAL word with MODERN
/// occurrences always passes.
pub fn passes_ratio(table: &FrequencyTable, word: &str, threshold: f64) -> bool {
    let fm = table.partition_frequency(word, Partition::Modern);
    let fh = table.partition_frequency(word, Partition::Historical);
    if fm <= 0.0 {
        return false;
    }
    fh == 0.0 || fm / fh > threshold
}

/// Analysis nouns passing the ratio threshold, by descending MODERN
/// frequency (ties by word), truncated to `top_k`.
pub fn select_neologisms(table: &FrequencyTable, lexicon: &PosLexicon, params: &SelectionParams) -> Vec<String> {
    let mut hits: Vec<(&str, f64)> = table
        .words()
        .filter(|(w, _)| {
            is_analysis_noun(w, lexicon, table, Partition::Modern, &params.noun_tag)
                && table.partition_count(w, Partition::Modern) >= params.min_modern_count
                && passes_ratio(table, w, params.ratio_threshold)
        })
        .map(|(w, _)| (w, table.partition_frequency(w, Partition::Modern)))
        .collect();
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    hits.into_iter().take(params.top_k).map(|(w, _)| w.to_string()).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioReading {
    /// `f_m(neologism) / f_h(control)`.
    #[default]
    AsWritten,
    /// `f_m(neologism) / f_m(control)`.
    ModernBoth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ControlMode {
    Stable,
    Relaxed,
}

impl ControlMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::Stable => "STABLE",
            ControlMode::Relaxed => "RELAXED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchParams {
    pub delta: f64,
    pub length_tolerance: usize,
    pub stability_bound: f64,
    pub ratio_reading: RatioReading,
    pub ratio_threshold: f64,
    pub noun_tag: String,
    /// Controls must occur at least this often in HISTORICAL.
    pub min_historical_count: u64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            delta: 0.25,
            length_tolerance: 2,
            stability_bound: 0.1,
            ratio_reading: RatioReading::AsWritten,
            ratio_threshold: 20.0,
            noun_tag: "NN".into(),
            min_historical_count: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPair {
    pub neologism: String,
    pub control: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedWordSet {
    pub pairs: Vec<WordPair>,
    pub mode: ControlMode,
    pub params: MatchParams,
    pub seed: Option<u64>,
}

impl PairedWordSet {
    pub fn matched(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().filter_map(|p| p.control.as_deref().map(|c| (p.neologism.as_str(), c)))
    }

    pub fn matched_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.control.is_some()).count()
    }

    pub fn unmatched_count(&self) -> usize {
        self.pairs.len() - self.matched_count()
    }

    /// TSV `neologism<TAB>control<TAB>mode`; unmatched rows carry `NONE`.
    pub fn write_tsv(&self, path: &Path) -> Result<(), SelectError> {
        let mut out = String::from("neologism\tcontrol\tmode\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{}\t{}\t{}", p.neologism, p.control.as_deref().unwrap_or("NONE"), self.mode.as_str());
        }
        fs::write(path, out).map_err(|source| SelectError::Io { path: path.to_path_buf(), source })
    }

    pub fn write_params(&self, path: &Path) -> Result<(), SelectError> {
        let block = ParamBlock { mode: self.mode, params: self.params.clone(), seed: self.seed };
        let json = serde_json::to_string_pretty(&block).expect("parameter block serializes");
        fs::write(path, json + "\n").map_err(|source| SelectError::Io { path: path.to_path_buf(), source })
    }

    pub fn read(tsv: &Path, params: &Path) -> Result<Self, SelectError> {
        let text = fs::read_to_string(params).map_err(|source| SelectError::Io { path: params.to_path_buf(), source })?;
        let block: ParamBlock =
            serde_json::from_str(&text).map_err(|source| SelectError::Json { path: params.to_path_buf(), source })?;
        let text = fs::read_to_string(tsv).map_err(|source| SelectError::Io { path: tsv.to_path_buf(), source })?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(SelectError::Parse {
                    path: tsv.to_path_buf(),
                    line: i + 1,
                    message: "expected neologism<TAB>control<TAB>mode".into(),
                });
            }
            let control = (f[1] != "NONE").then(|| f[1].to_string());
            pairs.push(WordPair { neologism: f[0].to_string(), control });
        }
        Ok(Self { pairs, mode: block.mode, params: block.params, seed: block.seed })
    }
}

#[derive(Serialize, Deserialize)]
struct ParamBlock {
    mode: ControlMode,
    params: MatchParams,
    seed: Option<u64>,
}

struct Candidate<'a> {
    word: &'a str,
    len: usize,
    fh: f64,
    fm: f64,
}

fn char_len(w: &str) -> usize {
    w.chars().count()
}

/// Non-neologism analysis nouns seen in HISTORICAL, optionally restricted to
/// stable growth, in lexicographic order.
fn control_pool<'a>(
    neologisms: &HashSet<&str>,
    table: &'a FrequencyTable,
    lexicon: &PosLexicon,
    params: &MatchParams,
    require_stable: bool,
) -> Vec<Candidate<'a>> {
    table
        .words()
        .filter(|(w, _)| {
            !neologisms.contains(w)
                && !passes_ratio(table, w, params.ratio_threshold)
                && table.partition_count(w, Partition::Historical) >= params.min_historical_count.max(1)
                && is_analysis_noun(w, lexicon, table, Partition::Historical, &params.noun_tag)
        })
        .filter(|(w, _)| {
            !require_stable
                || growth_rate(&table.historical_series(w)).is_some_and(|r| r.abs() <= params.stability_bound)
        })
        .map(|(w, _)| Candidate {
            word: w,
            len: char_len(w),
            fh: table.partition_frequency(w, Partition::Historical),
            fm: table.partition_frequency(w, Partition::Modern),
        })
        .collect()
}

/// `Some(ratio)` if the candidate satisfies the frequency and length
/// constraints for a neologism with MODERN frequency `fm_n`.
fn match_ratio(fm_n: f64, len_n: usize, c: &Candidate<'_>, params: &MatchParams) -> Option<f64> {
    let denom = match params.ratio_reading {
        RatioReading::AsWritten => c.fh,
        RatioReading::ModernBoth => c.fm,
    };
    if denom <= 0.0 || len_n.abs_diff(c.len) > params.length_tolerance {
        return None;
    }
    let ratio = fm_n / denom;
    (ratio > 1.0 - params.delta && ratio < 1.0 + params.delta).then_some(ratio)
}

fn greedy_order(neologisms: &[String], table: &FrequencyTable) -> Vec<usize> {
    let mut order: Vec<usize> = (0..neologisms.len()).collect();
    let fm = |i: usize| table.partition_frequency(&neologisms[i], Partition::Modern);
    order.sort_by(|&a, &b| fm(b).total_cmp(&fm(a)).then_with(|| neologisms[a].cmp(&neologisms[b])));
    order
}

fn match_controls(
    neologisms: &[String],
    table: &FrequencyTable,
    lexicon: &PosLexicon,
    params: &MatchParams,
    mode: ControlMode,
    seed: Option<u64>,
) -> PairedWordSet {
    let neo_set: HashSet<&str> = neologisms.iter().map(String::as_str).collect();
    let pool = control_pool(&neo_set, table, lexicon, params, mode == ControlMode::Stable);
    let mut used = vec![false; pool.len()];
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut controls: Vec<Option<String>> = vec![None; neologisms.len()];

    for i in greedy_order(neologisms, table) {
        let w = &neologisms[i];
        let fm_n = table.partition_frequency(w, Partition::Modern);
        let len_n = char_len(w);
        let eligible: Vec<(usize, f64)> = pool
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .filter_map(|(k, c)| match_ratio(fm_n, len_n, c, params).map(|r| (k, r)))
            .collect();
        let pick = match rng.as_mut() {
            None => eligible
                .iter()
                .min_by(|a, b| {
                    let (ca, cb) = (&pool[a.0], &pool[b.0]);
                    (a.1 - 1.0)
                        .abs()
                        .total_cmp(&(b.1 - 1.0).abs())
                        .then(len_n.abs_diff(ca.len).cmp(&len_n.abs_diff(cb.len)))
                        .then(ca.word.cmp(cb.word))
                })
                .map(|e| e.0),
            Some(rng) if !eligible.is_empty() => Some(eligible[rng.random_range(0..eligible.len())].0),
            Some(_) => None,
        };
        if let Some(k) = pick {
            used[k] = true;
            controls[i] = Some(pool[k].word.to_string());
        }
    }

    let pairs = neologisms
        .iter()
        .zip(controls)
        .map(|(n, c)| WordPair { neologism: n.clone(), control: c })
        .collect();
    PairedWordSet { pairs, mode, params: params.clone(), seed }
}

/// Greedy one-to-one matching under the frequency, length and stability
/// constraints. Neologisms are served by descending MODERN frequency and
/// take the eligible control whose frequency ratio is closest to 1.
pub fn match_stable_controls(
    neologisms: &[String],
    table: &FrequencyTable,
    lexicon: &PosLexicon,
    params: &MatchParams,
) -> PairedWordSet {
    match_controls(neologisms, table, lexicon, params, ControlMode::Stable, None)
}

/// Like [`match_stable_controls`] without the stability bound, picking
/// uniformly among eligible controls.
pub fn sample_relaxed_controls(
    neologisms: &[String],
    table: &FrequencyTable,
    lexicon: &PosLexicon,
    params: &MatchParams,
    seed: u64,
) -> PairedWordSet {
    match_controls(neologisms, table, lexicon, params, ControlMode::Relaxed, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Slice, SlicedCorpus, TokenizerConfig};
    use proptest::prelude::*;

    /// Brute-force Spearman: rank by counting, then Pearson from sums.
    fn spearman_oracle(series: &[Option<f64>]) -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            series.iter().enumerate().filter_map(|(t, v)| v.map(|v| ((t + 1) as f64, v))).collect();
        if pts.len() < 3 {
            return None;
        }
        let rank = |xs: &[f64], x: f64| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let eq = xs.iter().filter(|&&y| y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        };
        let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let rt: Vec<f64> = ts.iter().map(|&t| rank(&ts, t)).collect();
        let rv: Vec<f64> = vs.iter().map(|&v| rank(&vs, v)).collect();
        let n = rt.len() as f64;
        let (st, sv) = (rt.iter().sum::<f64>(), rv.iter().sum::<f64>());
        let stt: f64 = rt.iter().map(|x| x * x).sum();
        let svv: f64 = rv.iter().map(|x| x * x).sum();
        let stv: f64 = rt.iter().zip(&rv).map(|(a, b)| a * b).sum();
        let den = ((n * stt - st * st) * (n * svv - sv * sv)).sqrt();
        if den == 0.0 {
            return Some(0.0);
        }
        Some((n * stv - st * sv) / den)
    }

    #[test]
    fn growth_rate_examples() {
        let s = |v: &[f64]| v.iter().map(|x| Some(*x)).collect::<Vec<_>>();
        assert_eq!(growth_rate(&s(&[1.0, 2.0, 3.0, 4.0])), Some(1.0));
        assert_eq!(growth_rate(&s(&[4.0, 3.0, 2.0, 1.0])), Some(-1.0));
        let r = growth_rate(&s(&[1.0, 2.0, 2.0, 3.0])).unwrap();
        assert!((r - 0.948_683_298_050_513_8).abs() < 1e-12);
        assert!((r - spearman_oracle(&s(&[1.0, 2.0, 2.0, 3.0])).unwrap()).abs() < 1e-12);
        assert_eq!(growth_rate(&s(&[0.5, 0.5, 0.5])), Some(0.0));
        assert_eq!(growth_rate(&[Some(1.0), None, Some(2.0)]), None);
        assert_eq!(growth_rate(&[Some(1.0), None, Some(2.0), Some(3.0)]), Some(1.0));
    }

    proptest! {
        #[test]
        fn growth_rate_matches_oracle(series in prop::collection::vec(prop::option::weighted(0.85, 0u8..6), 0..18)) {
            let s: Vec<Option<f64>> = series.iter().map(|v| v.map(f64::from)).collect();
            match (growth_rate(&s), spearman_oracle(&s)) {
                (None, None) => {}
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b),
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn growth_rate_is_rank_invariant(series in prop::collection::vec(0.0f64..1.0, 3..18)) {
            let s: Vec<Option<f64>> = series.iter().map(|v| Some(*v)).collect();
            let t: Vec<Option<f64>> = series.iter().map(|v| Some((3.0 * v).exp() + 7.0)).collect();
            let (a, b) = (growth_rate(&s).unwrap(), growth_rate(&t).unwrap());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    /// Builds a table from per-slice word counts; `MODERN` is the last slice.
    fn table(hist: &[&[(&str, usize)]], modern: &[(&str, usize)]) -> FrequencyTable {
        let mut slices = Vec::new();
        let mut render = |id: String, p: Partition, counts: &[(&str, usize)]| {
            let mut text = String::new();
            for (w, c) in counts {
                for _ in 0..*c {
                    text.push_str(w);
                    text.push(' ');
                }
            }
            slices.push(Slice { id, partition: p, documents: vec![Document { name: "d".into(), text }] });
        };
        for (i, h) in hist.iter().enumerate() {
            render(format!("h{i}"), Partition::Historical, h);
        }
        render("m".into(), Partition::Modern, modern);
        FrequencyTable::build(&SlicedCorpus::from_slices(slices, TokenizerConfig::default()).unwrap())
    }

    fn nouns(words: &[&str]) -> PosLexicon {
        let mut l = PosLexicon::default();
        for w in words {
            l.add(w, "NN", 1);
        }
        l
    }

    #[test]
    fn ratio_threshold_examples() {
        // f_m = 40/1000 against f_h = 1/1000 gives ratio 40.
        let t = table(&[&[("aaa", 1), ("pad", 999)]], &[("aaa", 40), ("pad", 960)]);
        let l = nouns(&["aaa", "pad"]);
        assert_eq!(select_neologisms(&t, &l, &SelectionParams::default()), vec!["aaa"]);
        // equal frequencies
        let t = table(&[&[("aaa", 5), ("pad", 5)]], &[("aaa", 5), ("pad", 5)]);
        assert!(select_neologisms(&t, &l, &SelectionParams::default()).is_empty());
        // unseen historically
        let t = table(&[&[("pad", 10)]], &[("aaa", 1), ("pad", 10)]);
        assert_eq!(select_neologisms(&t, &l, &SelectionParams::default()), vec!["aaa"]);
    }

    #[test]
    fn stable_match_single_eligible_control() {
        // Neologisms "newa", "newb"; one flat control "flat" with f_h equal to f_m(newa).
        let flat = ("flat", 10);
        let pad = ("padding", 90);
        let t = table(
            &[&[flat, pad], &[flat, pad], &[flat, pad]],
            &[("newa", 10), ("newb", 10), ("padding", 80)],
        );
        let l = nouns(&["newa", "newb", "flat", "padding"]);
        let neos = select_neologisms(&t, &l, &SelectionParams::default());
        assert_eq!(neos, vec!["newa", "newb"]);
        let set = match_stable_controls(&neos, &t, &l, &MatchParams::default());
        assert_eq!(set.matched_count(), 1);
        assert_eq!(set.unmatched_count(), 1);
        assert_eq!(set.pairs[0], WordPair { neologism: "newa".into(), control: Some("flat".into()) });
    }

    #[test]
    fn unstable_candidate_ineligible_in_stable_mode() {
        // "rise" grows steadily: rank correlation 1.
        let t = table(
            &[&[("rise", 8), ("pad", 92)], &[("rise", 10), ("pad", 90)], &[("rise", 12), ("pad", 88)]],
            &[("newa", 10), ("pad", 90)],
        );
        let l = nouns(&["newa", "rise", "pad"]);
        let neos = vec!["newa".to_string()];
        let stable = match_stable_controls(&neos, &t, &l, &MatchParams::default());
        assert_eq!(stable.matched_count(), 0);
        let relaxed = sample_relaxed_controls(&neos, &t, &l, &MatchParams::default(), 1);
        assert_eq!(relaxed.pairs[0].control.as_deref(), Some("rise"));
    }

    #[test]
    fn relaxed_sampling_is_seeded_and_valid() {
        let mut hist: Vec<Vec<(&str, usize)>> = Vec::new();
        let pool = ["cand", "cane", "canf", "cang", "canh", "cani"];
        for s in 0..3 {
            let mut row: Vec<(&str, usize)> = pool.iter().map(|w| (*w, 10 + s)).collect();
            row.push(("pad", 100));
            hist.push(row);
        }
        let hist_refs: Vec<&[(&str, usize)]> = hist.iter().map(Vec::as_slice).collect();
        let t = table(&hist_refs, &[("neoa", 6), ("neob", 6), ("pad", 50)]);
        let mut words = pool.to_vec();
        words.extend(["neoa", "neob", "pad"]);
        let l = nouns(&words);
        let neos = vec!["neoa".to_string(), "neob".to_string()];
        let p = MatchParams::default();
        let a = sample_relaxed_controls(&neos, &t, &l, &p, 42);
        let b = sample_relaxed_controls(&neos, &t, &l, &p, 42);
        assert_eq!(a, b);
        for seed in 0..20 {
            let s = sample_relaxed_controls(&neos, &t, &l, &p, seed);
            let controls: Vec<&str> = s.matched().map(|(_, c)| c).collect();
            let distinct: HashSet<&str> = controls.iter().copied().collect();
            assert_eq!(distinct.len(), controls.len());
            for (n, c) in s.matched() {
                let ratio = t.partition_frequency(n, Partition::Modern) / t.partition_frequency(c, Partition::Historical);
                assert!(ratio > 0.75 && ratio < 1.25);
                assert!(n.len().abs_diff(c.len()) <= 2);
            }
        }
    }

    #[test]
    fn modern_both_reading() {
        // The control is frequent in MODERN only under the alternative reading.
        let t = table(&[&[("ctrl", 100), ("pad", 900)]], &[("neoa", 10), ("ctrl", 10), ("pad", 980)]);
        let l = nouns(&["neoa", "ctrl", "pad"]);
        let neos = vec!["neoa".to_string()];
        let as_written = MatchParams { stability_bound: 1.0, ..Default::default() };
        assert_eq!(sample_relaxed_controls(&neos, &t, &l, &as_written, 0).matched_count(), 0);
        let alt = MatchParams { ratio_reading: RatioReading::ModernBoth, ..as_written };
        assert_eq!(sample_relaxed_controls(&neos, &t, &l, &alt, 0).matched_count(), 1);
    }

    #[test]
    fn persistence_roundtrip() {
        let set = PairedWordSet {
            pairs: vec![
                WordPair { neologism: "a".into(), control: Some("b".into()) },
                WordPair { neologism: "c".into(), control: None },
            ],
            mode: ControlMode::Relaxed,
            params: MatchParams::default(),
            seed: Some(9),
        };
        let dir = tempfile::tempdir().unwrap();
        let (tsv, json) = (dir.path().join("p.tsv"), dir.path().join("p.json"));
        set.write_tsv(&tsv).unwrap();
        set.write_params(&json).unwrap();
        assert_eq!(PairedWordSet::read(&tsv, &json).unwrap(), set);
        assert!(fs::read_to_string(&tsv).unwrap().contains("c\tNONE\tRELAXED"));
    }
}
