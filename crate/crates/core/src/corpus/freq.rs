use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::{for_each_token, io_err, CorpusError, Partition, SlicedCorpus};

pub const FREQ_FILE: &str = "freq.tsv";
pub const SUMMARY_FILE: &str = "freq_summary.tsv";
pub const SLICES_FILE: &str = "slices.tsv";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceInfo {
    pub id: String,
    pub partition: Partition,
    pub tokens: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordCounts {
    /// Raw count per slice, aligned with `FrequencyTable::slices`.
    pub counts: Vec<u64>,
    /// Indexed by `Partition::index`.
    pub capitalized: [u64; 2],
    pub lowercase: [u64; 2],
}

/// Per-word counts and normalized frequencies by slice and partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    slices: Vec<SliceInfo>,
    words: BTreeMap<String, WordCounts>,
}

#[derive(Default)]
struct Tally {
    count: u64,
    caps: u64,
}

fn merge(mut a: HashMap<String, Tally>, b: HashMap<String, Tally>) -> HashMap<String, Tally> {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (w, t) in b {
        let e = a.entry(w).or_default();
        e.count += t.count;
        e.caps += t.caps;
    }
    a
}

impl FrequencyTable {
    pub fn build(corpus: &SlicedCorpus) -> Self {
        let rules = corpus.rules();
        let slices: Vec<SliceInfo> = corpus
            .slices()
            .iter()
            .zip(corpus.token_counts())
            .map(|(s, &tokens)| SliceInfo { id: s.id.clone(), partition: s.partition, tokens })
            .collect();
        let n = slices.len();
        let mut words: BTreeMap<String, WordCounts> = BTreeMap::new();
        for (si, slice) in corpus.slices().iter().enumerate() {
            let tallies = slice
                .documents
                .par_iter()
                .map(|d| {
                    let mut m: HashMap<String, Tally> = HashMap::new();
                    for_each_token(&d.text, rules, |t| {
                        let caps = t.chars().next().is_some_and(char::is_uppercase);
                        let e = m.entry(t.to_lowercase()).or_default();
                        e.count += 1;
                        e.caps += u64::from(caps);
                    });
                    m
                })
                .reduce(HashMap::new, merge);
            let p = slice.partition.index();
            for (w, t) in tallies {
                let wc = words.entry(w).or_insert_with(|| WordCounts {
                    counts: vec![0; n],
                    ..Default::default()
                });
                wc.counts[si] += t.count;
                wc.capitalized[p] += t.caps;
                wc.lowercase[p] += t.count - t.caps;
            }
        }
        Self { slices, words }
    }

    pub fn slices(&self) -> &[SliceInfo] {
        &self.slices
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, &WordCounts)> {
        self.words.iter().map(|(w, c)| (w.as_str(), c))
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn get(&self, word: &str) -> Option<&WordCounts> {
        self.words.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains_key(word)
    }

    pub fn historical_slice_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.slices.iter().enumerate().filter(|(_, s)| s.partition == Partition::Historical).map(|(i, _)| i)
    }

    /// Slices whose token total is zero; their normalized frequencies are undefined.
    pub fn empty_slices(&self) -> Vec<&str> {
        self.slices.iter().filter(|s| s.tokens == 0).map(|s| s.id.as_str()).collect()
    }

    pub fn partition_tokens(&self, partition: Partition) -> u64 {
        self.slices.iter().filter(|s| s.partition == partition).map(|s| s.tokens).sum()
    }

    pub fn count(&self, word: &str, slice: usize) -> u64 {
        self.words.get(word).map_or(0, |c| c.counts[slice])
    }

    /// `count / slice_tokens`, or `None` for a zero-token slice.
    pub fn slice_frequency(&self, word: &str, slice: usize) -> Option<f64> {
        let tokens = self.slices[slice].tokens;
        (tokens > 0).then(|| self.count(word, slice) as f64 / tokens as f64)
    }

    pub fn partition_count(&self, word: &str, partition: Partition) -> u64 {
        let Some(c) = self.words.get(word) else { return 0 };
        self.slices
            .iter()
            .zip(&c.counts)
            .filter(|(s, _)| s.partition == partition)
            .map(|(_, n)| n)
            .sum()
    }

    /// Aggregate normalized frequency over a partition; zero if the partition is empty.
    pub fn partition_frequency(&self, word: &str, partition: Partition) -> f64 {
        let total = self.partition_tokens(partition);
        if total == 0 {
            0.0
        } else {
            self.partition_count(word, partition) as f64 / total as f64
        }
    }

    pub fn capitalized_count(&self, word: &str, partition: Partition) -> u64 {
        self.words.get(word).map_or(0, |c| c.capitalized[partition.index()])
    }

    pub fn lowercase_count(&self, word: &str, partition: Partition) -> u64 {
        self.words.get(word).map_or(0, |c| c.lowercase[partition.index()])
    }

    /// Normalized frequencies over the HISTORICAL slices in order; `None`
    /// marks a zero-token slice.
    pub fn historical_series(&self, word: &str) -> Vec<Option<f64>> {
        let idx: Vec<usize> = self.historical_slice_indices().collect();
        idx.into_iter().map(|i| self.slice_frequency(word, i)).collect()
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<(), CorpusError> {
        let mut slices = String::from("slice_id\tpartition\ttokens\n");
        for s in &self.slices {
            let _ = writeln!(slices, "{}\t{}\t{}", s.id, s.partition, s.tokens);
        }
        let mut freq = String::from("word\tslice_id\tcount\n");
        let mut summary = String::from("word\tpartition\tcount\tcapitalized\tlowercase\n");
        for (w, c) in &self.words {
            for (s, &n) in self.slices.iter().zip(&c.counts) {
                if n > 0 {
                    let _ = writeln!(freq, "{w}\t{}\t{n}", s.id);
                }
            }
            for p in Partition::ALL {
                let total = c.capitalized[p.index()] + c.lowercase[p.index()];
                if total > 0 {
                    let _ = writeln!(
                        summary,
                        "{w}\t{p}\t{total}\t{}\t{}",
                        c.capitalized[p.index()],
                        c.lowercase[p.index()]
                    );
                }
            }
        }
        for (name, body) in [(SLICES_FILE, slices), (FREQ_FILE, freq), (SUMMARY_FILE, summary)] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(io_err(&path))?;
        }
        Ok(())
    }

    pub fn read_from_dir(dir: &Path) -> Result<Self, CorpusError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map(|t| (path.clone(), t)).map_err(io_err(&path))
        };
        let fail = |path: &Path, line: usize, message: &str| CorpusError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };

        let (path, text) = read(SLICES_FILE)?;
        let mut slices = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(fail(&path, i + 1, "expected slice_id, partition, tokens"));
            }
            let partition = f[1].parse().map_err(|e: String| fail(&path, i + 1, &e))?;
            let tokens = f[2].parse().map_err(|_| fail(&path, i + 1, "bad token count"))?;
            slices.push(SliceInfo { id: f[0].to_string(), partition, tokens });
        }
        let slice_index: HashMap<&str, usize> =
            slices.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
        let n = slices.len();

        let mut words: BTreeMap<String, WordCounts> = BTreeMap::new();
        let (path, text) = read(FREQ_FILE)?;
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(fail(&path, i + 1, "expected word, slice_id, count"));
            }
            let si = *slice_index.get(f[1]).ok_or_else(|| CorpusError::UnknownSlice(f[1].to_string()))?;
            let count: u64 = f[2].parse().map_err(|_| fail(&path, i + 1, "bad count"))?;
            let wc = words
                .entry(f[0].to_string())
                .or_insert_with(|| WordCounts { counts: vec![0; n], ..Default::default() });
            wc.counts[si] = count;
        }
        let (path, text) = read(SUMMARY_FILE)?;
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(fail(&path, i + 1, "expected word, partition, count, capitalized, lowercase"));
            }
            let p: Partition = f[1].parse().map_err(|e: String| fail(&path, i + 1, &e))?;
            let caps: u64 = f[3].parse().map_err(|_| fail(&path, i + 1, "bad capitalized count"))?;
            let lower: u64 = f[4].parse().map_err(|_| fail(&path, i + 1, "bad lowercase count"))?;
            let wc = words
                .get_mut(f[0])
                .ok_or_else(|| fail(&path, i + 1, "word missing from frequency file"))?;
            wc.capitalized[p.index()] = caps;
            wc.lowercase[p.index()] = lower;
        }
        Ok(Self { slices, words })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Slice, TokenizerConfig};

    fn corpus(slices: &[(&str, Partition, &str)]) -> SlicedCorpus {
        SlicedCorpus::from_slices(
            slices
                .iter()
                .map(|(id, p, text)| Slice {
                    id: id.to_string(),
                    partition: *p,
                    documents: vec![Document { name: "d".into(), text: text.to_string() }],
                })
                .collect(),
            TokenizerConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_slice_frequencies() {
        let t = FrequencyTable::build(&corpus(&[("s", Partition::Historical, "a a b")]));
        assert_eq!(t.slice_frequency("a", 0), Some(2.0 / 3.0));
        assert_eq!(t.slice_frequency("b", 0), Some(1.0 / 3.0));
    }

    #[test]
    fn two_partition_aggregates() {
        let t = FrequencyTable::build(&corpus(&[
            ("h1", Partition::Historical, "a b b c"),
            ("h2", Partition::Historical, "a a"),
            ("m", Partition::Modern, "c c c a"),
        ]));
        assert_eq!(t.partition_frequency("a", Partition::Historical), 3.0 / 6.0);
        assert_eq!(t.partition_frequency("c", Partition::Historical), 1.0 / 6.0);
        assert_eq!(t.partition_frequency("c", Partition::Modern), 3.0 / 4.0);
        assert_eq!(t.partition_frequency("b", Partition::Modern), 0.0);
        assert_eq!(t.historical_series("b"), vec![Some(0.5), Some(0.0)]);
    }

    #[test]
    fn capitalization_counts() {
        let t = FrequencyTable::build(&corpus(&[("s", Partition::Historical, "Dog dog")]));
        assert_eq!(t.capitalized_count("dog", Partition::Historical), 1);
        assert_eq!(t.lowercase_count("dog", Partition::Historical), 1);
    }

    #[test]
    fn empty_slice_is_flagged_missing() {
        let t = FrequencyTable::build(&corpus(&[
            ("h1", Partition::Historical, "a"),
            ("h2", Partition::Historical, ""),
        ]));
        assert_eq!(t.empty_slices(), vec!["h2"]);
        assert_eq!(t.historical_series("a"), vec![Some(1.0), None]);
    }

    #[test]
    fn persistence_roundtrip_is_stable() {
        let t = FrequencyTable::build(&corpus(&[
            ("h1", Partition::Historical, "The dog and the Cat"),
            ("m", Partition::Modern, "email Email email cat"),
        ]));
        let d1 = tempfile::tempdir().unwrap();
        t.write_to_dir(d1.path()).unwrap();
        let back = FrequencyTable::read_from_dir(d1.path()).unwrap();
        assert_eq!(back, t);
        let d2 = tempfile::tempdir().unwrap();
        back.write_to_dir(d2.path()).unwrap();
        for f in [FREQ_FILE, SUMMARY_FILE, SLICES_FILE] {
            assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn table_invariants(texts in prop::collection::vec("[aAbBcC ]{0,40}", 1..5)) {
                let slices: Vec<(String, Partition, String)> = texts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let p = if i + 1 == texts.len() { Partition::Modern } else { Partition::Historical };
                        (format!("s{i}"), p, t.clone())
                    })
                    .collect();
                let refs: Vec<(&str, Partition, &str)> =
                    slices.iter().map(|(a, p, t)| (a.as_str(), *p, t.as_str())).collect();
                let t = FrequencyTable::build(&corpus(&refs));
                for (si, s) in t.slices().iter().enumerate() {
                    if s.tokens > 0 {
                        let sum: f64 = t.words().map(|(w, _)| t.slice_frequency(w, si).unwrap()).sum();
                        prop_assert!((sum - 1.0).abs() < 1e-9);
                    }
                }
                for (w, c) in t.words() {
                    for p in Partition::ALL {
                        prop_assert_eq!(c.capitalized[p.index()] + c.lowercase[p.index()], t.partition_count(w, p));
                        let f = t.partition_frequency(w, p);
                        prop_assert!((0.0..=1.0).contains(&f));
                    }
                }
            }
        }
    }
}
