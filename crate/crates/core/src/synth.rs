//! Synthetic diachronic corpora with planted topics, frequency trends and
//! neologisms.
//!
//! Every sentence is drawn from a single topic. Topic weights follow a
//! straight line across slices (flat, growing or decaying), and words within
//! a topic follow a Zipf-like profile. Planted neologisms join their topic's
//! inventory from their first-appearance slice on.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, Document, Partition, Slice, SlicedCorpus, TokenizerConfig};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic corpus config: {0}")]
    Invalid(String),
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const TAGGED_FILE: &str = "tagged.tsv";
pub const TRUTH_FILE: &str = "ground_truth.json";
pub const CONFIG_FILE: &str = "synth.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CurveKind {
    Flat,
    Growing,
    Decaying,
}

/// Topic weight, linear from `start` at the first slice to `end` at the
/// MODERN block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub start: f64,
    pub end: f64,
}

impl Curve {
    pub fn flat(weight: f64) -> Self {
        Self { kind: CurveKind::Flat, start: weight, end: weight }
    }

    pub fn linear(start: f64, end: f64) -> Self {
        let kind = if end > start {
            CurveKind::Growing
        } else if end < start {
            CurveKind::Decaying
        } else {
            CurveKind::Flat
        };
        Self { kind, start, end }
    }

    /// Weight at slice `t` of `0..=last`.
    pub fn weight(&self, t: usize, last: usize) -> f64 {
        if last == 0 {
            return self.start;
        }
        self.start + (self.end - self.start) * t as f64 / last as f64
    }

    pub fn sign(&self) -> i8 {
        match self.kind {
            CurveKind::Flat => 0,
            CurveKind::Growing => 1,
            CurveKind::Decaying => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedNeologism {
    pub word: String,
    /// Slice index (0-based, MODERN = number of HISTORICAL slices).
    pub first_slice: usize,
    /// Weight relative to the topic's most frequent word.
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub name: String,
    pub words: Vec<String>,
    pub curve: Curve,
    #[serde(default = "default_tag")]
    pub tag: String,
    /// Words are always written capitalized, like proper nouns.
    #[serde(default)]
    pub capitalized: bool,
    #[serde(default)]
    pub neologisms: Vec<PlantedNeologism>,
    /// Within-topic weight of the word at rank `r` is `1 / (r + 1)^zipf`.
    #[serde(default = "default_zipf")]
    pub zipf: f64,
    /// Topics sharing a region can share sentences; see
    /// [`SynthConfig::region_mixing`].
    #[serde(default)]
    pub region: Option<String>,
}

fn default_tag() -> String {
    "NN".into()
}

fn default_zipf() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Topics and words drawn independently per sentence and token.
    #[default]
    Multinomial,
    /// Counts fixed to their expected values by largest-remainder
    /// apportionment, then shuffled. FLAT words get exactly constant
    /// relative frequencies.
    Quota,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub historical_slices: usize,
    /// One entry per HISTORICAL slice, then one for the MODERN block.
    pub slice_tokens: Vec<u64>,
    #[serde(default = "default_sentence_length")]
    pub sentence_length: usize,
    /// Documents are cut after this many tokens.
    #[serde(default = "default_doc_tokens")]
    pub doc_tokens: u64,
    #[serde(default)]
    pub sampling: Sampling,
    /// Block size for quota sampling; slice sizes must be multiples of it.
    #[serde(default = "default_quota_unit")]
    pub quota_unit: u64,
    /// Fraction of each topic's sentences that draw every token from the
    /// topic's whole region instead. 0 keeps all sentences topic-pure.
    /// Per-word expected counts do not depend on it.
    #[serde(default)]
    pub region_mixing: f64,
    /// Fraction of sentences that draw every token from the whole slice,
    /// taken before region mixing.
    #[serde(default)]
    pub background_mixing: f64,
    pub topics: Vec<TopicSpec>,
}

fn default_sentence_length() -> usize {
    10
}

fn default_doc_tokens() -> u64 {
    50_000
}

fn default_quota_unit() -> u64 {
    10_000
}

impl SynthConfig {
    fn last_slice(&self) -> usize {
        self.historical_slices
    }

    pub fn slice_id(&self, t: usize) -> String {
        if t == self.historical_slices {
            "modern".into()
        } else {
            format!("s{:02}", t + 1)
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.slice_tokens.iter().sum()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        let last = self.last_slice();
        if self.historical_slices == 0 {
            return bad("need at least one HISTORICAL slice".into());
        }
        if self.slice_tokens.len() != last + 1 {
            return bad(format!("{} slice sizes for {} slices", self.slice_tokens.len(), last + 1));
        }
        if self.slice_tokens.contains(&0) {
            return bad("slice sizes must be positive".into());
        }
        if self.sentence_length == 0 || self.doc_tokens == 0 {
            return bad("sentence length and document size must be positive".into());
        }
        if self.sampling == Sampling::Quota
            && (self.quota_unit == 0 || self.slice_tokens.iter().any(|n| n % self.quota_unit != 0))
        {
            return bad(format!("quota sampling needs slice sizes that are multiples of {}", self.quota_unit));
        }
        for (name, m) in [("region_mixing", self.region_mixing), ("background_mixing", self.background_mixing)] {
            if !(0.0..=1.0).contains(&m) {
                return bad(format!("{name} must lie in [0, 1], got {m}"));
            }
        }
        if self.region_mixing + self.background_mixing > 1.0 {
            return bad("region_mixing and background_mixing add up to more than 1".into());
        }
        if self.topics.is_empty() {
            return bad("no topics".into());
        }
        let mut seen = HashSet::new();
        for topic in &self.topics {
            if topic.words.is_empty() {
                return bad(format!("topic `{}` has no words", topic.name));
            }
            let c = topic.curve;
            if c.start < 0.0 || c.end < 0.0 || !c.start.is_finite() || !c.end.is_finite() {
                return bad(format!("topic `{}` has a negative or non-finite weight", topic.name));
            }
            if Curve::linear(c.start, c.end).kind != c.kind {
                return bad(format!("topic `{}`: {:?} curve from {} to {}", topic.name, c.kind, c.start, c.end));
            }
            if !(topic.zipf >= 0.0) {
                return bad(format!("topic `{}` has a negative Zipf exponent", topic.name));
            }
            for n in &topic.neologisms {
                if n.first_slice > last {
                    return bad(format!("neologism `{}` first appears after the last slice", n.word));
                }
                if !(n.share > 0.0) {
                    return bad(format!("neologism `{}` needs a positive share", n.word));
                }
            }
            for w in topic.words.iter().chain(topic.neologisms.iter().map(|n| &n.word)) {
                if w.is_empty() || w.chars().any(|c| !c.is_alphanumeric()) || w.chars().any(char::is_uppercase) {
                    return bad(format!("word `{w}` must be lowercase alphanumeric"));
                }
                if !seen.insert(w.as_str()) {
                    return bad(format!("word `{w}` appears in more than one place"));
                }
            }
        }
        for t in 0..=last {
            let sum: f64 = self.topics.iter().map(|k| k.curve.weight(t, last)).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return bad(format!("topic weights sum to {sum} at slice {t}"));
            }
        }
        Ok(())
    }
}

/// Expected labels, derived from the config alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub neologisms: Vec<String>,
    /// -1, 0 or +1 for the trend of each word's HISTORICAL series.
    pub growth_sign: BTreeMap<String, i8>,
    pub topic: BTreeMap<String, String>,
}

pub fn ground_truth(config: &SynthConfig) -> GroundTruth {
    let mut neologisms = Vec::new();
    let mut growth_sign = BTreeMap::new();
    let mut topic = BTreeMap::new();
    let last = config.last_slice();
    for k in &config.topics {
        for w in &k.words {
            growth_sign.insert(w.clone(), k.curve.sign());
            topic.insert(w.clone(), k.name.clone());
        }
        for n in &k.neologisms {
            neologisms.push(n.word.clone());
            // Zeros followed by positive counts rise; all-zero series are flat.
            let sign = match n.first_slice {
                0 => k.curve.sign(),
                f if f < last => 1,
                _ => 0,
            };
            growth_sign.insert(n.word.clone(), sign);
            topic.insert(n.word.clone(), k.name.clone());
        }
    }
    neologisms.sort();
    GroundTruth { neologisms, growth_sign, topic }
}

pub struct SynthCorpus {
    pub config: SynthConfig,
    pub corpus: SlicedCorpus,
    /// `(word, tag)` once per word type per document.
    pub tagged: Vec<(String, String)>,
    pub truth: GroundTruth,
}

/// Words of a topic active at slice `t` with their weights.
fn active_words(topic: &TopicSpec, t: usize) -> (Vec<&str>, Vec<f64>) {
    let mut words = Vec::new();
    let mut weights = Vec::new();
    for (r, w) in topic.words.iter().enumerate() {
        words.push(w.as_str());
        weights.push(1.0 / ((r + 1) as f64).powf(topic.zipf));
    }
    for n in topic.neologisms.iter().filter(|n| n.first_slice <= t) {
        words.push(n.word.as_str());
        weights.push(n.share);
    }
    (words, weights)
}

/// Splits `total` into integer parts proportional to `weights`, giving the
/// leftover units to the largest fractional remainders (ties to lower index).
pub fn largest_remainder(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || weights.is_empty() {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let assigned: u64 = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        parts[i] += 1;
    }
    parts
}

struct SentenceSink<'a> {
    config: &'a SynthConfig,
    slice: usize,
    documents: Vec<Document>,
    text: String,
    doc_tokens: u64,
    seen: BTreeMap<String, String>,
    tagged: &'a mut Vec<(String, String)>,
}

impl SentenceSink<'_> {
    fn push(&mut self, words: &[(&str, usize)]) {
        for (i, &(w, k)) in words.iter().enumerate() {
            let topic = &self.config.topics[k];
            if i > 0 {
                self.text.push(' ');
            }
            if i == 0 || topic.capitalized {
                let mut c = w.chars();
                if let Some(first) = c.next() {
                    self.text.extend(first.to_uppercase());
                    self.text.push_str(c.as_str());
                }
            } else {
                self.text.push_str(w);
            }
            self.seen.entry(w.to_string()).or_insert_with(|| topic.tag.clone());
        }
        self.text.push('\n');
        self.doc_tokens += words.len() as u64;
        if self.doc_tokens >= self.config.doc_tokens {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.text.is_empty() {
            return;
        }
        let name = format!("{}/doc{:03}.txt", self.config.slice_id(self.slice), self.documents.len());
        self.documents.push(Document { name, text: std::mem::take(&mut self.text) });
        self.tagged.extend(std::mem::take(&mut self.seen));
        self.doc_tokens = 0;
    }
}

/// For each topic, the topics it can share sentences with (itself
/// included), or `None` when it has no region partner.
fn region_members(config: &SynthConfig) -> Vec<Option<Vec<usize>>> {
    config
        .topics
        .iter()
        .map(|a| {
            let r = a.region.as_ref()?;
            let members: Vec<usize> = (0..config.topics.len()).filter(|&j| config.topics[j].region.as_ref() == Some(r)).collect();
            (members.len() > 1).then_some(members)
        })
        .collect()
}

fn sample_multinomial(config: &SynthConfig, t: usize, rng: &mut ChaCha8Rng, sink: &mut SentenceSink<'_>) {
    let last = config.last_slice();
    let topic_weights: Vec<f64> = config.topics.iter().map(|k| k.curve.weight(t, last)).collect();
    let topic_dist = WeightedAliasIndex::new(topic_weights).expect("validated topic weights");
    let inventories: Vec<(Vec<&str>, WeightedAliasIndex<f64>)> = config
        .topics
        .iter()
        .map(|k| {
            let (words, weights) = active_words(k, t);
            (words, WeightedAliasIndex::new(weights).expect("positive word weights"))
        })
        .collect();
    // A mixed sentence picks a topic per token in proportion to the slice
    // weights within the region, so each topic keeps its expected share.
    let regions: Vec<Option<(Vec<usize>, WeightedAliasIndex<f64>)>> = region_members(config)
        .into_iter()
        .map(|m| {
            let m = m?;
            let w: Vec<f64> = m.iter().map(|&j| config.topics[j].curve.weight(t, last)).collect();
            WeightedAliasIndex::new(w).ok().map(|d| (m, d))
        })
        .collect();
    let mut remaining = config.slice_tokens[t];
    let mut sentence: Vec<(&str, usize)> = Vec::with_capacity(config.sentence_length);
    while remaining > 0 {
        let k = topic_dist.sample(rng);
        let len = remaining.min(config.sentence_length as u64) as usize;
        sentence.clear();
        let u: f64 = if config.region_mixing + config.background_mixing > 0.0 { rng.random() } else { 1.0 };
        let background = u < config.background_mixing;
        let mixed = match &regions[k] {
            Some(r) if !background && u < config.background_mixing + config.region_mixing => Some(r),
            _ => None,
        };
        for _ in 0..len {
            let j = if background { topic_dist.sample(rng) } else { mixed.map_or(k, |(m, d)| m[d.sample(rng)]) };
            let (words, dist) = &inventories[j];
            sentence.push((words[dist.sample(rng)], j));
        }
        sink.push(&sentence);
        remaining -= len as u64;
    }
}

fn sample_quota(config: &SynthConfig, t: usize, rng: &mut ChaCha8Rng, sink: &mut SentenceSink<'_>) {
    let last = config.last_slice();
    let blocks = config.slice_tokens[t] / config.quota_unit;
    let flat: Vec<usize> = (0..config.topics.len()).filter(|&k| config.topics[k].curve.kind == CurveKind::Flat).collect();
    let rest: Vec<usize> = (0..config.topics.len()).filter(|&k| config.topics[k].curve.kind != CurveKind::Flat).collect();

    // FLAT topics get the same per-block quota in every slice; the others
    // share what is left of the slice.
    let mut weights: Vec<f64> = flat.iter().map(|&k| config.topics[k].curve.start).collect();
    weights.push(rest.iter().map(|&k| config.topics[k].curve.weight(t, last)).sum());
    let per_block = largest_remainder(config.quota_unit, &weights);
    let mut topic_tokens = vec![0u64; config.topics.len()];
    for (i, &k) in flat.iter().enumerate() {
        topic_tokens[k] = per_block[i] * blocks;
    }
    let rest_weights: Vec<f64> = rest.iter().map(|&k| config.topics[k].curve.weight(t, last)).collect();
    for (i, q) in largest_remainder(per_block[flat.len()] * blocks, &rest_weights).into_iter().enumerate() {
        topic_tokens[rest[i]] = q;
    }

    let members = region_members(config);
    let mut background: Vec<(&str, usize)> = Vec::new();
    let mut pools: BTreeMap<&str, Vec<(&str, usize)>> = BTreeMap::new();
    let mut sentences: Vec<Vec<(&str, usize)>> = Vec::new();
    for (k, topic) in config.topics.iter().enumerate() {
        let (words, weights) = active_words(topic, t);
        let counts = if topic.curve.kind == CurveKind::Flat {
            largest_remainder(per_block[flat.iter().position(|&f| f == k).unwrap()], &weights)
                .into_iter()
                .map(|c| c * blocks)
                .collect()
        } else {
            largest_remainder(topic_tokens[k], &weights)
        };
        let mut tokens: Vec<(&str, usize)> =
            words.iter().zip(&counts).flat_map(|(w, &c)| std::iter::repeat_n((*w, k), c as usize)).collect();
        tokens.shuffle(rng);
        let n = tokens.len() as f64;
        background.extend(tokens.drain(..(n * config.background_mixing).round() as usize));
        if members[k].is_some() {
            let pooled = (n * config.region_mixing).round() as usize;
            let region = topic.region.as_deref().expect("region members imply a region");
            pools.entry(region).or_default().extend(tokens.drain(..pooled));
        }
        sentences.extend(tokens.chunks(config.sentence_length).map(<[_]>::to_vec));
    }
    for mut pool in pools.into_values().chain([background]) {
        pool.shuffle(rng);
        sentences.extend(pool.chunks(config.sentence_length).map(<[_]>::to_vec));
    }
    sentences.shuffle(rng);
    for s in &sentences {
        sink.push(s);
    }
}

/// Deterministic for a given config, seed included.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tagged = Vec::new();
    let mut slices = Vec::with_capacity(config.slice_tokens.len());
    for t in 0..=config.last_slice() {
        let mut sink = SentenceSink {
            config,
            slice: t,
            documents: Vec::new(),
            text: String::new(),
            doc_tokens: 0,
            seen: BTreeMap::new(),
            tagged: &mut tagged,
        };
        match config.sampling {
            Sampling::Multinomial => sample_multinomial(config, t, &mut rng, &mut sink),
            Sampling::Quota => sample_quota(config, t, &mut rng, &mut sink),
        }
        sink.flush();
        let partition = if t == config.last_slice() { Partition::Modern } else { Partition::Historical };
        slices.push(Slice { id: config.slice_id(t), partition, documents: sink.documents });
    }
    let corpus = SlicedCorpus::from_slices(slices, TokenizerConfig::default())?;
    Ok(SynthCorpus { config: config.clone(), corpus, tagged, truth: ground_truth(config) })
}

impl SynthCorpus {
    /// Writes documents, `manifest.tsv`, `tagged.tsv`, `ground_truth.json`
    /// and the config itself under `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, SynthError> {
        let write = |path: PathBuf, contents: &[u8]| -> Result<(), SynthError> {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|source| SynthError::Io { path: parent.to_path_buf(), source })?;
            }
            fs::write(&path, contents).map_err(|source| SynthError::Io { path, source })
        };
        let mut manifest = String::from("# slice\tpartition\tpath\n");
        for s in self.corpus.slices() {
            let _ = writeln!(manifest, "{}\t{}", s.id, s.partition);
        }
        for s in self.corpus.slices() {
            for d in &s.documents {
                let _ = writeln!(manifest, "{}\t{}\t{}", s.id, s.partition, d.name);
                write(dir.join(&d.name), d.text.as_bytes())?;
            }
        }
        let manifest_path = dir.join(MANIFEST_FILE);
        write(manifest_path.clone(), manifest.as_bytes())?;

        let mut tagged = String::new();
        for (w, tag) in &self.tagged {
            let _ = writeln!(tagged, "{w}\t{tag}");
        }
        write(dir.join(TAGGED_FILE), tagged.as_bytes())?;
        let truth = serde_json::to_string_pretty(&self.truth).expect("ground truth serializes");
        write(dir.join(TRUTH_FILE), (truth + "\n").as_bytes())?;
        let config = serde_json::to_string_pretty(&self.config).expect("config serializes");
        write(dir.join(CONFIG_FILE), (config + "\n").as_bytes())?;
        Ok(manifest_path)
    }
}

/// Distinct pronounceable pseudo-words of 2 to 4 syllables.
pub struct WordFactory {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl WordFactory {
    const ONSETS: &'static [&'static str] =
        &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "pl", "gr", "sk"];
    const VOWELS: &'static [&'static str] = &["a", "e", "i", "o", "u", "ai", "ou"];

    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), used: HashSet::new() }
    }

    pub fn word(&mut self) -> String {
        loop {
            let syllables = self.rng.random_range(2..=4);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(Self::ONSETS[self.rng.random_range(0..Self::ONSETS.len())]);
                w.push_str(Self::VOWELS[self.rng.random_range(0..Self::VOWELS.len())]);
            }
            if self.rng.random_bool(0.3) {
                w.push(['n', 'r', 's', 'l'][self.rng.random_range(0..4)]);
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    pub fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word()).collect()
    }
}

/// Shape of a planted study; see [`planted_study`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyShape {
    pub historical_slices: usize,
    /// First and last HISTORICAL slice sizes; sizes in between are linear.
    pub historical_tokens: (u64, u64),
    pub modern_tokens: u64,
    pub flat_sizes: Vec<usize>,
    pub growing_sizes: Vec<usize>,
    pub decaying_sizes: Vec<usize>,
    /// Neologisms per growing topic.
    pub neologisms_per_growing: usize,
    /// Neologisms placed in the smallest flat topics, one per topic, cycling.
    pub flat_neologisms: usize,
    pub flat_weight: f64,
    /// Growing topics' share at the first slice and at the MODERN block.
    pub growing_weight: (f64, f64),
    pub proper_noun_topic: usize,
    pub verb_topic: usize,
    /// Region index of each FLAT topic; empty leaves them without regions.
    #[serde(default)]
    pub flat_regions: Vec<usize>,
    #[serde(default)]
    pub growing_regions: Vec<usize>,
    #[serde(default)]
    pub decaying_regions: Vec<usize>,
    #[serde(default)]
    pub region_mixing: f64,
    #[serde(default)]
    pub background_mixing: f64,
    #[serde(default)]
    pub sampling: Sampling,
    /// HISTORICAL slice sizes are rounded to multiples of this, which is
    /// also the quota block size.
    #[serde(default = "default_quota_unit")]
    pub quota_unit: u64,
}

impl StudyShape {
    /// 18 HISTORICAL slices plus a MODERN block, about two million tokens.
    pub fn full() -> Self {
        Self {
            historical_slices: 18,
            historical_tokens: (40_000, 140_000),
            modern_tokens: 400_000,
            flat_sizes: vec![90, 80, 70, 60, 50, 40, 30, 20, 15, 12, 10, 8],
            growing_sizes: vec![12, 10, 12, 10, 14, 12, 10, 12],
            decaying_sizes: vec![20, 20, 20, 20],
            neologisms_per_growing: 10,
            flat_neologisms: 16,
            flat_weight: 0.42,
            growing_weight: (0.08, 0.45),
            proper_noun_topic: 12,
            verb_topic: 15,
            // Large FLAT regions; two small regions made only of growing
            // topics (plus one small FLAT topic) hold most neologisms.
            flat_regions: vec![0, 1, 0, 1, 2, 2, 5, 5, 6, 4, 7, 7],
            growing_regions: vec![1, 3, 3, 3, 4, 4, 4, 6],
            decaying_regions: vec![0, 2, 2, 5],
            region_mixing: 0.3,
            background_mixing: 0.5,
            sampling: Sampling::Quota,
            quota_unit: 10_000,
        }
    }

    /// A few seconds of work end to end.
    pub fn toy() -> Self {
        Self {
            historical_slices: 6,
            historical_tokens: (20_000, 30_000),
            modern_tokens: 50_000,
            flat_sizes: vec![16, 12, 10, 8, 8, 6],
            growing_sizes: vec![6, 6],
            decaying_sizes: vec![8],
            neologisms_per_growing: 5,
            flat_neologisms: 4,
            flat_weight: 0.45,
            growing_weight: (0.05, 0.3),
            proper_noun_topic: 5,
            verb_topic: 5,
            flat_regions: vec![0, 0, 1, 1, 2, 2],
            growing_regions: vec![3, 3],
            decaying_regions: vec![1],
            region_mixing: 0.3,
            background_mixing: 0.5,
            sampling: Sampling::Quota,
            quota_unit: 1000,
        }
    }
}

/// A config with small growing topics that host most planted neologisms
/// (first seen in the MODERN block) and FLAT topics of varied sizes that
/// supply controls. Slopes of growing and decaying topics cancel, so FLAT
/// weights stay constant. One always-capitalized topic and one verb topic
/// exercise the noun filters.
///
/// Without background sentences SGNS puts every pair of unrelated words at
/// a cosine of about 0.4, so thresholds in the 0.35 to 0.55 range would not
/// separate topics; a background share of a half brings unrelated pairs
/// down to about 0.25.
pub fn planted_study(seed: u64, shape: &StudyShape) -> SynthConfig {
    let mut names = WordFactory::new(seed ^ 0x5eed_0f70_b1c5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let t = shape.historical_slices;
    let (h0, h1) = shape.historical_tokens;
    let mut slice_tokens: Vec<u64> = (0..t)
        .map(|i| {
            let x = if t > 1 { i as f64 / (t - 1) as f64 } else { 0.0 };
            let unit = shape.quota_unit as f64;
            ((h0 as f64 + (h1 as f64 - h0 as f64) * x) / unit).round() as u64 * shape.quota_unit
        })
        .collect();
    slice_tokens.push(shape.modern_tokens);

    let aux = 0.07;
    let (g0, g1) = shape.growing_weight;
    let moving = 1.0 - shape.flat_weight - aux;
    let (d0, d1) = (moving - g0, moving - g1);
    let flat_total: usize = shape.flat_sizes.iter().sum();

    let mut topics = Vec::new();
    for (i, &size) in shape.flat_sizes.iter().enumerate() {
        topics.push(TopicSpec {
            name: format!("flat{i:02}"),
            words: names.words(size),
            curve: Curve::flat(shape.flat_weight * size as f64 / flat_total as f64),
            tag: "NN".into(),
            capitalized: false,
            neologisms: Vec::new(),
            zipf: 1.0,
            region: shape.flat_regions.get(i).map(|r| format!("r{r}")),
        });
    }
    // Smallest flat topics first.
    let mut by_size: Vec<usize> = (0..shape.flat_sizes.len()).collect();
    by_size.sort_by_key(|&i| (shape.flat_sizes[i], i));
    for j in 0..shape.flat_neologisms {
        let k = by_size[j % by_size.len().min(4)];
        let share = rng.random_range(0.15..0.6);
        topics[k].neologisms.push(PlantedNeologism { word: names.word(), first_slice: t, share });
    }
    let ng = shape.growing_sizes.len() as f64;
    for (i, &size) in shape.growing_sizes.iter().enumerate() {
        let neologisms = (0..shape.neologisms_per_growing)
            .map(|_| PlantedNeologism { word: names.word(), first_slice: t, share: rng.random_range(0.15..0.6) })
            .collect();
        topics.push(TopicSpec {
            name: format!("growing{i:02}"),
            words: names.words(size),
            curve: Curve::linear(g0 / ng, g1 / ng),
            tag: "NN".into(),
            capitalized: false,
            neologisms,
            zipf: 1.0,
            region: shape.growing_regions.get(i).map(|r| format!("r{r}")),
        });
    }
    let nd = shape.decaying_sizes.len() as f64;
    for (i, &size) in shape.decaying_sizes.iter().enumerate() {
        topics.push(TopicSpec {
            name: format!("decaying{i:02}"),
            words: names.words(size),
            curve: Curve::linear(d0 / nd, d1 / nd),
            tag: "NN".into(),
            capitalized: false,
            neologisms: Vec::new(),
            zipf: 1.0,
            region: shape.decaying_regions.get(i).map(|r| format!("r{r}")),
        });
    }
    topics.push(TopicSpec {
        name: "proper".into(),
        words: names.words(shape.proper_noun_topic),
        curve: Curve::flat(0.03),
        tag: "NN".into(),
        capitalized: true,
        neologisms: Vec::new(),
        zipf: 1.0,
        region: None,
    });
    topics.push(TopicSpec {
        name: "verbs".into(),
        words: names.words(shape.verb_topic),
        curve: Curve::flat(aux - 0.03),
        tag: "VB".into(),
        capitalized: false,
        neologisms: Vec::new(),
        zipf: 1.0,
        region: None,
    });
    SynthConfig {
        seed,
        historical_slices: t,
        slice_tokens,
        sentence_length: 10,
        doc_tokens: 50_000,
        sampling: shape.sampling,
        quota_unit: shape.quota_unit,
        region_mixing: shape.region_mixing,
        background_mixing: shape.background_mixing,
        topics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FrequencyTable;
    use crate::select::growth_rate;

    fn topic(name: &str, words: &[&str], curve: Curve) -> TopicSpec {
        TopicSpec {
            name: name.into(),
            words: words.iter().map(|w| w.to_string()).collect(),
            curve,
            tag: "NN".into(),
            capitalized: false,
            neologisms: Vec::new(),
            zipf: 1.0,
            region: None,
        }
    }

    fn small(sampling: Sampling, seed: u64, slice: u64) -> SynthConfig {
        let mut grow = topic("g", &["rise", "climb"], Curve::linear(0.1, 0.5));
        grow.neologisms.push(PlantedNeologism { word: "novum".into(), first_slice: 8, share: 0.5 });
        SynthConfig {
            seed,
            historical_slices: 8,
            slice_tokens: vec![slice; 9],
            sentence_length: 10,
            doc_tokens: 20_000,
            sampling,
            quota_unit: 1000,
            region_mixing: 0.0,
            background_mixing: 0.0,
            topics: vec![
                topic("f", &["flat", "even", "level"], Curve::flat(0.3)),
                grow,
                topic("d", &["fall", "sink"], Curve::linear(0.6, 0.2)),
            ],
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&small(Sampling::Multinomial, 3, 5000)).unwrap();
        let b = generate(&small(Sampling::Multinomial, 3, 5000)).unwrap();
        let texts = |c: &SynthCorpus| c.corpus.slices().iter().flat_map(|s| s.documents.iter().map(|d| d.text.clone())).collect::<Vec<_>>();
        assert_eq!(texts(&a), texts(&b));
        let c = generate(&small(Sampling::Multinomial, 4, 5000)).unwrap();
        assert_ne!(texts(&a), texts(&c));
    }

    #[test]
    fn slice_sizes_and_first_appearance() {
        for sampling in [Sampling::Multinomial, Sampling::Quota] {
            let s = generate(&small(sampling, 1, 7000)).unwrap();
            assert_eq!(s.corpus.token_counts(), &[7000; 9]);
            let table = FrequencyTable::build(&s.corpus);
            for t in 0..8 {
                assert_eq!(table.count("novum", t), 0);
            }
            assert!(table.count("novum", 8) > 0);
        }
    }

    #[test]
    fn growth_signs_recovered() {
        let s = generate(&small(Sampling::Multinomial, 2, 20_000)).unwrap();
        let table = FrequencyTable::build(&s.corpus);
        assert!(growth_rate(&table.historical_series("rise")).unwrap() > 0.5);
        assert!(growth_rate(&table.historical_series("sink")).unwrap() < -0.5);
    }

    #[test]
    fn flat_words_stay_flat() {
        // Quota sampling fixes every FLAT word's relative frequency, so the
        // bound holds for every seed; 40 seeds stand in for the probability.
        let mut within = 0;
        for seed in 0..40 {
            let s = generate(&small(Sampling::Quota, seed, 100_000)).unwrap();
            let table = FrequencyTable::build(&s.corpus);
            within += ["flat", "even", "level"]
                .iter()
                .filter(|w| growth_rate(&table.historical_series(w)).unwrap().abs() <= 0.1)
                .count();
        }
        assert!(within as f64 / 120.0 >= 0.95);
    }

    #[test]
    fn mixing_moves_sentences_not_counts() {
        let pure = small(Sampling::Quota, 2, 10_000);
        let mut mixed = pure.clone();
        mixed.region_mixing = 0.4;
        mixed.background_mixing = 0.2;
        mixed.topics[0].region = Some("a".into());
        mixed.topics[1].region = Some("a".into());
        let (p, m) = (generate(&pure).unwrap(), generate(&mixed).unwrap());
        let (tp, tm) = (FrequencyTable::build(&p.corpus), FrequencyTable::build(&m.corpus));
        for (w, _) in tp.words() {
            for t in 0..9 {
                assert_eq!(tp.count(w, t), tm.count(w, t), "{w} at {t}");
            }
        }
        let topic_of = &m.truth.topic;
        let topics_per_sentence = |c: &SynthCorpus| -> Vec<usize> {
            c.corpus
                .sentences(Partition::Historical)
                .iter()
                .map(|s| s.iter().map(|w| topic_of[w.as_str()].as_str()).collect::<HashSet<_>>().len())
                .collect()
        };
        assert!(topics_per_sentence(&p).iter().all(|&k| k == 1));
        let multi = topics_per_sentence(&m).iter().filter(|&&k| k > 1).count() as f64;
        let n = topics_per_sentence(&m).len() as f64;
        assert!(multi / n > 0.2 && multi / n < 0.6, "{multi} of {n}");
    }

    #[test]
    fn ground_truth_hand_enumeration() {
        // Five words: up (growing), down (decaying), same (flat), and two
        // neologisms, one MODERN-only and one first seen mid-history.
        let mut g = topic("g", &["up"], Curve::linear(0.2, 0.6));
        g.neologisms = vec![
            PlantedNeologism { word: "newone".into(), first_slice: 3, share: 1.0 },
            PlantedNeologism { word: "midway".into(), first_slice: 1, share: 1.0 },
        ];
        let cfg = SynthConfig {
            seed: 0,
            historical_slices: 3,
            slice_tokens: vec![100; 4],
            sentence_length: 10,
            doc_tokens: 100,
            sampling: Sampling::Multinomial,
            quota_unit: 100,
            region_mixing: 0.0,
            background_mixing: 0.0,
            topics: vec![g, topic("d", &["down"], Curve::linear(0.5, 0.1)), topic("f", &["same"], Curve::flat(0.3))],
        };
        let truth = ground_truth(&cfg);
        assert_eq!(truth.neologisms, vec!["midway", "newone"]);
        let signs: Vec<(&str, i8)> = truth.growth_sign.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        assert_eq!(signs, vec![("down", -1), ("midway", 1), ("newone", 0), ("same", 0), ("up", 1)]);
        let flat_only = SynthConfig { topics: vec![topic("f", &["a", "b"], Curve::flat(1.0))], ..cfg };
        assert!(ground_truth(&flat_only).growth_sign.values().all(|&s| s == 0));
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = small(Sampling::Multinomial, 0, 1000);
        let mut c = base.clone();
        c.topics[0].curve = Curve::flat(0.4);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.topics[1].words.push("flat".into());
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.topics[1].neologisms[0].first_slice = 9;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.sampling = Sampling::Quota;
        c.slice_tokens[0] = 1500;
        assert!(c.validate().is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn planted_study_is_valid() {
        for shape in [StudyShape::full(), StudyShape::toy()] {
            let cfg = planted_study(7, &shape);
            cfg.validate().unwrap();
            assert_eq!(cfg.slice_tokens.len(), shape.historical_slices + 1);
        }
        let full = planted_study(7, &StudyShape::full());
        assert!((1.9e6..2.1e6).contains(&(full.total_tokens() as f64)));
        assert_eq!(ground_truth(&full).neologisms.len(), 8 * 10 + 16);
    }

    #[test]
    fn largest_remainder_is_exact() {
        assert_eq!(largest_remainder(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(largest_remainder(7, &[0.5, 0.25, 0.25]).iter().sum::<u64>(), 7);
        assert_eq!(largest_remainder(5, &[0.0, 2.0]), vec![0, 5]);
    }

    #[test]
    fn written_corpus_reingests_identically() {
        let s = generate(&small(Sampling::Multinomial, 5, 3000)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = s.write_to_dir(dir.path()).unwrap();
        let back = crate::corpus::ingest_corpus(&manifest, &TokenizerConfig::default()).unwrap();
        assert_eq!(back.token_counts(), s.corpus.token_counts());
        assert_eq!(FrequencyTable::build(&back), FrequencyTable::build(&s.corpus));
    }
}
