//! Corpus ingestion: slice-tagged documents, deterministic tokenization,
//! per-slice frequency tables and a part-of-speech lexicon.

mod freq;
mod ingest;
mod pos;
mod tokenize;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use freq::{FrequencyTable, SliceInfo, WordCounts, FREQ_FILE, SLICES_FILE, SUMMARY_FILE};
pub use ingest::{ingest_corpus, read_manifest, ManifestEntry};
pub use pos::{build_pos_lexicon, LexiconBuild, PosLexicon};
pub use tokenize::{for_each_token, tokenize, tokenize_lower, Token, TokenizerConfig};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("unknown slice label `{0}`")]
    UnknownSlice(String),
    #[error("document {0} is not assigned to any slice")]
    UnassignedDocument(String),
    #[error("slice `{slice}` is declared as both {first} and {second}")]
    ConflictingPartition { slice: String, first: Partition, second: Partition },
    #[error("duplicate slice id `{0}`")]
    DuplicateSlice(String),
    #[error("HISTORICAL slice `{0}` follows a MODERN slice")]
    PartitionOrder(String),
    #[error("expected {expected} HISTORICAL slices, found {found}")]
    SliceCount { expected: usize, found: usize },
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CorpusError {
    let path = path.into();
    move |source| CorpusError::Io { path, source }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Partition {
    Historical,
    Modern,
}

impl Partition {
    pub const ALL: [Partition; 2] = [Partition::Historical, Partition::Modern];

    pub fn index(self) -> usize {
        match self {
            Partition::Historical => 0,
            Partition::Modern => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Historical => "HISTORICAL",
            Partition::Modern => "MODERN",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Partition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HISTORICAL" => Ok(Partition::Historical),
            "MODERN" => Ok(Partition::Modern),
            other => Err(format!("unknown partition `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    /// Display name, usually the manifest path.
    pub name: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub id: String,
    pub partition: Partition,
    pub documents: Vec<Document>,
}

/// Token streams grouped into chronologically ordered slices.
#[derive(Clone, Debug)]
pub struct SlicedCorpus {
    slices: Vec<Slice>,
    token_counts: Vec<u64>,
    rules: TokenizerConfig,
}

impl SlicedCorpus {
    /// Builds a corpus from slices already in chronological order.
    pub fn from_slices(slices: Vec<Slice>, rules: TokenizerConfig) -> Result<Self, CorpusError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut modern_seen = false;
        for s in &slices {
            if !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateSlice(s.id.clone()));
            }
            match s.partition {
                Partition::Modern => modern_seen = true,
                Partition::Historical if modern_seen => {
                    return Err(CorpusError::PartitionOrder(s.id.clone()))
                }
                Partition::Historical => {}
            }
        }
        let token_counts = slices
            .iter()
            .map(|s| {
                s.documents
                    .iter()
                    .map(|d| {
                        let mut n = 0u64;
                        for_each_token(&d.text, &rules, |_| n += 1);
                        n
                    })
                    .sum()
            })
            .collect();
        Ok(Self { slices, token_counts, rules })
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn token_counts(&self) -> &[u64] {
        &self.token_counts
    }

    pub fn rules(&self) -> &TokenizerConfig {
        &self.rules
    }

    pub fn historical_slice_count(&self) -> usize {
        self.slices.iter().filter(|s| s.partition == Partition::Historical).count()
    }

    pub fn partition_tokens(&self, partition: Partition) -> u64 {
        self.slices
            .iter()
            .zip(&self.token_counts)
            .filter(|(s, _)| s.partition == partition)
            .map(|(_, n)| n)
            .sum()
    }

    /// Training sequences for one partition: every non-empty line of every
    /// document, lowercased and tokenized, in slice then document order.
    pub fn sentences(&self, partition: Partition) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for s in self.slices.iter().filter(|s| s.partition == partition) {
            for d in &s.documents {
                for line in d.text.lines() {
                    let toks = tokenize_lower(line, &self.rules);
                    if !toks.is_empty() {
                        out.push(toks);
                    }
                }
            }
        }
        out
    }

    pub fn check_historical_slices(&self, expected: usize) -> Result<(), CorpusError> {
        let found = self.historical_slice_count();
        if found == expected {
            Ok(())
        } else {
            Err(CorpusError::SliceCount { expected, found })
        }
    }
}

/// True iff the word's dominant tag is the noun tag and it is not seen
/// capitalized more often than lowercased in `partition`.
pub fn is_analysis_noun(
    word: &str,
    lexicon: &PosLexicon,
    table: &FrequencyTable,
    partition: Partition,
    noun_tag: &str,
) -> bool {
    if lexicon.dominant_tag(word) != Some(noun_tag) {
        return false;
    }
    table.capitalized_count(word, partition) <= table.lowercase_count(word, partition)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Document {
        Document { name: "d".into(), text: text.into() }
    }

    fn table_with_caps(caps: usize, lower: usize) -> FrequencyTable {
        let mut text = String::new();
        for _ in 0..caps {
            text.push_str("Word ");
        }
        for _ in 0..lower {
            text.push_str("word ");
        }
        let corpus = SlicedCorpus::from_slices(
            vec![Slice { id: "h".into(), partition: Partition::Historical, documents: vec![doc(&text)] }],
            TokenizerConfig::default(),
        )
        .unwrap();
        FrequencyTable::build(&corpus)
    }

    fn lexicon(pairs: &[(&str, &str, u64)]) -> PosLexicon {
        let mut lex = PosLexicon::default();
        for (w, t, c) in pairs {
            lex.add(w, t, *c);
        }
        lex
    }

    #[test]
    fn analysis_noun_capitalization_filter() {
        let nn = lexicon(&[("word", "NN", 3)]);
        let t = table_with_caps(10, 5);
        assert!(!is_analysis_noun("word", &nn, &t, Partition::Historical, "NN"));
        let t = table_with_caps(5, 5);
        assert!(is_analysis_noun("word", &nn, &t, Partition::Historical, "NN"));
    }

    #[test]
    fn analysis_noun_requires_noun_tag() {
        let t = table_with_caps(0, 5);
        let vb = lexicon(&[("word", "VB", 3)]);
        assert!(!is_analysis_noun("word", &vb, &t, Partition::Historical, "NN"));
        let empty = PosLexicon::default();
        assert!(!is_analysis_noun("word", &empty, &t, Partition::Historical, "NN"));
    }

    #[test]
    fn slice_order_is_validated() {
        let slices = vec![
            Slice { id: "m".into(), partition: Partition::Modern, documents: vec![] },
            Slice { id: "h".into(), partition: Partition::Historical, documents: vec![] },
        ];
        assert!(matches!(
            SlicedCorpus::from_slices(slices, TokenizerConfig::default()),
            Err(CorpusError::PartitionOrder(_))
        ));
    }

    #[test]
    fn sentences_follow_lines() {
        let corpus = SlicedCorpus::from_slices(
            vec![Slice {
                id: "h".into(),
                partition: Partition::Historical,
                documents: vec![doc("A b.\n\nc d e\n")],
            }],
            TokenizerConfig::default(),
        )
        .unwrap();
        assert_eq!(corpus.sentences(Partition::Historical), vec![vec!["a", "b"], vec!["c", "d", "e"]]);
        assert!(corpus.sentences(Partition::Modern).is_empty());
        assert_eq!(corpus.token_counts(), &[5]);
    }
}
