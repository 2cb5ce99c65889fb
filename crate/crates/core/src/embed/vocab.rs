use std::collections::HashMap;

/// Training vocabulary, ordered by descending count with lexicographic ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Keeps exactly the words whose count reaches `min_count`. `min_count`
/// below 1 is treated as 1.
pub fn build_vocab<'a, I>(counts: I, min_count: u64) -> Vocabulary
where
    I: IntoIterator<Item = (&'a str, u64)>,
{
    let min_count = min_count.max(1);
    let mut merged: HashMap<&str, u64> = HashMap::new();
    for (w, c) in counts {
        *merged.entry(w).or_default() += c;
    }
    let mut kept: Vec<(&str, u64)> = merged.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
    let counts = kept.iter().map(|&(_, c)| c).collect();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Vocabulary { words, counts, index }
}

/// Counts tokens in a sentence stream.
pub fn count_tokens(sentences: &[Vec<String>]) -> HashMap<&str, u64> {
    let mut m: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for w in s {
            *m.entry(w.as_str()).or_default() += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_count_filter() {
        let v = build_vocab([("a", 10), ("b", 4)], 5);
        assert_eq!(v.words(), &["a"]);
        let v = build_vocab([("a", 10), ("b", 4)], 1);
        assert_eq!(v.words(), &["a", "b"]);
        assert!(build_vocab([("a", 1)], 5).is_empty());
    }

    #[test]
    fn order_is_count_then_lexicographic() {
        let v = build_vocab([("c", 3), ("b", 5), ("a", 3), ("d", 1)], 2);
        assert_eq!(v.words(), &["b", "a", "c"]);
        assert_eq!(v.index_of("c"), Some(2));
        assert_eq!(v.index_of("d"), None);
    }

    #[test]
    fn toy_corpus_hand_counts() {
        let sents: Vec<Vec<String>> = ["the cat sat", "the dog sat", "a cat"]
            .iter()
            .map(|s| s.split(' ').map(String::from).collect())
            .collect();
        let counts = count_tokens(&sents);
        let v = build_vocab(counts.iter().map(|(w, c)| (*w, *c)), 2);
        assert_eq!(v.words(), &["cat", "sat", "the"]);
        assert_eq!(v.counts(), &[2, 2, 2]);
    }
}
