use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::Path;

use super::{io_err, CorpusError};

/// Word -> tag -> count, keyed by lowercased word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PosLexicon {
    tags: BTreeMap<String, BTreeMap<String, u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexiconBuild {
    pub lexicon: PosLexicon,
    pub lines: usize,
    pub malformed: usize,
}

impl PosLexicon {
    pub fn add(&mut self, word: &str, tag: &str, count: u64) {
        *self.tags.entry(word.to_lowercase()).or_default().entry(tag.to_string()).or_default() += count;
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tag_counts(&self, word: &str) -> Option<&BTreeMap<String, u64>> {
        self.tags.get(word)
    }

    /// The strict-plurality tag; `None` on ties or for unknown words.
    pub fn dominant_tag(&self, word: &str) -> Option<&str> {
        let counts = self.tags.get(word)?;
        let mut best: Option<(&str, u64)> = None;
        let mut tied = false;
        for (tag, &c) in counts {
            match best {
                Some((_, b)) if c == b => tied = true,
                Some((_, b)) if c < b => {}
                _ => {
                    best = Some((tag, c));
                    tied = false;
                }
            }
        }
        match best {
            Some((tag, c)) if !tied && c > 0 => Some(tag),
            _ => None,
        }
    }

    pub fn write_tsv(&self, path: &Path) -> Result<(), CorpusError> {
        let mut out = String::from("word\ttag\tcount\n");
        for (w, tags) in &self.tags {
            for (t, c) in tags {
                let _ = writeln!(out, "{w}\t{t}\t{c}");
            }
        }
        fs::write(path, out).map_err(io_err(path))
    }

    pub fn read_tsv(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut lex = Self::default();
        for (i, line) in text.lines().enumerate() {
            if (i == 0 && line.starts_with("word\t")) || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let count = (f.len() == 3).then(|| f[2].parse::<u64>().ok()).flatten();
            let Some(count) = count else {
                return Err(CorpusError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected word<TAB>tag<TAB>count".into(),
                });
            };
            lex.add(f[0], f[1], count);
        }
        Ok(lex)
    }
}

/// Builds a lexicon from a tagged stream with one `token<TAB>tag` pair per
/// line (a single run of spaces is also accepted as the separator).
/// Malformed lines are skipped and counted.
pub fn build_pos_lexicon(source: impl BufRead) -> Result<LexiconBuild, std::io::Error> {
    let mut lexicon = PosLexicon::default();
    let (mut lines, mut malformed) = (0, 0);
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        let fields: Vec<&str> =
            if line.contains('\t') { line.split('\t').collect() } else { line.split_whitespace().collect() };
        match fields.as_slice() {
            [tok, tag] if !tok.trim().is_empty() && !tag.trim().is_empty() => {
                lexicon.add(tok.trim(), tag.trim(), 1)
            }
            _ => malformed += 1,
        }
    }
    Ok(LexiconBuild { lexicon, lines, malformed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(pairs: &[(&str, &str, u64)]) -> PosLexicon {
        let mut l = PosLexicon::default();
        for (w, t, c) in pairs {
            l.add(w, t, *c);
        }
        l
    }

    #[test]
    fn plurality_and_ties() {
        assert_eq!(lex(&[("w", "NN", 5), ("w", "VB", 2)]).dominant_tag("w"), Some("NN"));
        assert_eq!(lex(&[("w", "NN", 2), ("w", "VB", 2)]).dominant_tag("w"), None);
        assert_eq!(lex(&[("w", "NN", 2), ("w", "VB", 2), ("w", "JJ", 3)]).dominant_tag("w"), Some("JJ"));
        assert_eq!(lex(&[]).dominant_tag("w"), None);
    }

    #[test]
    fn stream_with_malformed_lines() {
        let src = "Dog\tNN\ndog\tNN\nran\tVBD\nbroken\n\nx\ty\tz\n";
        let b = build_pos_lexicon(src.as_bytes()).unwrap();
        assert_eq!(b.lines, 5);
        assert_eq!(b.malformed, 2);
        assert_eq!(b.lexicon.tag_counts("dog").unwrap()["NN"], 2);
        assert_eq!(b.lexicon.dominant_tag("ran"), Some("VBD"));
    }

    #[test]
    fn empty_stream() {
        let b = build_pos_lexicon("".as_bytes()).unwrap();
        assert!(b.lexicon.is_empty());
        assert_eq!(b.malformed, 0);
    }

    #[test]
    fn tsv_roundtrip() {
        let l = lex(&[("a", "NN", 3), ("a", "VB", 1), ("b", "JJ", 2)]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lex.tsv");
        l.write_tsv(&p).unwrap();
        assert_eq!(PosLexicon::read_tsv(&p).unwrap(), l);
    }
}
