use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{io_err, CorpusError, Document, Partition, Slice, SlicedCorpus, TokenizerConfig};

/// One manifest line: `<slice_id>\t<partition>\t<path>` assigns a document,
/// `<slice_id>\t<partition>` declares a (possibly empty) slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub slice_id: String,
    pub partition: Partition,
    pub path: Option<PathBuf>,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let parse_err = |message: String| CorpusError::Parse { path: path.to_path_buf(), line: i + 1, message };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(format!("expected 2 or 3 tab-separated fields, got {}", fields.len())));
        }
        let slice_id = fields[0].trim().to_string();
        let doc_path = fields.get(2).map(|p| p.trim()).filter(|p| !p.is_empty()).map(PathBuf::from);
        if slice_id.is_empty() {
            let name = doc_path.map_or_else(|| format!("line {}", i + 1), |p| p.display().to_string());
            return Err(CorpusError::UnassignedDocument(name));
        }
        let partition = fields[1].parse::<Partition>().map_err(parse_err)?;
        entries.push(ManifestEntry { slice_id, partition, path: doc_path });
    }
    Ok(entries)
}

/// Numeric-aware ordering so that `t2` sorts before `t10` and `1810s`
/// before `1820s`.
pub(crate) fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.char_indices().peekable(), b.char_indices().peekable());
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((sa, ca)), Some((sb, cb))) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let ea = take_digits(&mut ai, a.len());
                    let eb = take_digits(&mut bi, b.len());
                    let (da, db) = (a[sa..ea].trim_start_matches('0'), b[sb..eb].trim_start_matches('0'));
                    let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                } else {
                    let ord = ca.cmp(&cb);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    ai.next();
                    bi.next();
                }
            }
        }
    }
}

fn take_digits(it: &mut std::iter::Peekable<std::str::CharIndices<'_>>, len: usize) -> usize {
    while let Some(&(_, c)) = it.peek() {
        if !c.is_ascii_digit() {
            break;
        }
        it.next();
    }
    it.peek().map_or(len, |&(i, _)| i)
}

/// Reads every document named by the manifest. Relative paths resolve
/// against the manifest's directory. Slice and document order do not
/// depend on line order: HISTORICAL before MODERN, slice ids in natural
/// order, documents by path.
pub fn ingest_corpus(manifest: &Path, rules: &TokenizerConfig) -> Result<SlicedCorpus, CorpusError> {
    let entries = read_manifest(manifest)?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));

    let declared: BTreeMap<&str, Partition> = entries
        .iter()
        .filter(|e| e.path.is_none())
        .map(|e| (e.slice_id.as_str(), e.partition))
        .collect();

    let mut partitions: BTreeMap<String, Partition> = BTreeMap::new();
    let mut docs: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for e in &entries {
        if e.path.is_some() && !declared.is_empty() && !declared.contains_key(e.slice_id.as_str()) {
            return Err(CorpusError::UnknownSlice(e.slice_id.clone()));
        }
        match partitions.get(&e.slice_id) {
            Some(&p) if p != e.partition => {
                return Err(CorpusError::ConflictingPartition {
                    slice: e.slice_id.clone(),
                    first: p,
                    second: e.partition,
                })
            }
            Some(_) => {}
            None => {
                partitions.insert(e.slice_id.clone(), e.partition);
            }
        }
        let list = docs.entry(e.slice_id.clone()).or_default();
        if let Some(p) = &e.path {
            list.push(p.clone());
        }
    }

    let mut ids: Vec<&String> = partitions.keys().collect();
    ids.sort_by(|a, b| partitions[*a].cmp(&partitions[*b]).then_with(|| natural_cmp(a, b)));

    let mut slices = Vec::with_capacity(ids.len());
    for id in ids {
        let mut paths = docs.remove(id).unwrap_or_default();
        paths.sort();
        paths.dedup();
        let mut documents = Vec::with_capacity(paths.len());
        for p in paths {
            let full = if p.is_absolute() { p.clone() } else { base.join(&p) };
            let text = fs::read_to_string(&full).map_err(io_err(&full))?;
            documents.push(Document { name: p.display().to_string(), text });
        }
        slices.push(Slice { id: id.clone(), partition: partitions[id], documents });
    }
    SlicedCorpus::from_slices(slices, rules.clone())
}
