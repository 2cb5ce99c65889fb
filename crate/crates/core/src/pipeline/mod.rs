//! Staged study runner. Each stage reads the persisted artifacts of earlier
//! stages from a work directory and writes its own, recording content
//! hashes in `artifacts.json`.

mod config;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::align::{fit_procrustes, AlignError, RotationMap};
use crate::corpus::{
    build_pos_lexicon, ingest_corpus, CorpusError, FrequencyTable, Partition, PosLexicon, SlicedCorpus,
};
use crate::embed::{train_sgns, EmbedError, EmbeddingSpace};
use crate::infer::InferError;
use crate::select::{
    match_stable_controls, sample_relaxed_controls, select_neologisms, ControlMode, PairedWordSet, SelectError,
};
use crate::stats::{stats_table, NeighborhoodIndex, StatsError, StatsTable};
use crate::synth::{generate, SynthError};

pub use config::{PipelineConfig, StudyPreset, SynthSpec, WORKDIR_ENV};
pub use report::{GlmOutcome, GlmSummary, Report, SetSummary, WilcoxonOutcome};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("missing {}; run the `{stage}` stage first", .path.display())]
    MissingArtifact { path: PathBuf, stage: Stage },
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Synth,
    Ingest,
    Lexicon,
    Train,
    Align,
    Select,
    Stats,
    Glm,
    Report,
    All,
}

impl Stage {
    pub const SEQUENCE: [Stage; 9] = [
        Stage::Synth,
        Stage::Ingest,
        Stage::Lexicon,
        Stage::Train,
        Stage::Align,
        Stage::Select,
        Stage::Stats,
        Stage::Glm,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Lexicon => "lexicon",
            Stage::Train => "train",
            Stage::Align => "align",
            Stage::Select => "select",
            Stage::Stats => "stats",
            Stage::Glm => "glm",
            Stage::Report => "report",
            Stage::All => "all",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::SEQUENCE
            .into_iter()
            .chain([Stage::All])
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// Paths of every artifact, relative to the work directory.
pub mod paths {
    pub const SYNTH_DIR: &str = "synth";
    pub const CORPUS_DIR: &str = "corpus";
    pub const SENTENCES_HISTORICAL: &str = "corpus/sentences_historical.txt";
    pub const SENTENCES_MODERN: &str = "corpus/sentences_modern.txt";
    pub const LEXICON: &str = "lexicon/lexicon.tsv";
    pub const EMBED_HISTORICAL: &str = "embeddings/historical.vec";
    pub const EMBED_MODERN: &str = "embeddings/modern.vec";
    pub const ROTATION: &str = "alignment/rotation.txt";
    pub const NEOLOGISMS: &str = "select/neologisms.tsv";
    pub const STATS_NEIGHBORS: &str = "stats/neighbors.json";
    pub const GLM: &str = "glm/glm.json";
    pub const REPORT_DIR: &str = "report";
    pub const ARTIFACTS: &str = "artifacts.json";
}

/// Stage seed: the top-level seed hashed together with a stage label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Name of a control set as used in file names and reports.
pub fn set_name(mode: ControlMode, sample: usize) -> String {
    match mode {
        ControlMode::Stable => "stable".into(),
        ControlMode::Relaxed => format!("relaxed_{sample:02}"),
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    workdir: PathBuf,
    /// Messages for the user, one per notable event.
    log: Vec<String>,
}

impl Pipeline {
    /// Validates the config before anything touches the work directory.
    pub fn new(config: PipelineConfig, workdir: PathBuf) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self { config, workdir, log: Vec::new() })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn workdir(&self) -> &Path {
        &self.workdir
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.workdir.join(rel)
    }

    fn require(&self, rel: &str, stage: Stage) -> Result<PathBuf, PipelineError> {
        let p = self.path(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(PipelineError::MissingArtifact { path: p, stage })
        }
    }

    fn manifest_path(&self) -> Result<PathBuf, PipelineError> {
        match &self.config.manifest {
            Some(m) => Ok(m.clone()),
            None if self.config.synth.is_some() => {
                self.require(&format!("{}/{}", paths::SYNTH_DIR, crate::synth::MANIFEST_FILE), Stage::Synth)
            }
            None => Err(PipelineError::Config("no `manifest` and no `synth` corpus configured".into())),
        }
    }

    fn pos_path(&self) -> Result<PathBuf, PipelineError> {
        match &self.config.pos_source {
            Some(m) => Ok(m.clone()),
            None if self.config.synth.is_some() => {
                self.require(&format!("{}/{}", paths::SYNTH_DIR, crate::synth::TAGGED_FILE), Stage::Synth)
            }
            None => Err(PipelineError::Config("no `pos_source` and no `synth` corpus configured".into())),
        }
    }

    /// Runs one stage, or every stage in order for [`Stage::All`].
    pub fn run(&mut self, stage: Stage) -> Result<(), PipelineError> {
        if stage == Stage::All {
            for s in Stage::SEQUENCE {
                if s == Stage::Synth && self.config.synth.is_none() {
                    continue;
                }
                self.run(s)?;
            }
            return Ok(());
        }
        fs::create_dir_all(&self.workdir).map_err(|source| PipelineError::Io { path: self.workdir.clone(), source })?;
        let written = match stage {
            Stage::Synth => self.synth()?,
            Stage::Ingest => self.ingest()?,
            Stage::Lexicon => self.lexicon()?,
            Stage::Train => self.train()?,
            Stage::Align => self.align()?,
            Stage::Select => self.select()?,
            Stage::Stats => self.stats()?,
            Stage::Glm => self.glm()?,
            Stage::Report => self.report()?,
            Stage::All => unreachable!(),
        };
        self.record_artifacts(&written)
    }

    fn record_artifacts(&self, written: &[PathBuf]) -> Result<(), PipelineError> {
        let path = self.path(paths::ARTIFACTS);
        let mut map: BTreeMap<String, String> = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| PipelineError::Artifact { path: path.clone(), message: e.to_string() })?,
            Err(_) => BTreeMap::new(),
        };
        for p in written {
            let bytes = fs::read(p).map_err(|source| PipelineError::Io { path: p.clone(), source })?;
            let rel = p.strip_prefix(&self.workdir).unwrap_or(p).to_string_lossy().replace('\\', "/");
            map.insert(rel, hex::encode(Sha256::digest(&bytes)));
        }
        write_file(&path, (serde_json::to_string_pretty(&map).expect("map serializes") + "\n").as_bytes())
    }

    fn synth(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let spec = self
            .config
            .synth
            .as_ref()
            .ok_or_else(|| PipelineError::Config("the `synth` stage needs a `synth` section".into()))?;
        let cfg = spec.resolve(derive_seed(self.config.seed, "synth"))?;
        let corpus = generate(&cfg)?;
        let dir = self.path(paths::SYNTH_DIR);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|source| PipelineError::Io { path: dir.clone(), source })?;
        }
        corpus.write_to_dir(&dir)?;
        self.log.push(format!(
            "synth: {} tokens in {} slices, {} planted neologisms",
            cfg.total_tokens(),
            cfg.slice_tokens.len(),
            corpus.truth.neologisms.len()
        ));
        let files = [crate::synth::MANIFEST_FILE, crate::synth::TAGGED_FILE, crate::synth::TRUTH_FILE];
        Ok(files.iter().map(|f| dir.join(f)).collect())
    }

    fn ingest(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let corpus = ingest_corpus(&self.manifest_path()?, &self.config.tokenizer)?;
        if let Some(n) = self.config.expected_historical_slices {
            corpus.check_historical_slices(n)?;
        }
        let table = FrequencyTable::build(&corpus);
        let dir = self.path(paths::CORPUS_DIR);
        create_dir(&dir)?;
        table.write_to_dir(&dir)?;
        let empty = table.empty_slices();
        if !empty.is_empty() {
            self.log.push(format!("ingest: empty slices {}", empty.join(", ")));
        }
        let mut written: Vec<PathBuf> = [
            crate::corpus::FREQ_FILE,
            crate::corpus::SUMMARY_FILE,
            crate::corpus::SLICES_FILE,
        ]
        .iter()
        .map(|f| dir.join(f))
        .collect();
        for (partition, rel) in
            [(Partition::Historical, paths::SENTENCES_HISTORICAL), (Partition::Modern, paths::SENTENCES_MODERN)]
        {
            let p = self.path(rel);
            write_sentences(&p, &corpus, partition)?;
            written.push(p);
        }
        self.log.push(format!(
            "ingest: {} HISTORICAL and {} MODERN tokens, {} types",
            table.partition_tokens(Partition::Historical),
            table.partition_tokens(Partition::Modern),
            table.word_count()
        ));
        Ok(written)
    }

    fn lexicon(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let src = self.pos_path()?;
        let file = fs::File::open(&src).map_err(|source| PipelineError::Io { path: src.clone(), source })?;
        let built =
            build_pos_lexicon(BufReader::new(file)).map_err(|source| PipelineError::Io { path: src.clone(), source })?;
        if built.malformed > 0 {
            self.log.push(format!("lexicon: skipped {} malformed lines of {}", built.malformed, built.lines));
        }
        let out = self.path(paths::LEXICON);
        create_parent(&out)?;
        built.lexicon.write_tsv(&out)?;
        Ok(vec![out])
    }

    fn train(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let mut written = Vec::new();
        for (partition, src, dst, label) in [
            (Partition::Historical, paths::SENTENCES_HISTORICAL, paths::EMBED_HISTORICAL, "train.historical"),
            (Partition::Modern, paths::SENTENCES_MODERN, paths::EMBED_MODERN, "train.modern"),
        ] {
            let sentences = read_sentences(&self.require(src, Stage::Ingest)?)?;
            let cfg = self.config.training_config(derive_seed(self.config.seed, label));
            let space = train_sgns(&sentences, &cfg, Some(partition))?;
            let out = self.path(dst);
            create_parent(&out)?;
            space.write_text(&out)?;
            self.log.push(format!("train: {partition} space with {} words", space.len()));
            written.push(out);
        }
        Ok(written)
    }

    fn load_spaces(&self) -> Result<(EmbeddingSpace, EmbeddingSpace), PipelineError> {
        let h = EmbeddingSpace::read_text(&self.require(paths::EMBED_HISTORICAL, Stage::Train)?)?;
        let m = EmbeddingSpace::read_text(&self.require(paths::EMBED_MODERN, Stage::Train)?)?;
        Ok((h.with_partition(Partition::Historical), m.with_partition(Partition::Modern)))
    }

    fn align(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let (h, m) = self.load_spaces()?;
        let map = fit_procrustes(&h, &m, self.config.alignment)?;
        let out = self.path(paths::ROTATION);
        create_parent(&out)?;
        map.write_text(&out)?;
        self.log.push(format!("align: {} anchors, residual {:.4}", map.anchor_count, map.residual));
        Ok(vec![out])
    }

    fn load_table(&self) -> Result<FrequencyTable, PipelineError> {
        let dir = self.path(paths::CORPUS_DIR);
        self.require(&format!("{}/{}", paths::CORPUS_DIR, crate::corpus::FREQ_FILE), Stage::Ingest)?;
        Ok(FrequencyTable::read_from_dir(&dir)?)
    }

    fn load_lexicon(&self) -> Result<PosLexicon, PipelineError> {
        Ok(PosLexicon::read_tsv(&self.require(paths::LEXICON, Stage::Lexicon)?)?)
    }

    /// `(name, tsv, params json)` for every configured control set.
    fn control_sets(&self) -> Vec<(String, ControlMode, usize)> {
        let mut sets = Vec::new();
        for &mode in &self.config.control_modes {
            match mode {
                ControlMode::Stable => sets.push((set_name(mode, 0), mode, 0)),
                ControlMode::Relaxed => {
                    sets.extend((0..self.config.relaxed_samples).map(|i| (set_name(mode, i), mode, i)));
                }
            }
        }
        sets
    }

    fn pair_paths(&self, name: &str) -> (String, String) {
        (format!("select/pairs_{name}.tsv"), format!("select/pairs_{name}.json"))
    }

    fn select(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let table = self.load_table()?;
        let lexicon = self.load_lexicon()?;
        let neologisms = select_neologisms(&table, &lexicon, &self.config.effective_selection());
        let out = self.path(paths::NEOLOGISMS);
        create_parent(&out)?;
        write_file(&out, report::neologism_tsv(&neologisms, &table).as_bytes())?;
        let mut written = vec![out];
        let matching = self.config.effective_matching();
        for (name, mode, sample) in self.control_sets() {
            let set = match mode {
                ControlMode::Stable => match_stable_controls(&neologisms, &table, &lexicon, &matching),
                ControlMode::Relaxed => {
                    let seed = derive_seed(self.config.seed, &format!("select.relaxed.{sample}"));
                    sample_relaxed_controls(&neologisms, &table, &lexicon, &matching, seed)
                }
            };
            let (tsv, json) = self.pair_paths(&name);
            let (tsv, json) = (self.path(&tsv), self.path(&json));
            set.write_tsv(&tsv)?;
            set.write_params(&json)?;
            self.log.push(format!("select: {name}: {} pairs, {} unmatched", set.matched_count(), set.unmatched_count()));
            written.extend([tsv, json]);
        }
        self.log.push(format!("select: {} neologisms", neologisms.len()));
        Ok(written)
    }

    fn load_pairs(&self, name: &str) -> Result<PairedWordSet, PipelineError> {
        let (tsv, json) = self.pair_paths(name);
        Ok(PairedWordSet::read(&self.require(&tsv, Stage::Select)?, &self.require(&json, Stage::Select)?)?)
    }

    fn stats_path(&self, name: &str) -> String {
        format!("stats/{name}.tsv")
    }

    fn stats(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let (h, m) = self.load_spaces()?;
        let map = RotationMap::read_text(&self.require(paths::ROTATION, Stage::Align)?)?;
        let table = self.load_table()?;
        let lexicon = self.load_lexicon()?;
        let base = self.config.effective_stats();
        let taus = self.config.all_taus();
        let mut written = Vec::new();
        for (name, mode, _) in self.control_sets() {
            let set = self.load_pairs(&name)?;
            let mut params = base.clone();
            if mode == ControlMode::Stable {
                params.export_neighbors = self.config.neighbors_export;
            }
            let index = NeighborhoodIndex::new(&h, &m, &map, &table, &lexicon, params);
            let result = stats_table(&set, &taus, &index)?;
            let out = self.path(&self.stats_path(&name));
            create_parent(&out)?;
            result.write_tsv(&out)?;
            written.push(out);
            if mode == ControlMode::Stable {
                let mut shown = result.clone();
                shown.records.retain(|r| self.config.taus.contains(&r.tau));
                let out = self.path(paths::STATS_NEIGHBORS);
                let json = serde_json::to_string_pretty(&shown.neighbors_json()).expect("json") + "\n";
                write_file(&out, json.as_bytes())?;
                written.push(out);
            }
        }
        Ok(written)
    }

    fn load_stats(&self, name: &str) -> Result<StatsTable, PipelineError> {
        Ok(StatsTable::read_tsv(&self.require(&self.stats_path(name), Stage::Stats)?)?)
    }

    fn glm(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let mut glm = Vec::new();
        let mut wilcoxon = Vec::new();
        for (name, _, _) in self.control_sets() {
            let stats = self.load_stats(&name)?;
            let set = self.load_pairs(&name)?;
            for &tau in &self.config.taus {
                glm.push(report::fit_glm(&name, &set, &stats, tau, self.config.irls));
                wilcoxon.extend(report::wilcoxon_tests(&name, &set, &stats, tau));
            }
        }
        for g in &glm {
            if let Some(e) = &g.error {
                self.log.push(format!("glm: {} at tau {}: {e}", g.set, g.tau));
            }
        }
        let out = self.path(paths::GLM);
        create_parent(&out)?;
        let json = serde_json::json!({ "glm": glm, "wilcoxon": wilcoxon });
        write_file(&out, (serde_json::to_string_pretty(&json).expect("json") + "\n").as_bytes())?;
        Ok(vec![out])
    }

    fn report(&mut self) -> Result<Vec<PathBuf>, PipelineError> {
        let glm_path = self.require(paths::GLM, Stage::Glm)?;
        let text = fs::read_to_string(&glm_path).map_err(|source| PipelineError::Io { path: glm_path.clone(), source })?;
        #[derive(serde::Deserialize)]
        struct GlmFile {
            glm: Vec<GlmOutcome>,
            wilcoxon: Vec<WilcoxonOutcome>,
        }
        let parsed: GlmFile = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Artifact { path: glm_path.clone(), message: e.to_string() })?;
        let table = self.load_table()?;
        let map = RotationMap::read_text(&self.require(paths::ROTATION, Stage::Align)?)?;
        let neologism_count = report::count_neologisms(&self.require(paths::NEOLOGISMS, Stage::Select)?)?;

        let mut sets = Vec::new();
        let mut stable_stats = None;
        for (name, mode, _) in self.control_sets() {
            let stats = self.load_stats(&name)?;
            let pairs = self.load_pairs(&name)?;
            sets.push(report::summarize_set(&name, mode, &pairs, &stats, &self.config.taus));
            if mode == ControlMode::Stable {
                stable_stats = Some(stats);
            }
        }
        let curves_source = match stable_stats {
            Some(s) => s,
            None => self.load_stats(&self.control_sets()[0].0)?,
        };
        let report = Report::new(
            &self.config,
            &table,
            &map,
            neologism_count,
            sets,
            parsed.glm.iter().map(GlmSummary::from).collect(),
            parsed.wilcoxon,
        );
        let dir = self.path(paths::REPORT_DIR);
        create_dir(&dir)?;
        let mut written = Vec::new();
        let mut emit = |name: &str, contents: String| -> Result<(), PipelineError> {
            let p = dir.join(name);
            write_file(&p, contents.as_bytes())?;
            written.push(p);
            Ok(())
        };
        emit("report.json", report.to_json())?;
        emit("table1.tsv", report.table1_tsv())?;
        let curves = report::Curves::new(&curves_source, &self.config.tau_sweep);
        emit("curves_density.csv", curves.density_csv())?;
        emit("curves_growth.csv", curves.growth_csv())?;
        let neighbors = self.path(paths::STATS_NEIGHBORS);
        if neighbors.exists() {
            let text = fs::read_to_string(&neighbors).map_err(|source| PipelineError::Io { path: neighbors, source })?;
            emit("neighbors.json", text)?;
        }
        let first = &self.control_sets()[0].0;
        let (pairs_tsv, _) = self.pair_paths(first);
        let p = self.require(&pairs_tsv, Stage::Select)?;
        emit("pairs.tsv", fs::read_to_string(&p).map_err(|source| PipelineError::Io { path: p, source })?)?;
        Ok(written)
    }
}

fn create_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.to_path_buf(), source })
}

fn create_parent(path: &Path) -> Result<(), PipelineError> {
    match path.parent() {
        Some(p) => create_dir(p),
        None => Ok(()),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    create_parent(path)?;
    fs::write(path, contents).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

fn write_sentences(path: &Path, corpus: &SlicedCorpus, partition: Partition) -> Result<(), PipelineError> {
    let mut out = String::new();
    for s in corpus.sentences(partition) {
        out.push_str(&s.join(" "));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    Ok(text.lines().map(|l| l.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect()).collect())
}
