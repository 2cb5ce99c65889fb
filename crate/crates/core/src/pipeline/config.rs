use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::align::AlignOptions;
use crate::corpus::TokenizerConfig;
use crate::embed::{Metric, SgnsConfig};
use crate::infer::IrlsOptions;
use crate::select::{ControlMode, MatchParams, SelectionParams};
use crate::stats::StatsParams;
use crate::synth::{planted_study, StudyShape, SynthConfig};

/// Environment variable consulted for the work directory when neither the
/// command line nor the config names one.
pub const WORKDIR_ENV: &str = "NEOSCOPE_WORKDIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyPreset {
    Full,
    Toy,
}

/// Where the `synth` stage gets its corpus config: an explicit
/// [`SynthConfig`], a [`StudyShape`], or a named preset shape.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub preset: Option<StudyPreset>,
    pub shape: Option<StudyShape>,
    pub config: Option<SynthConfig>,
    /// Generator seed; derived from the top-level seed when absent.
    pub seed: Option<u64>,
}

impl SynthSpec {
    pub fn resolve(&self, fallback_seed: u64) -> Result<SynthConfig, PipelineError> {
        let given = [self.preset.is_some(), self.shape.is_some(), self.config.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(PipelineError::Config("synth needs exactly one of `preset`, `shape` or `config`".into()));
        }
        if let Some(c) = &self.config {
            let mut c = c.clone();
            if let Some(seed) = self.seed {
                c.seed = seed;
            }
            return Ok(c);
        }
        let shape = match (self.preset, &self.shape) {
            (Some(StudyPreset::Full), _) => StudyShape::full(),
            (Some(StudyPreset::Toy), _) => StudyShape::toy(),
            (None, Some(s)) => s.clone(),
            (None, None) => unreachable!(),
        };
        Ok(planted_study(self.seed.unwrap_or(fallback_seed), &shape))
    }
}

/// Every study parameter. Defaults are the published settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Corpus manifest; defaults to the synthetic corpus in the work directory.
    pub manifest: Option<PathBuf>,
    /// Tagged `token<TAB>tag` stream for the part-of-speech lexicon.
    pub pos_source: Option<PathBuf>,
    pub workdir: Option<PathBuf>,
    /// Ingest fails unless the corpus has exactly this many HISTORICAL slices.
    pub expected_historical_slices: Option<usize>,
    pub tokenizer: TokenizerConfig,
    pub selection: SelectionParams,
    pub matching: MatchParams,
    pub embedding: SgnsConfig,
    pub alignment: AlignOptions,
    pub stats: StatsParams,
    /// Thresholds for the GLM fits.
    pub taus: Vec<f64>,
    /// Thresholds for the mean curves.
    pub tau_sweep: Vec<f64>,
    /// Similarity below which neighborhoods are expected to reach past a
    /// word's own cluster. Only recorded in the report.
    pub cluster_radius: Option<f64>,
    pub control_modes: Vec<ControlMode>,
    pub relaxed_samples: usize,
    /// Root of every stage seed.
    pub seed: u64,
    /// Single-threaded embedding training, so artifacts are reproducible.
    pub deterministic: bool,
    pub irls: IrlsOptions,
    /// Neighbors per word kept in `neighbors.json`.
    pub neighbors_export: usize,
    pub synth: Option<SynthSpec>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            pos_source: None,
            workdir: None,
            expected_historical_slices: Some(18),
            tokenizer: TokenizerConfig::default(),
            selection: SelectionParams::default(),
            matching: MatchParams::default(),
            embedding: SgnsConfig::default(),
            alignment: AlignOptions::default(),
            stats: StatsParams::default(),
            taus: vec![0.35, 0.45, 0.55],
            tau_sweep: (6..=14).map(|i| f64::from(i) * 5.0 / 100.0).collect(),
            cluster_radius: None,
            control_modes: vec![ControlMode::Stable, ControlMode::Relaxed],
            relaxed_samples: 5,
            seed: 1,
            deterministic: true,
            irls: IrlsOptions::default(),
            neighbors_export: 10,
            synth: None,
        }
    }
}

impl PipelineConfig {
    /// Reads a JSON config. Relative paths inside it are taken relative to
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in [&mut config.manifest, &mut config.pos_source, &mut config.workdir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Command-line value, then config value, then the environment.
    pub fn resolve_workdir(&self, flag: Option<&Path>) -> Result<PathBuf, PipelineError> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.workdir.clone())
            .or_else(|| std::env::var_os(WORKDIR_ENV).map(PathBuf::from))
            .ok_or_else(|| {
                PipelineError::Config(format!("no work directory: pass --workdir, set `workdir`, or set {WORKDIR_ENV}"))
            })
    }

    /// The SGNS settings actually used for training.
    pub fn training_config(&self, seed: u64) -> SgnsConfig {
        let mut c = self.embedding.clone();
        c.seed = seed;
        if self.deterministic {
            c.workers = 1;
        }
        c
    }

    /// Selection restricted to words that will have MODERN vectors.
    pub fn effective_selection(&self) -> SelectionParams {
        let mut s = self.selection.clone();
        s.min_modern_count = s.min_modern_count.max(self.embedding.min_count);
        s
    }

    /// Matching restricted to words that will have HISTORICAL vectors.
    pub fn effective_matching(&self) -> MatchParams {
        let mut m = self.matching.clone();
        m.min_historical_count = m.min_historical_count.max(self.embedding.min_count);
        m.ratio_threshold = self.selection.ratio_threshold;
        m.noun_tag.clone_from(&self.selection.noun_tag);
        m
    }

    pub fn effective_stats(&self) -> StatsParams {
        let mut s = self.stats.clone();
        s.noun_tag.clone_from(&self.selection.noun_tag);
        s
    }

    /// Union of the GLM thresholds and the sweep, ascending.
    pub fn all_taus(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.taus.iter().chain(&self.tau_sweep).copied().collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        self.embedding.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let s = &self.selection;
        if !(s.ratio_threshold > 0.0) {
            return bad(format!("selection.ratio_threshold must be positive, got {}", s.ratio_threshold));
        }
        if s.top_k == 0 {
            return bad("selection.top_k must be at least 1".into());
        }
        let m = &self.matching;
        if !(m.delta > 0.0 && m.delta < 1.0) {
            return bad(format!("matching.delta must lie in (0, 1), got {}", m.delta));
        }
        if !(m.stability_bound >= 0.0 && m.stability_bound <= 1.0) {
            return bad(format!("matching.stability_bound must lie in [0, 1], got {}", m.stability_bound));
        }
        if self.taus.is_empty() {
            return bad("taus must not be empty".into());
        }
        for &t in self.taus.iter().chain(&self.tau_sweep) {
            let ok = match self.stats.metric {
                Metric::Cosine => t > -1.0 && t <= 1.0,
                Metric::Euclidean => t <= 0.0,
            };
            if !ok || !t.is_finite() {
                return bad(format!("threshold {t} is out of range for {} similarity", self.stats.metric.as_str()));
            }
        }
        if self.stats.cap == Some(0) {
            return bad("stats.cap must be at least 1".into());
        }
        if self.control_modes.is_empty() {
            return bad("control_modes must not be empty".into());
        }
        if self.control_modes.contains(&ControlMode::Relaxed) && self.relaxed_samples == 0 {
            return bad("relaxed control mode needs relaxed_samples >= 1".into());
        }
        if self.irls.max_iter == 0 || !(self.irls.tol > 0.0) {
            return bad("irls needs max_iter >= 1 and a positive tol".into());
        }
        if let Some(spec) = &self.synth {
            spec.resolve(0)?.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
