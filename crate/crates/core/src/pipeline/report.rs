use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::align::RotationMap;
use crate::corpus::{FrequencyTable, Partition};
use crate::infer::{fit_logistic_irls, vif, wilcoxon_signed_rank, Design, GlmFit, IrlsOptions, WilcoxonResult};
use crate::select::{ControlMode, PairedWordSet};
use crate::stats::{NeighborhoodRecord, SetMeans, StatsTable};

pub const DENSITY: &str = "density";
pub const GROWTH: &str = "growth";

/// One GLM at one threshold for one control set. Fitting failures are
/// recorded rather than raised so that the remaining fits still report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlmOutcome {
    pub set: String,
    pub tau: f64,
    /// Design rows: two per complete pair.
    pub rows: usize,
    pub complete_pairs: usize,
    /// Pairs dropped because either word has no growth value at `tau`.
    pub dropped_pairs: usize,
    pub fit: Option<GlmFit>,
    pub vif: Option<Vec<f64>>,
    pub error: Option<String>,
}

fn complete_pairs<'a>(
    set: &'a PairedWordSet,
    stats: &'a StatsTable,
    tau: f64,
) -> (Vec<(&'a NeighborhoodRecord, &'a NeighborhoodRecord)>, usize) {
    let mut complete = Vec::new();
    let mut dropped = 0;
    for (n, c) in set.matched() {
        match (stats.record(n, tau), stats.record(c, tau)) {
            (Some(a), Some(b)) if a.avg_growth.is_some() && b.avg_growth.is_some() => complete.push((a, b)),
            _ => dropped += 1,
        }
    }
    (complete, dropped)
}

pub fn fit_glm(name: &str, set: &PairedWordSet, stats: &StatsTable, tau: f64, irls: IrlsOptions) -> GlmOutcome {
    let (pairs, dropped) = complete_pairs(set, stats, tau);
    let mut density = Vec::with_capacity(2 * pairs.len());
    let mut growth = Vec::with_capacity(2 * pairs.len());
    let mut y = Vec::with_capacity(2 * pairs.len());
    for (n, c) in &pairs {
        for (r, label) in [(n, 1.0), (c, 0.0)] {
            density.push(r.density as f64);
            growth.push(r.avg_growth.expect("complete pair"));
            y.push(label);
        }
    }
    let design = Design::with_intercept(&[(DENSITY, &density), (GROWTH, &growth)]);
    let (fit, error) = match fit_logistic_irls(&design, &y, irls) {
        Ok(mut f) => {
            f.tau = Some(tau);
            f.ll_history.clear();
            (Some(f), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let vif = if fit.is_some() { vif(&design).ok() } else { None };
    GlmOutcome {
        set: name.to_string(),
        tau,
        rows: y.len(),
        complete_pairs: pairs.len(),
        dropped_pairs: dropped,
        fit,
        vif,
        error,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonOutcome {
    pub set: String,
    pub tau: f64,
    pub statistic: String,
    pub pairs: usize,
    pub result: Option<WilcoxonResult>,
    pub error: Option<String>,
}

/// Signed-rank tests on neologism-minus-control differences, one per
/// statistic.
pub fn wilcoxon_tests(name: &str, set: &PairedWordSet, stats: &StatsTable, tau: f64) -> Vec<WilcoxonOutcome> {
    let mut density = Vec::new();
    for (n, c) in set.matched() {
        if let (Some(a), Some(b)) = (stats.record(n, tau), stats.record(c, tau)) {
            density.push(a.density as f64 - b.density as f64);
        }
    }
    let (pairs, _) = complete_pairs(set, stats, tau);
    let growth: Vec<f64> = pairs.iter().map(|(a, b)| a.avg_growth.unwrap() - b.avg_growth.unwrap()).collect();
    [(DENSITY, density), (GROWTH, growth)]
        .into_iter()
        .map(|(statistic, diffs)| {
            let (result, error) = match wilcoxon_signed_rank(&diffs) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            WilcoxonOutcome { set: name.into(), tau, statistic: statistic.into(), pairs: diffs.len(), result, error }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub beta: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlmSummary {
    pub set: String,
    pub tau: f64,
    pub rows: usize,
    pub dropped_pairs: usize,
    pub coefficients: BTreeMap<String, Coefficient>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub log_likelihood: Option<f64>,
    pub vif: Option<Vec<f64>>,
    pub error: Option<String>,
}

impl From<&GlmOutcome> for GlmSummary {
    fn from(o: &GlmOutcome) -> Self {
        let coefficients = o
            .fit
            .iter()
            .flat_map(|f| {
                (0..f.names.len()).map(move |j| {
                    (
                        f.names[j].clone(),
                        Coefficient {
                            beta: f.coefficients[j],
                            std_error: f.std_errors[j],
                            z: f.z[j],
                            p_value: f.p_values[j],
                        },
                    )
                })
            })
            .collect();
        Self {
            set: o.set.clone(),
            tau: o.tau,
            rows: o.rows,
            dropped_pairs: o.dropped_pairs,
            coefficients,
            iterations: o.fit.as_ref().map(|f| f.iterations),
            converged: o.fit.as_ref().map(|f| f.converged),
            log_likelihood: o.fit.as_ref().map(|f| f.log_likelihood),
            vif: o.vif.clone(),
            error: o.error.clone(),
        }
    }
}

impl GlmSummary {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.get(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub name: String,
    pub mode: ControlMode,
    pub seed: Option<u64>,
    pub pairs: usize,
    pub unmatched: usize,
    pub means: Vec<SetMeans>,
}

pub fn summarize_set(
    name: &str,
    mode: ControlMode,
    pairs: &PairedWordSet,
    stats: &StatsTable,
    taus: &[f64],
) -> SetSummary {
    SetSummary {
        name: name.into(),
        mode,
        seed: pairs.seed,
        pairs: pairs.matched_count(),
        unmatched: pairs.unmatched_count(),
        means: stats.means().into_iter().filter(|m| taus.contains(&m.tau)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub historical_slices: usize,
    pub historical_tokens: u64,
    pub modern_tokens: u64,
    pub types: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub anchors: usize,
    pub residual: f64,
    pub orthogonality_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metric: String,
    pub taus: Vec<f64>,
    #[serde(default)]
    pub cluster_radius: Option<f64>,
    pub corpus: CorpusSummary,
    pub alignment: AlignmentSummary,
    pub neologisms: usize,
    pub sets: Vec<SetSummary>,
    pub glm: Vec<GlmSummary>,
    pub wilcoxon: Vec<WilcoxonOutcome>,
}

impl Report {
    pub fn new(
        config: &PipelineConfig,
        table: &FrequencyTable,
        map: &RotationMap,
        neologisms: usize,
        sets: Vec<SetSummary>,
        glm: Vec<GlmSummary>,
        wilcoxon: Vec<WilcoxonOutcome>,
    ) -> Self {
        Self {
            metric: config.stats.metric.as_str().into(),
            taus: config.taus.clone(),
            cluster_radius: config.cluster_radius,
            corpus: CorpusSummary {
                historical_slices: table.historical_slice_indices().count(),
                historical_tokens: table.partition_tokens(Partition::Historical),
                modern_tokens: table.partition_tokens(Partition::Modern),
                types: table.word_count(),
            },
            alignment: AlignmentSummary {
                anchors: map.anchor_count,
                residual: map.residual,
                orthogonality_error: map.orthogonality_error(),
            },
            neologisms,
            sets,
            glm,
            wilcoxon,
        }
    }

    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Artifact { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn glm_for(&self, set: &str, tau: f64) -> Option<&GlmSummary> {
        self.glm.iter().find(|g| g.set == set && g.tau == tau)
    }

    pub fn set(&self, name: &str) -> Option<&SetSummary> {
        self.sets.iter().find(|s| s.name == name)
    }

    /// Coefficients and p-values per threshold, for the stable set and the
    /// first relaxed sample.
    pub fn table1_tsv(&self) -> String {
        let mut out = format!("# metric: {}\ntau", self.metric);
        let columns = ["stable", "relaxed_00"];
        for set in columns {
            for stat in [DENSITY, GROWTH] {
                let _ = write!(out, "\t{set}_{stat}_beta\t{set}_{stat}_p");
            }
        }
        out.push('\n');
        for &tau in &self.taus {
            let _ = write!(out, "{tau}");
            for set in columns {
                let g = self.glm_for(set, tau);
                for stat in [DENSITY, GROWTH] {
                    match g.and_then(|g| g.coefficient(stat)) {
                        Some(c) => {
                            let _ = write!(out, "\t{}\t{}", c.beta, c.p_value);
                        }
                        None => out.push_str("\tNA\tNA"),
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Mean density and growth per set over the threshold sweep.
pub struct Curves {
    metric: String,
    means: Vec<SetMeans>,
}

impl Curves {
    pub fn new(stats: &StatsTable, sweep: &[f64]) -> Self {
        Self {
            metric: stats.metric.as_str().into(),
            means: stats.means().into_iter().filter(|m| sweep.contains(&m.tau)).collect(),
        }
    }

    pub fn density_csv(&self) -> String {
        let mut out = String::from("metric,tau,neologism,control\n");
        for m in &self.means {
            let _ = writeln!(out, "{},{},{},{}", self.metric, m.tau, m.neologism_density, m.control_density);
        }
        out
    }

    pub fn growth_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
        let mut out = String::from("metric,tau,neologism,control\n");
        for m in &self.means {
            let _ =
                writeln!(out, "{},{},{},{}", self.metric, m.tau, fmt(m.neologism_growth), fmt(m.control_growth));
        }
        out
    }
}

pub fn neologism_tsv(words: &[String], table: &FrequencyTable) -> String {
    let mut out = String::from("word\tf_modern\tf_historical\tratio\n");
    for w in words {
        let fm = table.partition_frequency(w, Partition::Modern);
        let fh = table.partition_frequency(w, Partition::Historical);
        let ratio = if fh == 0.0 { "inf".to_string() } else { (fm / fh).to_string() };
        let _ = writeln!(out, "{w}\t{fm}\t{fh}\t{ratio}");
    }
    out
}

pub fn count_neologisms(path: &Path) -> Result<usize, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    Ok(text.lines().skip(1).filter(|l| !l.is_empty()).count())
}
