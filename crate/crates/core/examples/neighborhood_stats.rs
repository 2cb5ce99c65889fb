//! Neighborhood density and mean growth of neologisms and their controls on
//! the toy corpus, across a range of thresholds.

use neoscope::align::{fit_procrustes, AlignOptions};
use neoscope::corpus::{FrequencyTable, Partition, PosLexicon};
use neoscope::embed::{train_sgns, SgnsConfig};
use neoscope::select::{match_stable_controls, select_neologisms, MatchParams, SelectionParams};
use neoscope::stats::{stats_table, NeighborhoodIndex, StatsParams};
use neoscope::synth::{generate, planted_study, StudyShape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&planted_study(7, &StudyShape::toy()))?;
    let table = FrequencyTable::build(&synth.corpus);
    let mut lexicon = PosLexicon::default();
    for (w, tag) in &synth.tagged {
        lexicon.add(w, tag, 1);
    }
    let config = SgnsConfig { dim: 20, epochs: 3, ..SgnsConfig::default() };
    let hist = train_sgns(&synth.corpus.sentences(Partition::Historical), &config, Some(Partition::Historical))?;
    let modern = train_sgns(&synth.corpus.sentences(Partition::Modern), &config, Some(Partition::Modern))?;
    let map = fit_procrustes(&hist, &modern, AlignOptions::default())?;

    let selection = SelectionParams { min_modern_count: config.min_count, ..SelectionParams::default() };
    let neos = select_neologisms(&table, &lexicon, &selection);
    let matching = MatchParams { min_historical_count: config.min_count, ..MatchParams::default() };
    let pairs = match_stable_controls(&neos, &table, &lexicon, &matching);

    let index = NeighborhoodIndex::new(&hist, &modern, &map, &table, &lexicon, StatsParams::default());
    let taus: Vec<f64> = (5..=12).map(|i| f64::from(i) / 20.0).collect();
    let stats = stats_table(&pairs, &taus, &index)?;
    println!("{} pairs, {} eligible neighbors", pairs.matched_count(), index.eligible_count());
    println!("{:>5} {:>9} {:>9} {:>9} {:>9}", "tau", "dens neo", "dens ctl", "grow neo", "grow ctl");
    let fmt = |v: Option<f64>| v.map_or("NA".into(), |v| format!("{v:+.3}"));
    for m in stats.means() {
        println!(
            "{:>5.2} {:>9.2} {:>9.2} {:>9} {:>9}",
            m.tau,
            m.neologism_density,
            m.control_density,
            fmt(m.neologism_growth),
            fmt(m.control_growth)
        );
    }
    Ok(())
}
