//! Select neologisms from the toy corpus and pair them with stable and
//! relaxed controls.

use std::collections::BTreeSet;

use neoscope::corpus::{FrequencyTable, Partition, PosLexicon};
use neoscope::select::{growth_rate, match_stable_controls, sample_relaxed_controls, select_neologisms, MatchParams, SelectionParams};
use neoscope::synth::{generate, planted_study, StudyShape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&planted_study(7, &StudyShape::toy()))?;
    let table = FrequencyTable::build(&synth.corpus);
    let mut lexicon = PosLexicon::default();
    for (w, tag) in &synth.tagged {
        lexicon.add(w, tag, 1);
    }

    let neos = select_neologisms(&table, &lexicon, &SelectionParams::default());
    let planted: BTreeSet<&str> = synth.truth.neologisms.iter().map(String::as_str).collect();
    let found: BTreeSet<&str> = neos.iter().map(String::as_str).collect();
    println!("{} selected, {} planted, {} in common", found.len(), planted.len(), found.intersection(&planted).count());

    let params = MatchParams::default();
    let stable = match_stable_controls(&neos, &table, &lexicon, &params);
    let relaxed = sample_relaxed_controls(&neos, &table, &lexicon, &params, 1);
    println!("{:<12} {:>8} {:<12} {:>7} {:<12}", "neologism", "f_m", "stable", "r_s", "relaxed");
    for (s, r) in stable.pairs.iter().zip(&relaxed.pairs) {
        let rs = s.control.as_deref().and_then(|c| growth_rate(&table.historical_series(c)));
        println!(
            "{:<12} {:>8.5} {:<12} {:>7} {:<12}",
            s.neologism,
            table.partition_frequency(&s.neologism, Partition::Modern),
            s.control.as_deref().unwrap_or("NONE"),
            rs.map_or("".into(), |r| format!("{r:+.3}")),
            r.control.as_deref().unwrap_or("NONE"),
        );
    }
    println!("unmatched: {} stable, {} relaxed", stable.unmatched_count(), relaxed.unmatched_count());
    Ok(())
}
