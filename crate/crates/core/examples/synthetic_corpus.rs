//! Generate the small planted study, write it to disk and show what was
//! planted.
//!
//!     cargo run --example synthetic_corpus -- /tmp/toy-corpus

use std::collections::BTreeMap;
use std::path::PathBuf;

use neoscope::corpus::Partition;
use neoscope::synth::{generate, planted_study, StudyShape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("neoscope-toy-corpus"), PathBuf::from);
    let config = planted_study(7, &StudyShape::toy());
    let synth = generate(&config)?;
    let manifest = synth.write_to_dir(&out)?;

    println!("manifest: {}", manifest.display());
    for (slice, tokens) in synth.corpus.slices().iter().zip(synth.corpus.token_counts()) {
        println!("  {:<10} {:<10} {tokens:>7} tokens", slice.id, slice.partition.as_str());
    }
    println!(
        "{} HISTORICAL tokens, {} MODERN tokens",
        synth.corpus.partition_tokens(Partition::Historical),
        synth.corpus.partition_tokens(Partition::Modern)
    );

    let mut by_topic: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for w in &synth.truth.neologisms {
        by_topic.entry(synth.truth.topic[w].as_str()).or_default().push(w);
    }
    println!("planted neologisms:");
    for (topic, words) in by_topic {
        println!("  {topic:<10} {}", words.join(" "));
    }
    let rising = synth.truth.growth_sign.values().filter(|s| **s > 0).count();
    let falling = synth.truth.growth_sign.values().filter(|s| **s < 0).count();
    println!("{rising} words trend up and {falling} trend down across HISTORICAL");
    Ok(())
}
