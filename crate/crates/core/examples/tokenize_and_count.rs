//! Tokenize a small three-slice corpus, count words per slice and compute
//! frequency growth rates.

use neoscope::corpus::{
    build_pos_lexicon, tokenize, Document, FrequencyTable, Partition, Slice, SlicedCorpus, TokenizerConfig,
};
use neoscope::select::growth_rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rules = TokenizerConfig::default();
    for t in tokenize("The \"e-mail\" arrived, (finally).", &rules) {
        println!("{:>10} -> {:<8} capitalized={}", t.surface, t.lower, t.capitalized);
    }

    let texts = [
        ("1990", Partition::Historical, "the letter came by post and the letter was long"),
        ("2000", Partition::Historical, "an email came and the letter was short"),
        ("2010", Partition::Historical, "the email and another email and a letter"),
        ("modern", Partition::Modern, "email email blog email blog letter"),
    ];
    let slices = texts
        .iter()
        .map(|(id, partition, text)| Slice {
            id: id.to_string(),
            partition: *partition,
            documents: vec![Document { name: format!("{id}.txt"), text: text.to_string() }],
        })
        .collect();
    let corpus = SlicedCorpus::from_slices(slices, rules)?;
    let table = FrequencyTable::build(&corpus);

    for word in ["letter", "email", "blog"] {
        let series: Vec<String> = table
            .historical_series(word)
            .iter()
            .map(|f| f.map_or("NA".into(), |f| format!("{f:.3}")))
            .collect();
        println!(
            "{word:<7} series [{}] growth {:?} modern count {}",
            series.join(", "),
            growth_rate(&table.historical_series(word)),
            table.partition_count(word, Partition::Modern)
        );
    }

    let tagged = "letter\tNN\nemail\tNN\nblog\tNN\ncame\tVBD\nbroken line\n";
    let built = build_pos_lexicon(tagged.as_bytes())?;
    println!("lexicon: {} words from {} lines, {} malformed", built.lexicon.len(), built.lines, built.malformed);
    Ok(())
}
