//! Train skip-gram embeddings on the HISTORICAL half of the toy corpus and
//! list a few nearest neighbors.

use neoscope::corpus::Partition;
use neoscope::embed::{train_sgns, Metric, SgnsConfig};
use neoscope::synth::{generate, planted_study, StudyShape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&planted_study(7, &StudyShape::toy()))?;
    let sentences = synth.corpus.sentences(Partition::Historical);
    let config = SgnsConfig { dim: 20, epochs: 3, ..SgnsConfig::default() };
    let space = train_sgns(&sentences, &config, Some(Partition::Historical))?;
    println!("{} words, {} dimensions", space.len(), space.dim());

    let topic_of = |w: &str| synth.truth.topic.get(w).map_or("-", String::as_str);
    for query in space.words().iter().take(3) {
        let v = space.vector(query).expect("word from the space");
        let nearest = space.nearest(v, 6, Metric::Cosine, |w| w != query)?;
        println!("{query} ({})", topic_of(query));
        for n in nearest {
            println!("  {:<12} {:.3}  {}", n.word, n.similarity, topic_of(&n.word));
        }
    }
    Ok(())
}
