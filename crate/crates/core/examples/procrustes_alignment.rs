//! Align a rotated copy of a random space, then align real HISTORICAL and
//! MODERN embeddings of the toy corpus.

use neoscope::align::{fit_procrustes, project, AlignOptions};
use neoscope::corpus::Partition;
use neoscope::embed::{train_sgns, EmbeddingSpace, Metric, SgnsConfig};
use neoscope::linalg::Matrix;
use neoscope::synth::{generate, planted_study, StudyShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A plane rotation embedded in 4 dimensions.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let words: Vec<String> = (0..50).map(|i| format!("w{i}")).collect();
    let hist = Matrix::from_vec(50, 4, (0..200).map(|_| rng.random::<f64>() - 0.5).collect());
    let (c, s) = (0.6, 0.8);
    let q = Matrix::from_rows(&[
        vec![c, -s, 0.0, 0.0],
        vec![s, c, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ]);
    let modern = hist.matmul(&q);
    let map = fit_procrustes(
        &EmbeddingSpace::new(words.clone(), hist)?,
        &EmbeddingSpace::new(words, modern)?,
        AlignOptions::default(),
    )?;
    println!("recovered R vs Q^T: max error {:.2e}", map.rotation.sub(&q.transpose()).max_abs());

    let synth = generate(&planted_study(7, &StudyShape::toy()))?;
    let config = SgnsConfig { dim: 20, epochs: 3, ..SgnsConfig::default() };
    let hist = train_sgns(&synth.corpus.sentences(Partition::Historical), &config, Some(Partition::Historical))?;
    let modern = train_sgns(&synth.corpus.sentences(Partition::Modern), &config, Some(Partition::Modern))?;
    let map = fit_procrustes(&hist, &modern, AlignOptions::default())?;
    println!(
        "toy corpus: {} anchors, residual {:.3}, orthogonality error {:.1e}",
        map.anchor_count,
        map.residual,
        map.orthogonality_error()
    );

    let neo = synth.truth.neologisms.iter().find(|w| modern.contains(w)).expect("a neologism with a vector");
    let rotated = project(&map, modern.vector(neo).expect("present"))?;
    println!("{neo} ({}) in HISTORICAL coordinates:", synth.truth.topic[neo]);
    for n in hist.nearest(&rotated, 5, Metric::Cosine, |_| true)? {
        println!("  {:<12} {:.3}  {}", n.word, n.similarity, synth.truth.topic.get(&n.word).map_or("-", String::as_str));
    }
    Ok(())
}
