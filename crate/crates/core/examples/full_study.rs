//! Run every stage of a planted study and print the coefficient table.
//!
//!     cargo run --release --example full_study -- /tmp/study        # toy
//!     cargo run --release --example full_study -- /tmp/study full   # ~2M tokens

use std::path::PathBuf;

use neoscope::pipeline::{Pipeline, PipelineConfig, Stage, StudyPreset, SynthSpec};
use neoscope::synth::StudyShape;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let workdir = args.next().map_or_else(|| std::env::temp_dir().join("neoscope-study"), PathBuf::from);
    let full = args.next().as_deref() == Some("full");

    let mut config = PipelineConfig::default();
    if full {
        config.synth = Some(SynthSpec { preset: Some(StudyPreset::Full), ..SynthSpec::default() });
        config.embedding.dim = 25;
        config.cluster_radius = Some(0.4);
    } else {
        config.synth = Some(SynthSpec { preset: Some(StudyPreset::Toy), ..SynthSpec::default() });
        config.expected_historical_slices = Some(StudyShape::toy().historical_slices);
        config.embedding.dim = 10;
    }

    let mut pipeline = Pipeline::new(config, workdir.clone())?;
    let started = std::time::Instant::now();
    let result = pipeline.run(Stage::All);
    for line in pipeline.log() {
        eprintln!("{line}");
    }
    result?;
    println!("finished in {:.1}s; artifacts under {}", started.elapsed().as_secs_f64(), workdir.display());
    print!("{}", std::fs::read_to_string(workdir.join("report/table1.tsv"))?);
    Ok(())
}
