//! Diachronic neology analysis.
//!
//! Given a corpus split into HISTORICAL time slices and a MODERN block, the
//! crate selects emerging nouns and frequency-matched controls, trains
//! skip-gram embeddings for both partitions, aligns them with an orthogonal
//! rotation, and measures two properties of each word's neighborhood in the
//! HISTORICAL space: how crowded it is and how fast its members were growing
//! in frequency. A logistic GLM then tests which property predicts emergence.
//!
//! Each stage is usable on its own; see the `examples/` directory for one
//! runnable program per capability and [`pipeline`] for the staged CLI.

pub mod align;
pub mod corpus;
pub mod embed;
pub mod infer;
pub mod linalg;
pub mod pipeline;
pub mod select;
pub mod stats;
pub mod synth;
