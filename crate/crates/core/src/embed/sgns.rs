//! Skip-gram with negative sampling.
//!
//! For every (center, context) pair inside a dynamically shrunk window the
//! context word's input vector is trained to score the center word's output
//! vector high and `negatives` noise words (drawn from unigram^0.75) low.
//! The learning rate decays linearly over all epochs. With one worker the
//! run is a pure function of the config seed; with several workers the
//! updates are lock-free and unsynchronized, so results vary between runs.

use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution};
use serde::{Deserialize, Serialize};

use super::vocab::{build_vocab, count_tokens};
use super::{EmbedError, EmbeddingSpace};
use crate::corpus::Partition;
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    /// Frequent-word subsampling threshold; `None` disables subsampling.
    pub subsample: Option<f64>,
    pub seed: u64,
    /// 1 = deterministic single-threaded training.
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            min_count: 5,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            subsample: Some(1e-3),
            seed: 1,
            workers: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::InvalidConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return bad("subsample threshold must be positive");
            }
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }
}

const MIN_LR_FRACTION: f64 = 1e-4;
const PROGRESS_CHUNK: u64 = 10_000;

trait Weights {
    fn load(&self, i: usize) -> f64;
    fn store(&self, i: usize, v: f64);
}

impl Weights for [Cell<f64>] {
    #[inline]
    fn load(&self, i: usize) -> f64 {
        self[i].get()
    }
    #[inline]
    fn store(&self, i: usize, v: f64) {
        self[i].set(v)
    }
}

impl Weights for [AtomicU64] {
    #[inline]
    fn load(&self, i: usize) -> f64 {
        f64::from_bits(self[i].load(Ordering::Relaxed))
    }
    #[inline]
    fn store(&self, i: usize, v: f64) {
        self[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

struct Shared<'a> {
    keep_prob: Vec<f64>,
    noise: WeightedAliasIndex<f64>,
    config: &'a SgnsConfig,
    total_work: f64,
    processed: AtomicU64,
}

impl Shared<'_> {
    fn learning_rate(&self) -> f64 {
        let done = self.processed.load(Ordering::Relaxed) as f64;
        let frac = (1.0 - done / (self.total_work + 1.0)).max(MIN_LR_FRACTION);
        self.config.learning_rate * frac
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn run_worker<W: Weights + ?Sized>(
    shared: &Shared<'_>,
    sentences: &[Vec<u32>],
    input: &W,
    output: &W,
    rng: &mut ChaCha8Rng,
) {
    let dim = shared.config.dim;
    let window = shared.config.window;
    let mut neu1e = vec![0.0f64; dim];
    let mut l1 = vec![0.0f64; dim];
    let mut kept: Vec<u32> = Vec::new();
    let mut pending = 0u64;
    let mut lr = shared.learning_rate();

    for _ in 0..shared.config.epochs {
        for sentence in sentences {
            kept.clear();
            for &w in sentence {
                let p = shared.keep_prob[w as usize];
                if p >= 1.0 || rng.random::<f64>() < p {
                    kept.push(w);
                }
            }
            pending += sentence.len() as u64;
            if pending >= PROGRESS_CHUNK {
                shared.processed.fetch_add(pending, Ordering::Relaxed);
                pending = 0;
                lr = shared.learning_rate();
            }
            for pos in 0..kept.len() {
                let center = kept[pos] as usize;
                let span = window - rng.random_range(0..window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(kept.len() - 1);
                for c in lo..=hi {
                    if c == pos {
                        continue;
                    }
                    let ctx = kept[c] as usize;
                    let base_in = ctx * dim;
                    for k in 0..dim {
                        l1[k] = input.load(base_in + k);
                    }
                    neu1e.iter_mut().for_each(|x| *x = 0.0);
                    for n in 0..=shared.config.negatives {
                        let (target, label) = if n == 0 {
                            (center, 1.0)
                        } else {
                            let t = shared.noise.sample(rng);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let base_out = target * dim;
                        let mut f = 0.0;
                        for k in 0..dim {
                            f += l1[k] * output.load(base_out + k);
                        }
                        let g = (label - sigmoid(f)) * lr;
                        for k in 0..dim {
                            let o = output.load(base_out + k);
                            neu1e[k] += g * o;
                            output.store(base_out + k, o + g * l1[k]);
                        }
                    }
                    for k in 0..dim {
                        input.store(base_in + k, l1[k] + neu1e[k]);
                    }
                }
            }
        }
    }
    shared.processed.fetch_add(pending, Ordering::Relaxed);
}

/// Trains an embedding space on tokenized sentences.
pub fn train_sgns(
    sentences: &[Vec<String>],
    config: &SgnsConfig,
    partition: Option<Partition>,
) -> Result<EmbeddingSpace, EmbedError> {
    config.validate()?;
    let counts = count_tokens(sentences);
    let vocab = build_vocab(counts.iter().map(|(w, c)| (*w, *c)), config.min_count);
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary { min_count: config.min_count });
    }
    let encoded: Vec<Vec<u32>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|w| vocab.index_of(w)).map(|i| i as u32).collect::<Vec<_>>())
        .filter(|s: &Vec<u32>| !s.is_empty())
        .collect();
    let train_words = vocab.total();
    if train_words <= config.window as u64 {
        return Err(EmbedError::CorpusTooShort { tokens: train_words, window: config.window });
    }

    let keep_prob: Vec<f64> = match config.subsample {
        Some(t) => {
            let thresh = t * train_words as f64;
            vocab.counts().iter().map(|&c| ((c as f64 / thresh).sqrt() + 1.0) * thresh / c as f64).collect()
        }
        None => vec![1.0; vocab.len()],
    };
    let noise = WeightedAliasIndex::new(vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).collect())
        .map_err(|e| EmbedError::InvalidConfig(format!("noise distribution: {e}")))?;

    let dim = config.dim;
    let n = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f64> = (0..n * dim).map(|_| (rng.random::<f64>() - 0.5) / dim as f64).collect();
    let mut output = vec![0.0f64; n * dim];

    let shared = Shared {
        keep_prob,
        noise,
        config,
        total_work: (config.epochs as u64 * train_words) as f64,
        processed: AtomicU64::new(0),
    };

    if config.workers == 1 {
        let inp = Cell::from_mut(&mut input[..]).as_slice_of_cells();
        let out = Cell::from_mut(&mut output[..]).as_slice_of_cells();
        run_worker(&shared, &encoded, inp, out, &mut rng);
    } else {
        let inp: Vec<AtomicU64> = input.iter().map(|v| AtomicU64::new(v.to_bits())).collect();
        let out: Vec<AtomicU64> = output.iter().map(|v| AtomicU64::new(v.to_bits())).collect();
        let chunk = encoded.len().div_ceil(config.workers).max(1);
        std::thread::scope(|s| {
            for (w, part) in encoded.chunks(chunk).enumerate() {
                let (shared, inp, out) = (&shared, &inp[..], &out[..]);
                let mut wrng = ChaCha8Rng::seed_from_u64(config.seed ^ (w as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                s.spawn(move || run_worker(shared, part, inp, out, &mut wrng));
            }
        });
        input = inp.into_iter().map(|a| f64::from_bits(a.into_inner())).collect();
    }

    let matrix = Matrix::from_vec(n, dim, input);
    let mut space = EmbeddingSpace::new(vocab.words().to_vec(), matrix)?;
    space.set_metadata(Some(config.clone()), partition);
    Ok(space)
}
