use std::collections::BTreeMap;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Probabilities below this are treated as zero and omitted from [`Distribution`]s.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// `index` as a `width`-character bitstring, most significant bit first.
pub fn bitstring(index: usize, width: usize) -> String {
    (0..width)
        .map(|pos| if index >> (width - 1 - pos) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Outcome probabilities keyed by bitstring. Outcomes with probability below
/// [`PRUNE_THRESHOLD`] are absent; [`Distribution::get`] reports them as 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub width: usize,
    pub probs: BTreeMap<String, f64>,
}

impl Distribution {
    /// Validates keys, ranges and normalization (sum within 1e-12 of 1).
    pub fn new(width: usize, probs: BTreeMap<String, f64>) -> Result<Self> {
        for (key, &p) in &probs {
            if key.len() != width || !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::InvalidArgument(format!(
                    "outcome {key:?} is not a {width}-bit string"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "probability {p} of {key} outside [0, 1]"
                )));
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { width, probs })
    }

    /// From a dense vector indexed by outcome, pruning tiny entries.
    pub fn from_dense(width: usize, probs: &[f64]) -> Self {
        debug_assert_eq!(probs.len(), 1 << width);
        let probs = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= PRUNE_THRESHOLD)
            .map(|(i, &p)| (bitstring(i, width), p))
            .collect();
        Self { width, probs }
    }

    pub fn get(&self, outcome: &str) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    /// Outcomes with nonzero probability, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.probs.keys().map(String::as_str)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

/// Seeded measurement histogram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShotCounts {
    pub shots: u64,
    pub seed: u64,
    pub width: usize,
    pub counts: BTreeMap<String, u64>,
}

impl ShotCounts {
    /// Draws `shots` outcomes from the dense distribution `probs` using
    /// ChaCha8 seeded with `seed`.
    pub(crate) fn draw(width: usize, probs: &[f64], shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        let weights = WeightedIndex::new(probs)
            .map_err(|e| Error::InvalidArgument(format!("cannot sample: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tally = vec![0u64; probs.len()];
        for _ in 0..shots {
            tally[weights.sample(&mut rng)] += 1;
        }
        let counts = tally
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(i, c)| (bitstring(i, width), c))
            .collect();
        Ok(Self {
            shots,
            seed,
            width,
            counts,
        })
    }

    pub fn get(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }
}
