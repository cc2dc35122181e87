//! Deterministic seeded randomness.
//!
//! Every stochastic component in this crate draws from an [`RngStream`], a
//! counted wrapper around ChaCha8 seeded from a single `u64`. Identical seeds
//! produce identical draw sequences on every platform; there is no fallback
//! to an entropy source anywhere.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose tags for deriving independent substreams from one user seed.
///
/// Keeping the purposes on disjoint substreams means, for example, that the
/// codebook draws of the embedding machine can never perturb the initial
/// assignment it shares with the reference solver.
pub(crate) mod tag {
    pub const INITIAL_ASSIGNMENT: u64 = 1;
    pub const ITERATION_DRAWS: u64 = 2;
    pub const CODEBOOK: u64 = 3;
    pub const LOCAL_SEARCH: u64 = 4;
    pub const GENERATOR: u64 = 5;
}

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the substream identified by `(tag, index)` under a user seed.
pub(crate) fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(tag ^ mix64(index)))
}

/// A counted, reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    draws: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            draws: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for a specific purpose and index under a user seed.
    pub(crate) fn derived(seed: u64, tag: u64, index: u64) -> Self {
        RngStream::new(derive_seed(seed, tag, index))
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Uniform value in the half-open interval (0, 1], with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        let x = self.next_u64();
        ((x >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform index in `0..bound`. `bound` must be nonzero.
    pub fn next_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "next_below called with empty range");
        self.draws += 1;
        self.rng.random_range(0..bound)
    }
}
