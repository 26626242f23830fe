//! Seeding discipline.
//!
//! Every random quantity comes from ChaCha8 (`rand_chacha` 0.3,
//! [`ChaCha8Rng`]), a counter-based generator whose output is fully
//! determined by a 256-bit key, a 64-bit stream id and a word position:
//!
//! * a run seed is `derive_seed(base_seed, run_index)` (SplitMix64 mixing),
//! * the key is `ChaCha8Rng::seed_from_u64(run_seed)` (PCG32 key expansion
//!   from `rand_core` 0.6),
//! * each consumer gets its own [`Stream`] id, so drawing more perturbation
//!   directions never shifts the noise sequence,
//! * per-iteration noise starts at word position `k << 32` of the noise
//!   stream, so two pipelines evaluated at the same `k` see the same draws
//!   regardless of how many numbers each consumed earlier.
//!
//! Results are therefore independent of thread count and scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose-specific stream ids within one run seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// The unknown state `psi` or object.
    Truth = 1,
    /// The starting estimate `sigma_0`.
    Initial = 2,
    /// Perturbation directions and random masks.
    Directions = 3,
    /// Measurement noise, indexed by iteration.
    Noise = 4,
    /// Hadamard row permutation.
    Permutation = 5,
}

const WORDS_PER_INDEX_SHIFT: u32 = 32;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `index` under `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(mix64(base).wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn stream(seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// Generator positioned at the block reserved for `index` within a stream.
pub fn indexed(seed: u64, which: Stream, index: u64) -> StreamRng {
    let mut rng = stream(seed, which);
    rng.set_word_pos((index as u128) << WORDS_PER_INDEX_SHIFT);
    rng
}

/// Per-iteration noise source shared by pipelines that must see identical
/// noise realizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseStream {
    seed: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn at(&self, k: usize) -> StreamRng {
        indexed(self.seed, Stream::Noise, k as u64)
    }
}
