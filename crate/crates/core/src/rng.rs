//! Counter-based random streams.
//!
//! Every stream is addressed by `(seed, trial, respondent, tag)`, so any draw
//! can be reproduced without replaying the draws before it. Parallel trials
//! and paired mechanism comparisons rely on that.
//!
//! Not cryptographically secure.

use rand_core::{impls, RngCore};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which quantity a stream drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    /// The respondent's truthful bit.
    Truth,
    /// The randomization coin of the `k`-th mechanism under comparison.
    Randomization(u32),
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Truth => 0,
            StreamTag::Randomization(k) => 1 + k as u64,
        }
    }
}

/// A SplitMix64 sequence whose starting state is a hash of the stream address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, trial: u64, respondent: u64, tag: StreamTag) -> Self {
        let mut h = mix64(seed ^ 0x6A09_E667_F3BC_C908);
        h = mix64(h ^ trial.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        h = mix64(h ^ respondent.wrapping_mul(0xA076_1D64_78BD_642F));
        h = mix64(h ^ tag.code().wrapping_mul(0xE703_7ED1_A0B4_28DB));
        Self { key: h, counter: 0 }
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
