//! Seeded, named randomness streams.
//!
//! A master seed is expanded into named streams; each stream is split into
//! numbered sub-streams (ChaCha stream ids). Monte Carlo loops are cut into
//! fixed-size chunks, one sub-stream per chunk, so results depend only on the
//! seed and never on how chunks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

pub type SimRng = ChaCha8Rng;

/// Number of draws handled by one sub-stream in [`par_draws`].
pub const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    key: u64,
}

// 64-bit FNV-1a; stable across platforms and toolchains.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finaliser over the xor
    let mut z = a ^ b.rotate_left(17);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(master: u64, name: &str) -> Self {
        SeedStream { key: mix(master, fnv1a(name.as_bytes())) }
    }

    pub fn child(&self, name: &str) -> Self {
        SeedStream { key: mix(self.key, fnv1a(name.as_bytes())) }
    }

    pub fn rng(&self, index: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(index);
        rng
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}

/// Runs `n` independent draws in deterministic chunks and returns the results
/// in draw order. The first error (in draw order) is returned.
pub fn par_draws<T, F>(n: usize, stream: SeedStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SimRng, usize) -> Result<T> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.rng(c as u64);
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(|i| f(&mut rng, i)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}
