//! Deterministic, parallelism-independent random streams.
//!
//! All sampling in this crate goes through fixed-size blocks. Block `i` of a
//! run with seed `s` uses its own ChaCha8 stream keyed by SplitMix64 from
//! (s, i); blocks are generated in parallel and concatenated in index order,
//! so output is byte-identical for any worker count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

/// Number of realizations per block.
pub const BLOCK: usize = 4096;

/// SplitMix64 step; the standard finalizer used to derive substream keys.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Key for substream `stream` of run `seed`.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xA24BAED4963EE407))
}

/// ChaCha8 generator for one block of one run.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, block))
}

/// Uniform in [0, 1) with 53 random bits.
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Standard exponential via inverse CDF.
pub fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    -(-uniform01(rng)).ln_1p()
}

/// Standard normal via Box-Muller (one value per pair of uniforms).
pub fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform01(rng);
    let u2 = uniform01(rng);
    // 1 - u1 keeps the log argument in (0, 1].
    (-2.0 * (-u1).ln_1p()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random sign, +1 or -1.
pub fn rademacher(rng: &mut ChaCha8Rng) -> f64 {
    if rng.next_u64() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Generates `count` values with `draw`, partitioned into [`BLOCK`]-sized
/// blocks with independent substreams, merged in block order.
pub fn sample_blocks<F>(count: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let n_blocks = count.div_ceil(BLOCK);
    let blocks: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let len = BLOCK.min(count - b * BLOCK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for b in blocks {
        out.extend_from_slice(&b);
    }
    out
}
