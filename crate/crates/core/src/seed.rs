//! Seed derivation.
//!
//! Every stochastic draw in a run descends from one master seed. Child seeds
//! are produced by folding a path of integers (stream tag, run index, fold
//! index, ...) through the SplitMix64 finaliser, so the result is identical on
//! every platform and does not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags keep the draws of different pipeline stages independent even
/// when they share run/fold indices.
pub mod stream {
    pub const SPLIT: u64 = 0x5350_4c49;
    pub const FOLDS: u64 = 0x464f_4c44;
    pub const ADASYN: u64 = 0x4144_4153;
    pub const EVOLVE: u64 = 0x4556_4f4c;
    pub const SYNTH: u64 = 0x5359_4e54;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &part| {
        splitmix64(acc ^ splitmix64(part))
    })
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, path: &[u64]) -> Rng {
    rng_from_seed(derive_seed(master, path))
}

/// Uniform index in `0..n`. Draws a `u32` so the stream is the same on 32- and
/// 64-bit targets.
pub fn index(rng: &mut Rng, n: usize) -> usize {
    use rand::Rng as _;
    debug_assert!(n > 0 && n <= u32::MAX as usize);
    rng.gen_range(0..n as u32) as usize
}

pub fn unit(rng: &mut Rng) -> f64 {
    use rand::Rng as _;
    rng.gen::<f64>()
}

pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = index(rng, i + 1);
        items.swap(i, j);
    }
}
