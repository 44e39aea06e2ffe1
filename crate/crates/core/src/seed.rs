//! Reproducible random streams.
//!
//! Every stochastic step draws from a ChaCha8 stream whose seed is derived
//! from the run seed plus a path of integer tags (stream kind, epoch, view,
//! ...). Two runs with the same root seed replay the same draws regardless
//! of the order in which streams are opened.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream kinds used as the first path element.
pub mod tag {
    pub const INIT: u64 = 0x1;
    pub const VIEW: u64 = 0x2;
    pub const MEMBERSHIP_NEGATIVES: u64 = 0x3;
    pub const SUBSAMPLE: u64 = 0x4;
    pub const MEMBERSHIP_BATCH: u64 = 0x5;
    pub const SPLIT: u64 = 0x6;
    pub const KMEANS: u64 = 0x7;
    pub const PROBE: u64 = 0x8;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `root` along `path`.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(root), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Opens the stream for `root` along `path`.
pub fn stream(root: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(root, path))
}
