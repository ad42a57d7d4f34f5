//! Seeded RNG construction and deterministic seed derivation.
//!
//! All stochastic operations in this crate draw from a ChaCha8 stream seeded
//! explicitly, so results depend only on (inputs, seed). Sub-seeds for
//! pipeline stages are derived from a master seed with [`derive_seed`] so that
//! independent stages consume independent streams.

use rand_chacha::ChaCha8Rng;

pub use rand::Rng;
pub use rand::SeedableRng;

/// The RNG used throughout the crate.
pub type SeededRng = ChaCha8Rng;

/// Build the crate-wide RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// splitmix64 finalizer; good avalanche for cheap seed mixing.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed for an independent stream of a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

/// Two-level derivation, e.g. (stage, column).
pub fn derive_seed2(master: u64, stream: u64, substream: u64) -> u64 {
    derive_seed(derive_seed(master, stream), substream)
}
