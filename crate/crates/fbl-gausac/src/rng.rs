//! Deterministic seed derivation for parallel Monte Carlo.
//!
//! Every stochastic operation in this crate gives each independent work
//! unit (trial, epoch, codeword, grid point, …) its own [`ChaCha8Rng`]
//! whose seed is derived from a master seed and the unit's index:
//!
//! ```text
//! unit_seed = splitmix64(splitmix64(master) ^ index)
//! ```
//!
//! Because a unit's stream depends only on `(master, index)` — never on
//! thread scheduling — estimates are bit-for-bit reproducible across runs
//! and across any worker count. Nested scopes (e.g. "epoch e of user
//! count k") chain the derivation: `derive_seed(derive_seed(master, k), e)`.
//!
//! SplitMix64 is the standard 64-bit finalizer (Steele–Lea–Flood); it is a
//! bijection, so distinct indices under one master seed never collide.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output/finalization step: maps a 64-bit state to a
/// well-mixed 64-bit value. Bijective.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for work unit `index` under `master`.
///
/// The master seed is scrambled before the XOR so that `(master=a, index=b)`
/// and `(master=b, index=a)` do not alias.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// The RNG for work unit `index` under `master`.
pub fn unit_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}
