//! Deterministic seed derivation for reproducible parallel runs.
//!
//! All randomness in this crate flows from explicit 64-bit seeds. A batch of
//! trials derives one master seed per trial index with [`mix_seed`], and each
//! trial derives independent sub-stream seeds (realization, graph build,
//! engine run) by mixing again. Because the derivation depends only on
//! `(root_seed, index)`, a batch produces identical output for any worker
//! count or scheduling order.
//!
//! # Algorithm
//!
//! [`mix_seed`] jumps a splitmix64 stream: position `k` of the stream seeded
//! at `base` has state `base + k * GAMMA` (wrapping), and the output is the
//! splitmix64 finalizer applied to that state. The increment `GAMMA` is odd,
//! so distinct indices map to distinct states. This is a fixed, published
//! contract: changing it, or the pinned ChaCha12 generator, is a breaking
//! change for every recorded seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Weyl increment of the splitmix64 stream (the 64-bit golden ratio).
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output finalizer: bijective avalanche mixing of one 64-bit word.
#[must_use]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed at position `index` of the stream rooted at `base`.
///
/// Used for trial seeds (`mix_seed(root_seed, trial)`) and, nested, for the
/// per-trial sub-streams (`mix_seed(trial_seed, 0..=2)`).
#[must_use]
pub fn mix_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index.wrapping_mul(GAMMA)))
}

/// Sub-stream index for node-sequence sampling within a trial.
pub const STREAM_REALIZE: u64 = 0;
/// Sub-stream index for the half-edge pairing within a trial.
pub const STREAM_BUILD: u64 = 1;
/// Sub-stream index for the exploration engine within a trial.
pub const STREAM_RUN: u64 = 2;

/// Constructs the pinned generator (ChaCha12) from a 64-bit seed.
#[must_use]
pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix64_matches_reference_vector() {
        // First three outputs of the published splitmix64 generator seeded
        // at 1234567 (state advances by GAMMA per draw). Pins the exact
        // bit-level contract of the seed derivation.
        assert_eq!(mix_seed(1234567, 0), 0x599e_d017_fb08_fc85);
        assert_eq!(mix_seed(1234567, 1), 0x2c73_f084_5854_0fa5);
        assert_eq!(mix_seed(1234567, 2), 0x883e_bce5_a3f2_7c77);
    }

    #[test]
    fn mix_seed_is_injective_on_small_indices() {
        let mut seen = std::collections::HashSet::new();
        for k in 0..10_000u64 {
            assert!(
                seen.insert(mix_seed(42, k)),
                "collision at index {k}: stream jump must be injective"
            );
        }
    }

    #[test]
    fn mix_seed_depends_on_base_and_index() {
        assert_ne!(mix_seed(0, 0), mix_seed(0, 1));
        assert_ne!(mix_seed(0, 0), mix_seed(1, 0));
    }

    #[test]
    fn rng_from_is_deterministic() {
        use rand::RngCore;
        let mut a = rng_from(99);
        let mut b = rng_from(99);
        assert_eq!(a.next_u64(), b.next_u64(), "same seed must replay");
    }
}
