//! Hierarchical seed derivation (experiment → block → sub-block → purpose).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Mixes `label` into `parent` with the SplitMix64 finalizer.
pub fn derive(parent: u64, label: u64) -> u64 {
    let mut z = parent ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

// Purpose labels, kept distinct so independent streams never coincide.
pub(crate) const PUNCTURE_POSITIONS: u64 = 1;
pub(crate) const SHORTEN_POSITIONS: u64 = 2;
pub(crate) const ALICE_PUNCTURE_FILL: u64 = 3;
pub(crate) const BOB_PUNCTURE_FILL: u64 = 4;
pub(crate) const ALICE_HASH_KEYS: u64 = 5;
pub(crate) const SUB_BLOCK: u64 = 0x100;
pub(crate) const BLOCK: u64 = 0x1_0000_0000;
pub(crate) const CHANNEL: u64 = 6;
pub(crate) const SESSION: u64 = 7;
