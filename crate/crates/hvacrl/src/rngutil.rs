//! Seed derivation helpers shared by the training and evaluation loops.

/// SplitMix64 step, used to derive independent sub-seeds from one master
/// seed without constructing an RNG.
pub(crate) fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for a named stream of a run seed.
///
/// Different `stream` tags give statistically independent seeds; the same
/// `(seed, stream)` pair always gives the same result.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}
