//! Seeded, splittable random streams for reproducible simulation.
//!
//! Every random quantity in the crate is drawn from a [`SplitMix64`]
//! stream whose seed is derived with [`mix`]. Substreams are addressed by
//! index — cell index, replication index — so results do not depend on
//! execution order or thread count: `mix(mix(base, cell), replication)`
//! names the same stream no matter which worker draws from it.

/// Weyl increment of SplitMix64.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output mixing (Steele, Lea & Flood's finalizer).
#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a substream seed from a parent seed and a stream index.
///
/// Defined as `finalize(seed XOR (index · 0x9E3779B97F4A7C15))` with the
/// SplitMix64 finalizer above, so any implementation of the same recipe
/// reproduces the streams bit-exactly.
#[inline]
pub fn mix(seed: u64, index: u64) -> u64 {
    finalize(seed ^ index.wrapping_mul(GOLDEN))
}

/// A SplitMix64 generator: a 64-bit Weyl sequence pushed through an
/// avalanching finalizer. Fast, tiny state, and good enough statistical
/// quality for Monte-Carlo integration of smooth losses.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        finalize(self.state)
    }

    /// Uniform draw on (0, 1]: 53 random bits, shifted away from zero so
    /// that ln(U) is always finite.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }
}
