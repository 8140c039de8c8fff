//! Small self-contained generator for sampled modes.
//!
//! Sampled verdicts must be replayable from the seed recorded in the output,
//! across platforms and dependency upgrades, so the generator is pinned here
//! rather than borrowed from a crate. SplitMix64 is more than adequate for
//! picking test points in an assignment space.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform-ish value in `[0, bound)`. Bias is irrelevant here: the only
    /// contract is determinism for a fixed seed.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }
}
