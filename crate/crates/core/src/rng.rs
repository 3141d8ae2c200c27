//! Minimal deterministic LCG (the classic 64-bit linear congruential step).
//! Used for eigensolver start vectors and randomized test fixtures so every
//! run is bitwise reproducible without pulling an RNG dependency into the
//! numerics.

/// 64-bit linear congruential generator.
pub struct Lcg(u64);

impl Lcg {
    /// Seed used by the eigensolver; recorded in experiment manifests.
    pub const DEFAULT_SEED: u64 = 0x5DEECE66D;

    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform in [0, 1) from the high 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
