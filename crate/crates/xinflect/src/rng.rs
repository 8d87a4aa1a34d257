//! Deterministic pseudo-random number generation.
//!
//! Data splits and training shuffles must be reproducible from a seed across
//! implementations, so the generator and the shuffle are pinned here rather
//! than delegated to a library whose stream might change between versions:
//!
//! * Generator: SplitMix64 (Steele, Lea & Flood 2014). State update
//!   `s += 0x9E3779B97F4A7C15`, output mixing
//!   `z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`,
//!   all arithmetic modulo 2^64. The seed is used as the initial state.
//! * Bounded draw: `next_u64() % n` (modulo bias is irrelevant at the sizes
//!   used here and keeps the stream trivially portable).
//! * Shuffle: Fisher–Yates, `for i in (1..n).rev() { swap(i, next_below(i+1)) }`.

/// SplitMix64 generator. See the module docs for the exact stream definition.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw in `0..n`. Panics if `n == 0`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        self.next_u64() % n
    }

    /// Draw an `f64` in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher–Yates shuffle with the pinned draw order.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
