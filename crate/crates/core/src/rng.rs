//! Counter-based random bits.
//!
//! A draw is a pure function of `(seed, sample, stream)`: no generator state
//! is carried between samples, so any partition of the sample range across
//! workers reproduces the same values.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed counter generator for a single sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleStream {
    key: u64,
}

impl SampleStream {
    /// Stream for `sample` under `seed`.
    #[inline]
    pub fn new(seed: u64, sample: u64) -> Self {
        let k = mix64(seed ^ 0x5851_f42d_4c95_7f2d);
        Self {
            key: mix64(k.wrapping_add(sample.wrapping_mul(GOLDEN))),
        }
    }

    /// Uniform 64-bit word for counter `index`.
    #[inline]
    pub fn word(&self, index: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }
}
