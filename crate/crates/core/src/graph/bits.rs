//! Word-level bit utilities shared by the graph types.

use rand::RngCore;

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Mask of the valid bits in the last word of an `n`-bit row.
#[inline]
pub(crate) fn tail_mask(n: usize) -> u64 {
    match n % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Bits `[lo, 64)` of a word.
#[inline]
pub(crate) fn mask_from(lo: usize) -> u64 {
    if lo >= WORD {
        0
    } else {
        u64::MAX << lo
    }
}

/// Transposes a 64x64 bit block in place. Bit `j` of `a[i]` is entry `(i, j)`.
pub(crate) fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32usize;
    let mut m: u64 = 0x0000_0000_ffff_ffff;
    while j != 0 {
        let mut k = 0usize;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k] ^= t << j;
            a[k + j] ^= t;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

const BERNOULLI_BITS: u32 = 53;

/// Generates 64 independent Bernoulli(p) lanes per call.
///
/// `p` is quantized to a multiple of 2^-53. Each lane is built by folding
/// random words from the least to the most significant bit of that fixed-point
/// value, so lane probabilities are exact for the quantized `p`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BernoulliWords {
    fixed: u64,
    low_bit: u32,
    all: bool,
}

impl BernoulliWords {
    pub(crate) fn new(p: f64) -> Self {
        if p >= 1.0 {
            return Self {
                fixed: 0,
                low_bit: 0,
                all: true,
            };
        }
        let fixed = (p * (1u64 << BERNOULLI_BITS) as f64).round() as u64;
        if fixed >= 1u64 << BERNOULLI_BITS {
            return Self {
                fixed: 0,
                low_bit: 0,
                all: true,
            };
        }
        Self {
            fixed,
            low_bit: if fixed == 0 { 0 } else { fixed.trailing_zeros() },
            all: false,
        }
    }

    #[inline]
    pub(crate) fn next<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.all {
            return u64::MAX;
        }
        if self.fixed == 0 {
            return 0;
        }
        let mut acc = 0u64;
        for b in self.low_bit..BERNOULLI_BITS {
            let r = rng.next_u64();
            acc = if (self.fixed >> b) & 1 == 1 {
                acc | r
            } else {
                acc & r
            };
        }
        acc
    }
}
