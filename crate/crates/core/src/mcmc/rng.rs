//! Counter-addressed uniform streams.
//!
//! Every uniform a chain ever consumes has a fixed draw index: sweep `s`
//! consumes draws `s N^2 .. (s + 1) N^2`, black sites first in row-major order,
//! then white sites. A row of one color can therefore seek straight to its
//! first draw, which makes parallel updates reproducible bit for bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform_from_bits(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone)]
pub(crate) struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub(crate) fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Positions the stream so that the next uniform is draw number `draw`.
    #[inline]
    pub(crate) fn seek(&mut self, draw: u64) {
        let word = 2 * draw as u128;
        if self.rng.get_word_pos() != word {
            self.rng.set_word_pos(word);
        }
    }

    /// An independent cursor positioned at draw `draw`.
    #[inline]
    pub(crate) fn fork_at(&self, draw: u64) -> Self {
        let mut other = self.clone();
        other.seek(draw);
        other
    }

    #[inline]
    pub(crate) fn next_uniform(&mut self) -> f64 {
        uniform_from_bits(self.rng.next_u64())
    }
}

/// Draw offsets of each row within a sweep, per color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    n: usize,
    row_start: [Vec<u64>; 2],
}

impl Layout {
    pub(crate) fn new(n: usize) -> Self {
        let per_row =
            |r: usize, color: usize| (0..n).filter(|c| (r + c) % 2 == color).count() as u64;
        let black: u64 = (0..n).map(|r| per_row(r, 0)).sum();
        let mut row_start = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for (color, starts) in row_start.iter_mut().enumerate() {
            let mut acc = if color == 0 { 0 } else { black };
            for r in 0..n {
                starts.push(acc);
                acc += per_row(r, color);
            }
        }
        Self { n, row_start }
    }

    pub(crate) fn sites(&self) -> u64 {
        (self.n * self.n) as u64
    }

    /// Draw index of the first site of `color` in row `r` during sweep `sweep`.
    #[inline]
    pub(crate) fn row_draw(&self, sweep: u64, color: usize, r: usize) -> u64 {
        sweep * self.sites() + self.row_start[color][r]
    }
}
