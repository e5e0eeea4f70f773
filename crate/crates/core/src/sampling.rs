//! Seeded, thread-count independent random streams.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conformal::SquarePoint;

/// Work items per random stream; results never depend on the thread count.
pub const CHUNK: usize = 512;

/// Independent generator for chunk `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point of `[-1+margin, 1-margin]²`.
pub fn interior_point<R: Rng>(rng: &mut R, margin: f64) -> SquarePoint {
    let lim = 1.0 - margin;
    SquarePoint::clamped(Complex64::new(rng.random_range(-lim..=lim), rng.random_range(-lim..=lim)))
}

/// Number of chunks covering `n` items.
pub fn chunks(n: usize) -> usize {
    n.div_ceil(CHUNK)
}

/// Item range of chunk `c` out of `n` items.
pub fn chunk_range(c: usize, n: usize) -> std::ops::Range<usize> {
    c * CHUNK..((c + 1) * CHUNK).min(n)
}
