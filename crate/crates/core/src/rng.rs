//! Reproducible random streams.
//!
//! Every Monte-Carlo loop is cut into fixed-size chunks. Chunk `c` draws from
//! ChaCha8 seeded with the user seed on stream `c`, so results depend only on
//! the seed and the sample count, never on how many threads run the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Range;

/// Samples per chunk.
pub const CHUNK: usize = 256;

pub type Rng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `f` over `samples` indices in chunks of [`CHUNK`], in parallel, and
/// returns the per-chunk results in chunk order.
pub fn chunked<T, F>(samples: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, Range<usize>) -> T + Sync,
{
    let n_chunks = samples.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            f(&mut rng, lo..hi)
        })
        .collect()
}
