//! Seeded substreams. Every parallel work unit draws from its own stream
//! derived from `(master seed, stream index)`, so sequential and parallel
//! runs consume identical random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Master seed from which all substreams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn substream(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(index);
        rng
    }

    /// Stream for block `block` of work group `group`.
    pub fn block(&self, group: u32, block: u32) -> StreamRng {
        self.substream((u64::from(group) << 32) | u64::from(block))
    }
}

/// Whether block-parallel loops run on the rayon pool or inline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// Rounds per RNG block.
pub const BLOCK_ROUNDS: usize = 1 << 14;

/// Splits `total` rounds into `(block index, start, len)` triples.
pub(crate) fn blocks(total: usize) -> Vec<(u32, usize, usize)> {
    (0..total.div_ceil(BLOCK_ROUNDS))
        .map(|b| {
            let start = b * BLOCK_ROUNDS;
            (b as u32, start, BLOCK_ROUNDS.min(total - start))
        })
        .collect()
}

/// Runs `f` over each block and concatenates results in block order.
pub(crate) fn map_blocks<T, F>(total: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32, usize, usize) -> Vec<T> + Sync,
{
    use rayon::prelude::*;
    let bs = blocks(total);
    let parts: Vec<Vec<T>> = match exec {
        Execution::Sequential => bs.iter().map(|&(b, s, n)| f(b, s, n)).collect(),
        Execution::Parallel => bs.par_iter().map(|&(b, s, n)| f(b, s, n)).collect(),
    };
    parts.into_iter().flatten().collect()
}
