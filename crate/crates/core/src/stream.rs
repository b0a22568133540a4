//! Seeded, splittable random streams and the fixed-block parallel driver that
//! keeps Monte-Carlo results independent of the worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per block. Changing it changes every stochastic result.
pub const BLOCK_SIZE: usize = 4096;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SANTALO_LAB_THREADS";

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A ChaCha8 stream keyed by `seed` and selected by `stream_id`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    position: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_mut(8) {
            state = splitmix(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, position: 0, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// A child stream; the same `(seed, stream_id, child)` always gives the same child.
    pub fn substream(&self, child: u64) -> RandomStream {
        let id = splitmix(splitmix(self.stream_id ^ 0x5851_f42d_4c95_7f2d).wrapping_add(child));
        RandomStream::new(self.seed, id)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.position += 1;
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.position += 2;
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.position += dst.len().div_ceil(4) as u64;
        self.rng.fill_bytes(dst)
    }
}

/// Runs `work(stream, block_len)` once per block of [`BLOCK_SIZE`] samples,
/// each on its own substream, and returns the results in block order.
pub fn run_blocks<T, F>(stream: &RandomStream, samples: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomStream, usize) -> T + Sync,
{
    let blocks = samples.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|i| {
            let len = BLOCK_SIZE.min(samples - i * BLOCK_SIZE);
            let mut sub = stream.substream(i as u64);
            work(&mut sub, len)
        })
        .collect()
}

/// Sizes the global worker pool from [`THREADS_ENV`] if set. Returns the
/// requested count, or `None` when unset or already configured.
pub fn configure_threads_from_env() -> Option<usize> {
    let n: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
    if n == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok()?;
    Some(n)
}
