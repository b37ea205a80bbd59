//! Reproducible per-path RNG substreams.
//!
//! Streams are derived counter-style from `(master seed, path index, lane)`,
//! so ensembles are order-independent: any path can be regenerated in
//! isolation and parallel execution cannot change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent uses of randomness within one path index.
#[derive(Debug, Clone, Copy)]
pub enum Lane {
    /// Driving noise of the base process.
    Base = 0,
    /// Brownian perturbation, disjoint from the base stream.
    Perturbation = 1,
    /// Side oracles (reference Monte Carlo draws).
    Oracle = 2,
}

const LANES: u64 = 8;

/// Substream for `(master_seed, path_index, lane)`.
pub fn substream(master_seed: u64, path_index: u64, lane: Lane) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index * LANES + lane as u64);
    rng
}
