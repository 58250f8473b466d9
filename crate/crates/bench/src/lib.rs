//! Fixed inputs shared by the benchmarks.

use steinpc_core::{generate, DataMatrix, ScoreDist, SpikedModelSpec};

pub const BENCH_SEED: u64 = 0xbe9c;

/// Data from the default model (`mu = sigma = delta = 1`) at the given shape.
pub fn spiked_data(p: usize, n: usize) -> DataMatrix {
    let spec = SpikedModelSpec {
        p,
        n,
        mu: 1.0,
        sigma: 1.0,
        delta: 1.0,
        score_dist: ScoreDist::Gaussian,
        seed: BENCH_SEED,
    };
    generate(&spec).expect("bench spec is valid").0
}
