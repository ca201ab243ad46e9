//! Shared fixtures for the benchmarks.

use sos_core::mcmc::{default_cap, ChainState};
use sos_core::Parameters;

pub const SEED: u64 = 0x5eed;

/// Subcritical parameters at `beta = 1`, `h = h_w / 2`.
pub fn params(n: usize) -> Parameters {
    let p = Parameters::critical(1.0, n).expect("valid parameters");
    p.with_h(p.h_w() / 2.0).expect("valid reward")
}

/// A chain run for a short burn-in so the benchmark measures typical states.
pub fn warm_chain(n: usize, parallel_threshold: usize) -> ChainState {
    let p = params(n);
    let mut chain = ChainState::new(&p, default_cap(p.beta(), n), SEED).expect("valid chain");
    chain.set_parallel_threshold(parallel_threshold);
    chain.sweep_many(50);
    chain
}
