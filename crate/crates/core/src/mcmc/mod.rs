//! Heat-bath dynamics for the capped pinned measure.
//!
//! Sweeps visit all sites with `r + c` even, then all sites with `r + c` odd.
//! Each site is redrawn from its exact conditional law by inverse CDF with a
//! single uniform, which is what makes the coupling in [`coupled`] monotone.

pub mod chain;
pub mod conditional;
pub mod coupled;
pub mod kernel;
pub mod rng;

pub use chain::{
    collect_chain, default_cap, heat_bath_sweep, run_chain, ChainState, InitialCondition,
    RunMetadata, RunSpec, DEFAULT_PARALLEL_THRESHOLD,
};
pub use conditional::{conditional_distribution, ConditionalTable, SiteConditional};
pub use coupled::{coupled_sweep, holley_check, CoupledPair, HolleyReport, HolleyViolation};
pub use kernel::{
    detailed_balance_defect, half_sweep_kernel, row_sum_defect, stationarity_defect, sweep_kernel,
    MAX_KERNEL_STATES,
};
pub use rng::uniform_from_bits;
