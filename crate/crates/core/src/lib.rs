//! Solid-on-solid surface above a hard wall with a pinning reward.
//!
//! The crate is split into four layers:
//!
//! * [`lattice`]: heights on the `N x N` box with zero boundary condition,
//!   the energy functional, Gibbs weights and the closed-form parameter maps
//!   (wetting threshold, typical heights).
//! * [`oracle`]: exhaustive enumeration on tiny capped lattices together with
//!   closed-form checks for the identities and counting inequalities that the
//!   sampler results are compared against.
//! * [`mcmc`]: checkerboard heat-bath dynamics with counter-based random
//!   streams, monotone coupled chains and explicit small-lattice kernels.
//! * [`observables`]: level-set counters, zero classification counts and
//!   batch-means error bars.

pub mod error;
pub mod lattice;
pub mod mcmc;
pub mod numeric;
pub mod observables;
pub mod oracle;

pub use error::{Error, Result};
pub use lattice::{
    classify_zeros, critical_h, hamiltonian, kappa, level_census, log_weight, typical_heights,
    Field, LevelCensus, Parameters, SignedField, Site, TypicalHeights, ZeroClassification,
};
pub use mcmc::{ChainState, CoupledPair, RunSpec};
pub use observables::{BatchSummary, ObservableSeries};
pub use oracle::CappedSpace;
