use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("pinning h = {h} is not below the wetting threshold h_w = {h_w}")]
    AboveCritical { h: f64, h_w: f64 },

    #[error("operation requires h = h_w = {h_w}, got h = {h}")]
    NotCritical { h: f64, h_w: f64 },

    #[error("enumeration of {states} states exceeds the budget of {budget}")]
    BudgetExceeded { states: f64, budget: u64 },

    #[error("lattice side mismatch: space has N = {space}, parameters have N = {params}")]
    SideMismatch { space: usize, params: usize },

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error(
        "coupled chains out of order at site ({}, {}): low-h height {low_h_height} with neighbors \
         {low_h_neighbors:?}, high-h height {high_h_height} with neighbors {high_h_neighbors:?}, \
         h1 = {h1}, h2 = {h2}",
        site.0, site.1
    )]
    OrderingViolation {
        site: (usize, usize),
        low_h_height: u32,
        high_h_height: u32,
        low_h_neighbors: [u32; 4],
        high_h_neighbors: [u32; 4],
        h1: f64,
        h2: f64,
    },
}
