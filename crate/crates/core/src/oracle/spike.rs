//! Summing out a negative excursion at a site whose four neighbors sit at
//! nonnegative heights.

use serde::Serialize;

use crate::lattice::critical_h;
use crate::numeric::NeumaierSum;

/// Both sides of an identity, evaluated independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentitySides {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentitySides {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative_error(&self) -> f64 {
        self.discrepancy() / self.rhs.abs()
    }
}

/// Evaluates `sum_{k <= 0} exp(-beta sum_i |x_i - k|)` and
/// `exp(h_w - beta sum_i x_i)`.
///
/// The left side sums the terms `k = 0, -1, ..., -max(x)` one by one and adds
/// the remaining geometric tail in closed form. The right side only uses the
/// wetting threshold.
pub fn verify_spike_identity(x: [u32; 4], beta: f64) -> IdentitySides {
    let reach = x.iter().copied().max().unwrap_or(0) as i64;
    let mut finite = NeumaierSum::new();
    for k in (-reach..=0).rev() {
        let dist: i64 = x.iter().map(|&xi| (xi as i64 - k).abs()).sum();
        finite.add((-beta * dist as f64).exp());
    }
    let sum_x: i64 = x.iter().map(|&xi| xi as i64).sum();
    // for k < -reach every |x_i - k| = x_i - k, so the tail is geometric with ratio e^{-4 beta}
    let ratio = (-4.0 * beta).exp();
    let tail = (-beta * (sum_x + 4 * reach) as f64).exp() * ratio / -(-4.0 * beta).exp_m1();
    finite.add(tail);
    IdentitySides {
        lhs: finite.value(),
        rhs: (critical_h(beta) - beta * sum_x as f64).exp(),
    }
}
