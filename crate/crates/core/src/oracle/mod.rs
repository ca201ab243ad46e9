//! Exhaustive enumeration on tiny capped lattices and closed-form checks.
//!
//! Enumeration walks states in a fixed mixed-radix order and splits the index
//! range into fixed-size chunks. Chunks run in parallel but their compensated
//! partial sums are merged in index order, so results do not depend on the
//! thread count.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{log_weight, Field, Parameters};
use crate::numeric::NeumaierSum;

pub mod lifting;
pub mod patterns;
pub mod report;
pub mod signed;
pub mod spike;

pub use lifting::{
    check_level_lift_injectivity, check_signed_lift_injectivity, check_zero_lift_injectivity,
    lift_level, lift_signed, lift_zeros, random_lifting_cases, verify_lifting_inequalities,
    InjectivityReport, LiftingCase, LiftingReport,
};
pub use patterns::{
    pattern_common_bound, pattern_lhs, pattern_reference, PatternGraph, PatternReference,
};
pub use report::VerificationRecord;
pub use signed::{
    enumerate_signed_space, predicted_truncated_marginal, verify_marginalization,
    MarginalizationReport, SignedEnsemble,
};
pub use spike::{verify_spike_identity, IdentitySides};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const DEFAULT_CAP: u32 = 3;
const CHUNK: u64 = 1 << 14;

/// The capped state space `{0..=cap}^(N x N)`, optionally extended down to
/// `-depth` for the signed space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CappedSpace {
    n: usize,
    cap: u32,
    depth: u32,
    budget: u64,
}

impl CappedSpace {
    pub fn new(n: usize, cap: u32) -> Result<Self> {
        Self::with_budget(n, cap, 0, DEFAULT_BUDGET)
    }

    /// Space used for signed enumeration, heights in `-depth..=cap`.
    pub fn signed(n: usize, cap: u32, depth: u32) -> Result<Self> {
        Self::with_budget(n, cap, depth, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: usize, cap: u32, depth: u32, budget: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        let states = ((cap as f64) + (depth as f64) + 1.0).powi((n * n) as i32);
        if states > budget as f64 {
            return Err(Error::BudgetExceeded { states, budget });
        }
        Ok(Self {
            n,
            cap,
            depth,
            budget,
        })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Number of nonnegative capped fields, `(cap + 1)^(N^2)`.
    pub fn size(&self) -> u64 {
        (self.cap as u64 + 1).pow((self.n * self.n) as u32)
    }

    /// Number of candidate signed fields before the isolation filter.
    pub fn signed_candidates(&self) -> u64 {
        (self.cap as u64 + self.depth as u64 + 1).pow((self.n * self.n) as u32)
    }

    pub(crate) fn check_params(&self, params: &Parameters) -> Result<()> {
        if params.n() != self.n {
            return Err(Error::SideMismatch {
                space: self.n,
                params: params.n(),
            });
        }
        Ok(())
    }

    /// The field with the given enumeration index (site 0 is the least
    /// significant digit).
    pub fn field_at(&self, mut index: u64) -> Field {
        let radix = self.cap as u64 + 1;
        let heights = (0..self.n * self.n)
            .map(|_| {
                let d = index % radix;
                index /= radix;
                d as u32
            })
            .collect();
        Field::from_heights(self.n, heights).expect("side is positive")
    }

    /// Enumeration index of a field, or `None` if it does not belong to the space.
    pub fn index_of(&self, field: &Field) -> Option<u64> {
        if field.side() != self.n || field.max_height() > self.cap {
            return None;
        }
        let radix = self.cap as u64 + 1;
        Some(
            field
                .heights()
                .iter()
                .rev()
                .fold(0, |acc, &h| acc * radix + h as u64),
        )
    }

    /// All fields of the space in index order.
    pub fn fields(&self) -> impl Iterator<Item = Field> + '_ {
        (0..self.size()).map(move |i| self.field_at(i))
    }

    /// Visits the fields with indices in `range`, reusing one buffer.
    pub(crate) fn for_each_in(&self, range: Range<u64>, mut f: impl FnMut(u64, &Field)) {
        if range.is_empty() {
            return;
        }
        let mut field = self.field_at(range.start);
        for index in range {
            f(index, &field);
            // odometer increment
            for h in field.heights_mut() {
                if *h < self.cap {
                    *h += 1;
                    break;
                }
                *h = 0;
            }
        }
    }

    /// Applies `f` to consecutive fixed-size index chunks, in parallel, and
    /// returns the results in chunk order.
    pub(crate) fn map_chunks<T, F>(&self, total: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync,
    {
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|i| f(i * CHUNK..((i + 1) * CHUNK).min(total)))
            .collect()
    }

    /// Compensated sums of `weight(phi)` and `weight(phi) * g(phi)` over the space.
    fn weighted_sums<G>(&self, params: &Parameters, g: G) -> (f64, f64)
    where
        G: Fn(&Field) -> f64 + Sync,
    {
        let partials = self.map_chunks(self.size(), |range| {
            let mut z = NeumaierSum::new();
            let mut gz = NeumaierSum::new();
            self.for_each_in(range, |_, field| {
                let w = log_weight(field, params).exp();
                z.add(w);
                gz.add(w * g(field));
            });
            (z, gz)
        });
        let mut z = NeumaierSum::new();
        let mut gz = NeumaierSum::new();
        for (a, b) in &partials {
            z.merge(a);
            gz.merge(b);
        }
        (z.value(), gz.value())
    }
}

/// `Z = sum_phi exp(log_weight(phi))` over the capped space.
pub fn enumerate_partition_function(space: &CappedSpace, params: &Parameters) -> Result<f64> {
    space.check_params(params)?;
    Ok(space.weighted_sums(params, |_| 0.0).0)
}

/// `e^{h N^2} ((1 + e^{-2 beta}) / (1 - e^{-2 beta}))^{N^2}`, an upper bound
/// on the uncapped partition function.
pub fn partition_upper_bound(params: &Parameters) -> f64 {
    let sites = (params.n() * params.n()) as f64;
    let q = (-2.0 * params.beta()).exp();
    (params.h() * sites + sites * ((1.0 + q) / (1.0 - q)).ln()).exp()
}

/// Probability of an event under the capped Gibbs measure.
pub fn exact_event_probability<P>(
    space: &CappedSpace,
    params: &Parameters,
    predicate: P,
) -> Result<f64>
where
    P: Fn(&Field) -> bool + Sync,
{
    exact_expectation(space, params, |f| if predicate(f) { 1.0 } else { 0.0 })
}

/// Expectation of a functional under the capped Gibbs measure.
pub fn exact_expectation<G>(space: &CappedSpace, params: &Parameters, functional: G) -> Result<f64>
where
    G: Fn(&Field) -> f64 + Sync,
{
    space.check_params(params)?;
    let (z, gz) = space.weighted_sums(params, functional);
    Ok(gz / z)
}

/// The full capped Gibbs law, indexed like [`CappedSpace::field_at`].
#[derive(Debug, Clone)]
pub struct ExactLaw {
    space: CappedSpace,
    probabilities: Vec<f64>,
    partition_function: f64,
}

impl ExactLaw {
    pub fn new(space: &CappedSpace, params: &Parameters) -> Result<Self> {
        space.check_params(params)?;
        let chunks = space.map_chunks(space.size(), |range| {
            let mut weights = Vec::with_capacity((range.end - range.start) as usize);
            space.for_each_in(range, |_, field| {
                weights.push(log_weight(field, params).exp())
            });
            weights
        });
        let mut weights: Vec<f64> = chunks.into_iter().flatten().collect();
        let z = crate::numeric::compensated_sum(weights.iter().copied());
        weights.iter_mut().for_each(|w| *w /= z);
        Ok(Self {
            space: *space,
            probabilities: weights,
            partition_function: z,
        })
    }

    pub fn space(&self) -> &CappedSpace {
        &self.space
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn partition_function(&self) -> f64 {
        self.partition_function
    }

    pub fn probability(&self, field: &Field) -> f64 {
        self.space
            .index_of(field)
            .map_or(0.0, |i| self.probabilities[i as usize])
    }

    /// Total variation distance to an empirical histogram over state indices.
    pub fn total_variation(&self, counts: &[u64]) -> f64 {
        assert_eq!(
            counts.len(),
            self.probabilities.len(),
            "histogram size mismatch"
        );
        let total: u64 = counts.iter().sum();
        0.5 * self
            .probabilities
            .iter()
            .zip(counts)
            .map(|(&p, &c)| (p - c as f64 / total as f64).abs())
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::critical_h;

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            CappedSpace::with_budget(3, 3, 0, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(CappedSpace::with_budget(2, 3, 0, 256).is_ok());
        assert!(CappedSpace::new(5, 3).is_err());
        assert!(CappedSpace::signed(2, 2, 50).is_ok());
    }

    #[test]
    fn index_round_trip() {
        let space = CappedSpace::new(2, 2).unwrap();
        for (i, f) in space.fields().enumerate() {
            assert_eq!(space.index_of(&f), Some(i as u64));
        }
        assert_eq!(space.index_of(&Field::constant(2, 3)), None);
        let mut seen = Vec::new();
        space.for_each_in(0..space.size(), |i, f| {
            assert_eq!(*f, space.field_at(i));
            seen.push(i);
        });
        assert_eq!(seen.len(), 81);
    }

    #[test]
    fn single_site_partition_functions() {
        let p = Parameters::new(1.0, 0.5, 1).unwrap();
        let z = enumerate_partition_function(&CappedSpace::new(1, 2).unwrap(), &p).unwrap();
        let expected = 0.5f64.exp() + (-4f64).exp() + (-8f64).exp();
        assert!((z - expected).abs() <= 1e-14 * expected);

        let z0 = enumerate_partition_function(&CappedSpace::new(1, 0).unwrap(), &p).unwrap();
        assert!((z0 - 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn side_mismatch_is_rejected() {
        let p = Parameters::new(1.0, 0.0, 3).unwrap();
        assert!(matches!(
            enumerate_partition_function(&CappedSpace::new(2, 1).unwrap(), &p),
            Err(Error::SideMismatch { .. })
        ));
    }

    #[test]
    fn partition_function_below_upper_bound() {
        for (n, cap) in [(1, 6), (2, 1), (2, 2), (2, 4), (3, 1), (3, 2)] {
            for beta in [0.5, 1.0, 2.0] {
                for h in [0.0, critical_h(beta), 0.3, 1.0] {
                    let p = Parameters::new(beta, h, n).unwrap();
                    let z = enumerate_partition_function(&CappedSpace::new(n, cap).unwrap(), &p)
                        .unwrap();
                    assert!(
                        z <= partition_upper_bound(&p),
                        "n={n} cap={cap} beta={beta} h={h}"
                    );
                }
            }
        }
    }

    #[test]
    fn event_probabilities() {
        let space = CappedSpace::new(2, 1).unwrap();
        let p = Parameters::new(1.0, 0.0, 2).unwrap();
        assert!((exact_event_probability(&space, &p, |_| true).unwrap() - 1.0).abs() < 1e-15);

        // 16 states by hand: the flat zero field has weight 1
        let z: f64 = space.fields().map(|f| log_weight(&f, &p).exp()).sum();
        let p0 = exact_event_probability(&space, &p, |f| f.max_height() == 0).unwrap();
        assert!((p0 - 1.0 / z).abs() < 1e-14);

        let event = |f: &Field| f.zero_count() >= 2;
        let a = exact_event_probability(&space, &p, event).unwrap();
        let b = exact_event_probability(&space, &p, |f| !event(f)).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectations() {
        let space = CappedSpace::new(2, 2).unwrap();
        let p = Parameters::new(1.0, 0.0, 2).unwrap();
        assert!((exact_expectation(&space, &p, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);

        let f = |x: &Field| x.zero_count() as f64;
        let g = |x: &Field| crate::lattice::hamiltonian(x) as f64;
        let sum = exact_expectation(&space, &p, |x| f(x) + g(x)).unwrap();
        let parts =
            exact_expectation(&space, &p, f).unwrap() + exact_expectation(&space, &p, g).unwrap();
        assert!((sum - parts).abs() < 1e-12);

        let zeros_at = |h| {
            let p = Parameters::new(1.0, h, 2).unwrap();
            exact_expectation(&space, &p, |x| x.zero_count() as f64).unwrap()
        };
        assert!(zeros_at(0.5 * critical_h(1.0)) >= zeros_at(0.0));
    }

    #[test]
    fn exact_law_is_normalized_and_matches_probabilities() {
        let space = CappedSpace::new(2, 2).unwrap();
        let p = Parameters::new(1.0, 0.3, 2).unwrap();
        let law = ExactLaw::new(&space, &p).unwrap();
        let total: f64 = law.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        let flat = Field::constant(2, 1);
        let direct = exact_event_probability(&space, &p, |f| *f == flat).unwrap();
        assert!((law.probability(&flat) - direct).abs() < 1e-15);
    }
}
