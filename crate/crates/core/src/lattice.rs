//! Height functions on the `N x N` box, the solid-on-solid energy and the
//! closed-form parameter maps.
//!
//! Sites are addressed as `(row, col)` with `0 <= row, col < N` and stored in
//! row-major order. Every site outside the box has height zero and is never
//! stored.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(row, col)`, zero based.
pub type Site = (usize, usize);

/// Model parameters: inverse temperature, pinning reward, box side and the
/// slack `delta` entering [`kappa`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    beta: f64,
    h: f64,
    n: usize,
    delta: f64,
}

impl Parameters {
    pub const DEFAULT_DELTA: f64 = 1.0;

    pub fn new(beta: f64, h: f64, n: usize) -> Result<Self> {
        Self::with_delta(beta, h, n, Self::DEFAULT_DELTA)
    }

    pub fn with_delta(beta: f64, h: f64, n: usize, delta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "h must be nonnegative, got {h}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Ok(Self { beta, h, n, delta })
    }

    /// Parameters at the wetting threshold `h = h_w(beta)`.
    pub fn critical(beta: f64, n: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Self::new(beta, critical_h(beta), n)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::with_delta(self.beta, h, self.n, self.delta)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::with_delta(self.beta, self.h, n, self.delta)
    }

    /// `h_w(beta)` for these parameters.
    pub fn h_w(&self) -> f64 {
        critical_h(self.beta)
    }

    /// True when `h` equals `h_w(beta)` up to rounding.
    pub fn is_critical(&self) -> bool {
        let h_w = self.h_w();
        (self.h - h_w).abs() <= 1e-12 * h_w.max(1e-300)
    }
}

/// Integer heights that the energy functional can be evaluated on.
pub(crate) trait Height: Copy + Eq {
    fn level(self) -> i64;
}

impl Height for u32 {
    #[inline]
    fn level(self) -> i64 {
        self as i64
    }
}

impl Height for i32 {
    #[inline]
    fn level(self) -> i64 {
        self as i64
    }
}

/// In-box lattice neighbors of the site stored at `idx`.
pub(crate) fn box_neighbors(n: usize, idx: usize) -> impl Iterator<Item = usize> {
    let (r, c) = (idx / n, idx % n);
    let up = (r > 0).then(|| idx - n);
    let down = (r + 1 < n).then(|| idx + n);
    let left = (c > 0).then(|| idx - 1);
    let right = (c + 1 < n).then(|| idx + 1);
    [up, down, left, right].into_iter().flatten()
}

/// Sum of `|phi(x) - phi(y)|` over in-box edges plus `|phi(x)|` for every
/// (site, external neighbor) pair.
pub(crate) fn energy<T: Height>(n: usize, heights: &[T]) -> u64 {
    let mut total: u64 = 0;
    for r in 0..n {
        for c in 0..n {
            let v = heights[r * n + c].level();
            // right and down edges, with the external zero past the last column/row
            let right = if c + 1 < n {
                heights[r * n + c + 1].level()
            } else {
                0
            };
            let down = if r + 1 < n {
                heights[(r + 1) * n + c].level()
            } else {
                0
            };
            total += (v - right).unsigned_abs() + (v - down).unsigned_abs();
            if c == 0 {
                total += v.unsigned_abs();
            }
            if r == 0 {
                total += v.unsigned_abs();
            }
        }
    }
    total
}

/// Splits the zero sites into isolated and non-isolated ones, looking only at
/// in-box neighbors.
pub(crate) fn split_zeros<T: Height>(n: usize, heights: &[T], zero: T) -> (Vec<usize>, Vec<usize>) {
    let mut isolated = Vec::new();
    let mut non_isolated = Vec::new();
    for (idx, &v) in heights.iter().enumerate() {
        if v != zero {
            continue;
        }
        if box_neighbors(n, idx).any(|j| heights[j] == zero) {
            non_isolated.push(idx);
        } else {
            isolated.push(idx);
        }
    }
    (isolated, non_isolated)
}

/// A nonnegative height function on the box.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Field {
    n: usize,
    heights: Vec<u32>,
}

impl Field {
    /// The flat field at height zero.
    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0)
    }

    pub fn constant(n: usize, height: u32) -> Self {
        assert!(n > 0, "lattice side must be positive");
        Self {
            n,
            heights: vec![height; n * n],
        }
    }

    /// Builds a field from row-major heights.
    pub fn from_heights(n: usize, heights: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidField("lattice side must be positive".into()));
        }
        if heights.len() != n * n {
            return Err(Error::InvalidField(format!(
                "expected {} heights for N = {n}, got {}",
                n * n,
                heights.len()
            )));
        }
        Ok(Self { n, heights })
    }

    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut heights = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidField(format!(
                    "row of length {} in a {n} x {n} field",
                    row.len()
                )));
            }
            heights.extend_from_slice(row);
        }
        Self::from_heights(n, heights)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// Number of sites, `N^2`.
    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn heights_mut(&mut self) -> &mut [u32] {
        &mut self.heights
    }

    pub fn get(&self, (r, c): Site) -> u32 {
        self.heights[r * self.n + c]
    }

    pub fn set(&mut self, (r, c): Site, height: u32) {
        self.heights[r * self.n + c] = height;
    }

    /// Height at a possibly out-of-box position; the boundary reads as zero.
    pub fn get_or_zero(&self, r: isize, c: isize) -> u32 {
        let n = self.n as isize;
        if (0..n).contains(&r) && (0..n).contains(&c) {
            self.heights[(r * n + c) as usize]
        } else {
            0
        }
    }

    pub fn site_of(&self, idx: usize) -> Site {
        (idx / self.n, idx % self.n)
    }

    pub fn index_of(&self, (r, c): Site) -> usize {
        r * self.n + c
    }

    /// The four lattice neighbors of a site (up, down, left, right) with the
    /// zero boundary filled in.
    pub fn neighbor_heights(&self, (r, c): Site) -> [u32; 4] {
        let (r, c) = (r as isize, c as isize);
        [
            self.get_or_zero(r - 1, c),
            self.get_or_zero(r + 1, c),
            self.get_or_zero(r, c - 1),
            self.get_or_zero(r, c + 1),
        ]
    }

    pub fn max_height(&self) -> u32 {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    pub fn zero_count(&self) -> usize {
        self.heights.iter().filter(|&&v| v == 0).count()
    }

    /// Pointwise `self <= other`.
    pub fn is_below(&self, other: &Field) -> bool {
        self.n == other.n && self.heights.iter().zip(&other.heights).all(|(a, b)| a <= b)
    }

    pub fn to_signed(&self) -> SignedField {
        SignedField {
            n: self.n,
            heights: self.heights.iter().map(|&v| v as i32).collect(),
        }
    }
}

/// A field allowed to dip below zero at sites whose in-box neighbors are all
/// at height one or more.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedField {
    n: usize,
    heights: Vec<i32>,
}

impl SignedField {
    pub fn from_heights(n: usize, heights: Vec<i32>) -> Result<Self> {
        if n == 0 || heights.len() != n * n {
            return Err(Error::InvalidField(format!(
                "expected {} heights for N = {n}, got {}",
                n * n,
                heights.len()
            )));
        }
        if let Some(idx) = first_isolation_violation(n, &heights) {
            return Err(Error::InvalidField(format!(
                "negative height at site ({}, {}) has an in-box neighbor below 1",
                idx / n,
                idx % n
            )));
        }
        Ok(Self { n, heights })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn heights(&self) -> &[i32] {
        &self.heights
    }

    pub fn get(&self, (r, c): Site) -> i32 {
        self.heights[r * self.n + c]
    }

    /// `max(psi, 0)`.
    pub fn positive_part(&self) -> Field {
        Field {
            n: self.n,
            heights: self.heights.iter().map(|&v| v.max(0) as u32).collect(),
        }
    }

    /// The energy functional extended verbatim to signed heights.
    pub fn hamiltonian(&self) -> u64 {
        energy(self.n, &self.heights)
    }

    /// Zero sites with an in-box zero neighbor.
    pub fn non_isolated_zero_count(&self) -> usize {
        split_zeros(self.n, &self.heights, 0).1.len()
    }

    pub fn classify_zeros(&self) -> ZeroClassification {
        ZeroClassification::from_indices(self.n, split_zeros(self.n, &self.heights, 0))
    }
}

/// Index of the first negative site with an in-box neighbor below one.
pub(crate) fn first_isolation_violation(n: usize, heights: &[i32]) -> Option<usize> {
    heights
        .iter()
        .enumerate()
        .find(|&(idx, &v)| v <= -1 && box_neighbors(n, idx).any(|j| heights[j] < 1))
        .map(|(idx, _)| idx)
}

/// Number of sites at each height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCensus {
    counts: BTreeMap<u32, usize>,
    total: usize,
}

impl LevelCensus {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u32, usize> {
        &self.counts
    }

    pub fn count(&self, height: u32) -> usize {
        self.counts.get(&height).copied().unwrap_or(0)
    }

    /// `|phi^{-1}([lo, hi])|`; empty when `hi < lo` or the range lies below zero.
    pub fn count_between(&self, lo: i64, hi: i64) -> usize {
        let lo = lo.max(0);
        if hi < lo {
            return 0;
        }
        let hi = hi.min(u32::MAX as i64) as u32;
        self.counts.range(lo as u32..=hi).map(|(_, &c)| c).sum()
    }

    /// `|phi^{-1}([level, inf))|`.
    pub fn count_at_least(&self, level: i64) -> usize {
        if level <= 0 {
            return self.total;
        }
        if level > u32::MAX as i64 {
            return 0;
        }
        self.counts.range(level as u32..).map(|(_, &c)| c).sum()
    }

    /// Most frequent height, ties broken toward the larger height.
    pub fn mode(&self) -> u32 {
        let mut best = (0, 0usize);
        for (&height, &count) in &self.counts {
            if count >= best.1 {
                best = (height, count);
            }
        }
        best.0
    }
}

/// Isolated zeros (`q1`) and non-isolated zeros (`q2+`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZeroClassification {
    pub isolated: Vec<Site>,
    pub non_isolated: Vec<Site>,
}

impl ZeroClassification {
    fn from_indices(n: usize, (isolated, non_isolated): (Vec<usize>, Vec<usize>)) -> Self {
        let to_site = |idx: usize| (idx / n, idx % n);
        Self {
            isolated: isolated.into_iter().map(to_site).collect(),
            non_isolated: non_isolated.into_iter().map(to_site).collect(),
        }
    }

    pub fn zero_count(&self) -> usize {
        self.isolated.len() + self.non_isolated.len()
    }
}

/// Typical heights `H` (subcritical) and `H_w` (at the wetting threshold).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypicalHeights {
    pub typical: u32,
    pub critical: u32,
}

pub fn hamiltonian(field: &Field) -> u64 {
    energy(field.n, &field.heights)
}

/// Log of the unnormalized Gibbs weight, `-beta H(phi) + h |phi^{-1}(0)|`.
pub fn log_weight(field: &Field, params: &Parameters) -> f64 {
    -params.beta * hamiltonian(field) as f64 + params.h * field.zero_count() as f64
}

pub fn classify_zeros(field: &Field) -> ZeroClassification {
    ZeroClassification::from_indices(field.n, split_zeros(field.n, &field.heights, 0))
}

pub fn level_census(field: &Field) -> LevelCensus {
    let mut counts = BTreeMap::new();
    for &v in &field.heights {
        *counts.entry(v).or_insert(0) += 1;
    }
    LevelCensus {
        counts,
        total: field.len(),
    }
}

/// Wetting threshold `h_w(beta) = log(e^{4 beta} / (e^{4 beta} - 1))`.
pub fn critical_h(beta: f64) -> f64 {
    -(-(-4.0 * beta).exp()).ln_1p()
}

/// `kappa(beta, h, delta) = (4 beta + delta) / log(e^{-h} + e^{-4 beta})`,
/// defined for `h < h_w(beta)`.
pub fn kappa(params: &Parameters) -> Result<f64> {
    let h_w = params.h_w();
    // log(e^{-h} + e^{-4b}) = log1p(expm1(-h) + e^{-4b}), accurate as h -> h_w
    let denominator = ((-params.h).exp_m1() + (-4.0 * params.beta).exp()).ln_1p();
    if params.h >= h_w || denominator <= 0.0 {
        return Err(Error::AboveCritical { h: params.h, h_w });
    }
    Ok((4.0 * params.beta + params.delta) / denominator)
}

/// `H = floor(log N / (4 beta))` and `H_w = floor(log N / (6 beta))`.
pub fn typical_heights(params: &Parameters) -> TypicalHeights {
    let log_n = (params.n as f64).ln();
    TypicalHeights {
        typical: (log_n / (4.0 * params.beta)).floor() as u32,
        critical: (log_n / (6.0 * params.beta)).floor() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Edge-by-edge recount: every site looks at all four neighbors and each
    /// in-box edge is seen twice.
    fn naive_hamiltonian(field: &Field) -> u64 {
        let n = field.side() as isize;
        let mut twice_internal = 0u64;
        let mut boundary = 0u64;
        for r in 0..n {
            for c in 0..n {
                let v = field.get_or_zero(r, c) as i64;
                for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let (rr, cc) = (r + dr, c + dc);
                    let w = field.get_or_zero(rr, cc) as i64;
                    if (0..n).contains(&rr) && (0..n).contains(&cc) {
                        twice_internal += (v - w).unsigned_abs();
                    } else {
                        boundary += v.unsigned_abs();
                    }
                }
            }
        }
        twice_internal / 2 + boundary
    }

    fn rotate(field: &Field) -> Field {
        let n = field.side();
        let mut out = Field::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.set((c, n - 1 - r), field.get((r, c)));
            }
        }
        out
    }

    fn transpose(field: &Field) -> Field {
        let n = field.side();
        let mut out = Field::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.set((c, r), field.get((r, c)));
            }
        }
        out
    }

    fn arb_field(max_n: usize, max_h: u32) -> impl Strategy<Value = Field> {
        (1..=max_n).prop_flat_map(move |n| {
            prop::collection::vec(0..=max_h, n * n)
                .prop_map(move |hs| Field::from_heights(n, hs).unwrap())
        })
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(&Field::zeros(2)), 0);
        assert_eq!(hamiltonian(&Field::constant(2, 1)), 8);
        assert_eq!(hamiltonian(&Field::constant(1, 3)), 12);
    }

    #[test]
    fn log_weight_examples() {
        let p = Parameters::new(1.0, 0.5, 2).unwrap();
        assert_eq!(log_weight(&Field::zeros(2), &p), 2.0);
        assert_eq!(log_weight(&Field::constant(2, 1), &p), -8.0);
        let p1 = Parameters::new(2.3, 0.7, 1).unwrap();
        assert_eq!(log_weight(&Field::zeros(1), &p1), 0.7);
    }

    #[test]
    fn classify_zeros_examples() {
        let all = classify_zeros(&Field::zeros(2));
        assert!(all.isolated.is_empty());
        assert_eq!(all.non_isolated, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);

        let mut center = Field::constant(3, 1);
        center.set((1, 1), 0);
        let z = classify_zeros(&center);
        assert_eq!(z.isolated, vec![(1, 1)]);
        assert!(z.non_isolated.is_empty());

        let pair = Field::from_rows(&[[0, 0, 1], [1, 1, 1], [1, 1, 1]]).unwrap();
        let z = classify_zeros(&pair);
        assert!(z.isolated.is_empty());
        assert_eq!(z.non_isolated, vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn boundary_zero_ignores_external_neighbors() {
        // corner zero surrounded in-box by positive heights is isolated even
        // though two of its lattice neighbors are external zeros
        let f = Field::from_rows(&[[0, 2], [2, 2]]).unwrap();
        assert_eq!(classify_zeros(&f).isolated, vec![(0, 0)]);
    }

    #[test]
    fn census_examples() {
        let c = level_census(&Field::zeros(2));
        assert_eq!(
            c.counts().iter().map(|(&k, &v)| (k, v)).collect::<Vec<_>>(),
            vec![(0, 4)]
        );
        let c = level_census(&Field::from_rows(&[[0, 1], [1, 2]]).unwrap());
        assert_eq!(
            c.counts().iter().map(|(&k, &v)| (k, v)).collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 1)]
        );
        assert_eq!(c.count_between(1, 2), 3);
        assert_eq!(c.count_between(-5, 0), 1);
        assert_eq!(c.count_between(2, 1), 0);
        assert_eq!(c.count_at_least(2), 1);
        assert_eq!(c.count_at_least(-3), 4);
    }

    #[test]
    fn census_mode_breaks_ties_upward() {
        let c = level_census(&Field::from_rows(&[[2, 3], [3, 2]]).unwrap());
        assert_eq!(c.mode(), 3);
    }

    #[test]
    fn critical_h_values() {
        // log(e^4 / (e^4 - 1)) evaluated directly
        let direct = (4f64.exp() / (4f64.exp() - 1.0)).ln();
        assert!((critical_h(1.0) - direct).abs() < 1e-15);
        assert!((critical_h(1.0) - 0.018_485_447).abs() < 1e-9);
        for beta in [1.0, 1.5, 2.0, 3.0] {
            let lhs = (-critical_h(beta)).exp();
            let rhs = 1.0 - (-4.0 * beta).exp();
            assert!((lhs - rhs).abs() <= 1e-15, "beta = {beta}");
        }
        let mut prev = f64::INFINITY;
        for i in 1..=200 {
            let v = critical_h(0.05 * i as f64);
            assert!(v > 0.0 && v.is_finite() && v < prev);
            prev = v;
        }
        assert!((critical_h(100.0) - (-400f64).exp()).abs() < 1e-190);
    }

    #[test]
    fn kappa_values() {
        let p = Parameters::new(1.0, 0.0, 10).unwrap();
        let k = kappa(&p).unwrap();
        let expected = 5.0 / (1.0 + (-4f64).exp()).ln();
        assert!((k - expected).abs() <= 1e-12 * expected);

        for &(beta, frac, delta) in &[
            (1.0, 0.0, 1.0),
            (1.0, 0.5, 0.3),
            (2.0, 0.9, 2.0),
            (1.3, 0.99, 1.0),
        ] {
            let p = Parameters::with_delta(beta, frac * critical_h(beta), 4, delta).unwrap();
            let k = kappa(&p).unwrap();
            let base = (-p.h()).exp() + (-4.0 * beta).exp();
            let identity = base.powf(k) * (-4.0 * beta).exp();
            assert!(
                (identity - delta.exp()).abs() <= 1e-10 * delta.exp(),
                "{beta} {frac}"
            );
        }

        let mut prev = 0.0;
        for i in 0..50 {
            let p = Parameters::new(1.0, critical_h(1.0) * i as f64 / 50.0, 4).unwrap();
            let k = kappa(&p).unwrap();
            assert!(k > prev);
            prev = k;
        }
        assert!(prev > 1e3);
    }

    #[test]
    fn kappa_rejects_critical_and_above() {
        let p = Parameters::critical(1.0, 4).unwrap();
        assert!(matches!(kappa(&p), Err(Error::AboveCritical { .. })));
        let p = Parameters::new(1.0, 0.5, 4).unwrap();
        assert!(matches!(kappa(&p), Err(Error::AboveCritical { .. })));
    }

    #[test]
    fn typical_height_thresholds() {
        let at = |n| typical_heights(&Parameters::new(1.0, 0.0, n).unwrap());
        assert_eq!(at(54).typical, 0);
        assert_eq!(at(55).typical, 1);
        assert_eq!(
            at(1),
            TypicalHeights {
                typical: 0,
                critical: 0
            }
        );
        for n in 1..5000 {
            let t = at(n);
            assert!(t.critical <= t.typical);
        }
    }

    #[test]
    fn parameters_validation() {
        assert!(Parameters::new(0.0, 0.0, 1).is_err());
        assert!(Parameters::new(1.0, -0.1, 1).is_err());
        assert!(Parameters::new(1.0, 0.0, 0).is_err());
        assert!(Parameters::with_delta(1.0, 0.0, 1, 0.0).is_err());
        assert!(Parameters::critical(1.0, 3).unwrap().is_critical());
    }

    #[test]
    fn signed_field_isolation_constraint() {
        assert!(SignedField::from_heights(2, vec![-1, 1, 1, 3]).is_ok());
        assert!(SignedField::from_heights(2, vec![-1, 0, 1, 3]).is_err());
        assert!(SignedField::from_heights(1, vec![-4]).is_ok());
        let psi = SignedField::from_heights(2, vec![-2, 1, 1, 0]).unwrap();
        assert_eq!(psi.positive_part().heights(), &[0, 1, 1, 0]);
        // (-2 at a corner: two external pairs of 2 plus edges to the 1s of 3 each)
        assert_eq!(psi.hamiltonian(), 2 + 2 + 3 + 3 + 1 + 1 + 1 + 1 + 1 + 1);
    }

    proptest! {
        #[test]
        fn hamiltonian_matches_naive_recount(f in arb_field(4, 6)) {
            prop_assert_eq!(hamiltonian(&f), naive_hamiltonian(&f));
        }

        #[test]
        fn hamiltonian_has_square_symmetry(f in arb_field(5, 6)) {
            let e = hamiltonian(&f);
            let r1 = rotate(&f);
            prop_assert_eq!(hamiltonian(&r1), e);
            prop_assert_eq!(hamiltonian(&rotate(&r1)), e);
            prop_assert_eq!(hamiltonian(&transpose(&f)), e);
        }

        #[test]
        fn zero_partition_matches_census(f in arb_field(5, 2)) {
            let z = classify_zeros(&f);
            let census = level_census(&f);
            prop_assert_eq!(z.isolated.len() + z.non_isolated.len(), census.count(0));
            prop_assert_eq!(census.counts().values().sum::<usize>(), f.len());
            for &s in &z.non_isolated {
                let (r, c) = (s.0 as isize, s.1 as isize);
                let n = f.side() as isize;
                let has_zero = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                    .into_iter()
                    .filter(|&(a, b)| (0..n).contains(&a) && (0..n).contains(&b))
                    .any(|(a, b)| f.get_or_zero(a, b) == 0);
                prop_assert!(has_zero);
            }
            for &s in &z.isolated {
                prop_assert!(box_neighbors(f.side(), f.index_of(s)).all(|j| f.heights()[j] >= 1));
            }
        }

        #[test]
        fn log_weight_difference_is_energy_and_zero_difference(
            a in arb_field(3, 4),
            seed in prop::collection::vec(0u32..=4, 9),
            beta in 0.2f64..3.0,
            h in 0.0f64..2.0,
        ) {
            let n = a.side();
            let b = Field::from_heights(n, seed[..n * n].to_vec()).unwrap();
            let p = Parameters::new(beta, h, n).unwrap();
            let d_energy = hamiltonian(&b) as f64 - hamiltonian(&a) as f64;
            let d_zeros = b.zero_count() as f64 - a.zero_count() as f64;
            let diff = log_weight(&b, &p) - log_weight(&a, &p);
            prop_assert!((diff - (-beta * d_energy + h * d_zeros)).abs() < 1e-9);
        }
    }
}
