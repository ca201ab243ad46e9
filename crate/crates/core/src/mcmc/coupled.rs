//! Monotone coupling of two chains that differ only in the pinning reward.
//!
//! Both chains update each site with the same uniform through the inverse
//! CDF. Raising `h` moves conditional mass towards zero, so the chain with
//! the larger reward stays pointwise below the other one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Field, Parameters};

use super::chain::ChainState;
use super::conditional::{ConditionalTable, SiteConditional};
use super::rng::UniformStream;

/// Two chains sharing one uniform stream, with `h1 <= h2`.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    lower: ChainState,
    higher: ChainState,
}

impl CoupledPair {
    /// Both chains start from `phi = 0`.
    pub fn new(lower_h: &Parameters, higher_h: &Parameters, cap: u32, seed: u64) -> Result<Self> {
        let zeros = Field::zeros(lower_h.n());
        Self::from_fields(zeros.clone(), zeros, lower_h, higher_h, cap, seed, 0)
    }

    /// `higher_field` must lie pointwise below `lower_field`.
    pub fn from_fields(
        lower_field: Field,
        higher_field: Field,
        lower_h: &Parameters,
        higher_h: &Parameters,
        cap: u32,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if lower_h.beta() != higher_h.beta() || lower_h.n() != higher_h.n() {
            return Err(Error::InvalidParameter(
                "coupled chains must share beta and N".into(),
            ));
        }
        if lower_h.h() > higher_h.h() {
            return Err(Error::InvalidParameter(format!(
                "coupled chains need h1 <= h2, got h1 = {}, h2 = {}",
                lower_h.h(),
                higher_h.h()
            )));
        }
        if !higher_field.is_below(&lower_field) {
            return Err(Error::InvalidField(
                "the larger-h chain must start pointwise below the smaller-h chain".into(),
            ));
        }
        Ok(Self {
            lower: ChainState::from_field(lower_field, lower_h, cap, seed, stream)?,
            higher: ChainState::from_field(higher_field, higher_h, cap, seed, stream)?,
        })
    }

    /// The chain with the smaller reward `h1`, which stays on top.
    pub fn lower_h_chain(&self) -> &ChainState {
        &self.lower
    }

    /// The chain with the larger reward `h2`, which stays below.
    pub fn higher_h_chain(&self) -> &ChainState {
        &self.higher
    }

    pub fn sweep_count(&self) -> u64 {
        self.lower.sweep_count()
    }

    pub fn is_ordered(&self) -> bool {
        self.higher.field().is_below(&self.lower.field())
    }

    pub fn set_parallel_threshold(&mut self, threshold: usize) {
        self.lower.set_parallel_threshold(threshold);
        self.higher.set_parallel_threshold(threshold);
    }

    /// One coupled checkerboard sweep. Stops at the first site where the
    /// larger-h chain ends up above the smaller-h chain.
    pub fn sweep(&mut self) -> Result<()> {
        let n = self.lower.side();
        let p = n + 2;
        let sweep = self.lower.sweep_count();
        let (h1, h2) = (self.lower.params().h(), self.higher.params().h());
        let parallel = self.lower.is_parallel();
        let mut hits = (0, 0);

        for color in 0..2 {
            let mut lo = self.lower.clone_handles();
            let mut hi = self.higher.clone_handles();
            let (lo_rows, lo_other) = self.lower.planes_mut().split(color);
            let (hi_rows, hi_other) = self.higher.planes_mut().split(color);
            let ctx = RowContext {
                n,
                color,
                lo_other,
                hi_other,
                lo_table: &lo.table,
                hi_table: &hi.table,
                h: (h1, h2),
            };
            let results: Vec<Result<(u64, u64)>> = if parallel {
                lo_rows
                    .par_chunks_mut(p)
                    .zip(hi_rows.par_chunks_mut(p))
                    .enumerate()
                    .map(|(r, (lo_row, hi_row))| {
                        let mut cursor = lo.stream.fork_at(lo.layout.row_draw(sweep, color, r));
                        ctx.update(r, lo_row, hi_row, &mut cursor)
                    })
                    .collect()
            } else {
                lo.stream.seek(lo.layout.row_draw(sweep, color, 0));
                let mut out = Vec::with_capacity(n);
                for (r, (lo_row, hi_row)) in
                    lo_rows.chunks_mut(p).zip(hi_rows.chunks_mut(p)).enumerate()
                {
                    let res = ctx.update(r, lo_row, hi_row, &mut lo.stream);
                    let failed = res.is_err();
                    out.push(res);
                    if failed {
                        break;
                    }
                }
                out
            };
            for res in results {
                let (a, b) = res?;
                hits.0 += a;
                hits.1 += b;
            }
            hi.stream = lo.stream.clone();
            self.lower.restore_stream(lo.stream);
            self.higher.restore_stream(hi.stream);
        }
        self.lower.record_sweep(hits.0);
        self.higher.record_sweep(hits.1);
        Ok(())
    }
}

/// Shared pieces of a chain needed while its planes are mutably borrowed.
struct Handles {
    table: std::sync::Arc<ConditionalTable>,
    layout: std::sync::Arc<super::rng::Layout>,
    stream: UniformStream,
}

impl ChainState {
    fn clone_handles(&mut self) -> Handles {
        Handles {
            table: self.table_arc(),
            layout: self.layout_arc(),
            stream: self.uniform_stream().clone(),
        }
    }

    fn restore_stream(&mut self, stream: UniformStream) {
        *self.uniform_stream() = stream;
    }
}

struct RowContext<'a> {
    n: usize,
    color: usize,
    lo_other: &'a [u32],
    hi_other: &'a [u32],
    lo_table: &'a ConditionalTable,
    hi_table: &'a ConditionalTable,
    h: (f64, f64),
}

impl RowContext<'_> {
    fn update(
        &self,
        r: usize,
        lo_row: &mut [u32],
        hi_row: &mut [u32],
        stream: &mut UniformStream,
    ) -> Result<(u64, u64)> {
        let p = self.n + 2;
        let nb = |other: &[u32], j: usize| {
            let mid = (r + 1) * p + j;
            [
                other[mid - p],
                other[mid + p],
                other[mid - 1],
                other[mid + 1],
            ]
        };
        let mut hits = (0, 0);
        let mut c = (r + self.color) % 2;
        while c < self.n {
            let j = c + 1;
            let u = stream.next_uniform();
            let (lo_nb, hi_nb) = (nb(self.lo_other, j), nb(self.hi_other, j));
            let (a, ha) = self.lo_table.sample(lo_nb, u);
            let (b, hb) = self.hi_table.sample(hi_nb, u);
            if b > a {
                return Err(Error::OrderingViolation {
                    site: (r, c),
                    low_h_height: a,
                    high_h_height: b,
                    low_h_neighbors: lo_nb,
                    high_h_neighbors: hi_nb,
                    h1: self.h.0,
                    h2: self.h.1,
                });
            }
            lo_row[j] = a;
            hi_row[j] = b;
            hits.0 += ha as u64;
            hits.1 += hb as u64;
            c += 2;
        }
        Ok(hits)
    }
}

/// Performs one coupled sweep and returns the updated pair.
pub fn coupled_sweep(mut pair: CoupledPair) -> Result<CoupledPair> {
    pair.sweep()?;
    Ok(pair)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolleyViolation {
    pub lower_neighbors: [u32; 4],
    pub upper_neighbors: [u32; 4],
    pub h1: f64,
    pub h2: f64,
    pub height: u32,
    /// `F(k | upper, h1) - F(k | lower, h2)`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolleyReport {
    pub beta: f64,
    pub cap: u32,
    pub tuple_pairs: u64,
    pub h_pairs: u64,
    pub comparisons: u64,
    /// Largest `F(k | upper, h1) - F(k | lower, h2)` seen.
    pub max_excess: f64,
    pub violations: Vec<HolleyViolation>,
}

impl HolleyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every pair of neighbor tuples `lower <= upper` (pointwise, entries in
/// `0..=max_neighbor`) and every `h1 <= h2` from `h_grid`, checks
/// `F(k | upper, h1) <= F(k | lower, h2) + tol` for all `k` in `0..=cap`.
pub fn holley_check(
    beta: f64,
    max_neighbor: u32,
    h_grid: &[f64],
    cap: u32,
    tol: f64,
) -> HolleyReport {
    let m = max_neighbor;
    let tuples: Vec<[u32; 4]> = (0..(m + 1).pow(4))
        .map(|i| {
            let d = |j: u32| (i / (m + 1).pow(j)) % (m + 1);
            [d(0), d(1), d(2), d(3)]
        })
        .collect();
    let mut h_pairs = Vec::new();
    for &a in h_grid {
        for &b in h_grid {
            if a <= b {
                h_pairs.push((a, b));
            }
        }
    }
    let cdf = |nb: [u32; 4], h: f64| SiteConditional::new(nb, beta, h, cap).cdf();

    let mut report = HolleyReport {
        beta,
        cap,
        tuple_pairs: 0,
        h_pairs: h_pairs.len() as u64,
        comparisons: 0,
        max_excess: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for &(h1, h2) in &h_pairs {
        let upper_cdfs: Vec<Vec<f64>> = tuples.iter().map(|&t| cdf(t, h1)).collect();
        let lower_cdfs: Vec<Vec<f64>> = tuples.iter().map(|&t| cdf(t, h2)).collect();
        for (li, lo) in tuples.iter().enumerate() {
            for (ui, up) in tuples.iter().enumerate() {
                if !lo.iter().zip(up).all(|(a, b)| a <= b) {
                    continue;
                }
                report.tuple_pairs += 1;
                for (k, (fu, fl)) in upper_cdfs[ui].iter().zip(&lower_cdfs[li]).enumerate() {
                    report.comparisons += 1;
                    let excess = fu - fl;
                    report.max_excess = report.max_excess.max(excess);
                    if excess > tol {
                        report.violations.push(HolleyViolation {
                            lower_neighbors: *lo,
                            upper_neighbors: *up,
                            h1,
                            h2,
                            height: k as u32,
                            excess,
                        });
                    }
                }
            }
        }
    }
    report.tuple_pairs /= report.h_pairs.max(1);
    report
}
