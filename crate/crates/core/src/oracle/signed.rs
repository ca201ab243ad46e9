//! The signed state space in which isolated zeros may dip below the wall, and
//! the check that its positive part recovers the pinned measure at `h = h_w`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{classify_zeros, first_isolation_violation, Parameters, SignedField};
use crate::numeric::NeumaierSum;

use super::{CappedSpace, ExactLaw};

/// Signed fields of a truncated space with their unnormalized weights
/// `exp(-beta H(psi) + h_w |q2+(psi)|)`.
#[derive(Debug, Clone)]
pub struct SignedEnsemble {
    entries: Vec<(SignedField, f64)>,
    total: f64,
}

impl SignedEnsemble {
    pub fn entries(&self) -> &[(SignedField, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn partition_function(&self) -> f64 {
        self.total
    }
}

pub(crate) fn signed_at(n: usize, cap: u32, depth: u32, mut index: u64) -> Vec<i32> {
    let radix = (cap + depth + 1) as u64;
    (0..n * n)
        .map(|_| {
            let d = index % radix;
            index /= radix;
            d as i32 - depth as i32
        })
        .collect()
}

/// Enumerates the signed space with heights in `-depth..=cap`, keeping only
/// fields whose negative sites have all in-box neighbors at height one or more.
pub fn enumerate_signed_space(space: &CappedSpace, params: &Parameters) -> Result<SignedEnsemble> {
    space.check_params(params)?;
    if !params.is_critical() {
        return Err(Error::NotCritical {
            h: params.h(),
            h_w: params.h_w(),
        });
    }
    let (n, cap, depth) = (space.side(), space.cap() as i32, space.depth() as i32);
    let (beta, h) = (params.beta(), params.h());
    let chunks = space.map_chunks(space.signed_candidates(), |range| {
        let mut out = Vec::new();
        let mut sum = NeumaierSum::new();
        let mut heights = signed_at(n, space.cap(), space.depth(), range.start);
        for _ in range {
            if first_isolation_violation(n, &heights).is_none() {
                let psi =
                    SignedField::from_heights(n, heights.clone()).expect("constraint checked");
                let w = (-beta * psi.hamiltonian() as f64
                    + h * psi.non_isolated_zero_count() as f64)
                    .exp();
                sum.add(w);
                out.push((psi, w));
            }
            for v in heights.iter_mut() {
                if *v < cap {
                    *v += 1;
                    break;
                }
                *v = -depth;
            }
        }
        (out, sum)
    });
    let mut total = NeumaierSum::new();
    let mut entries = Vec::new();
    for (part, sum) in chunks {
        total.merge(&sum);
        entries.extend(part);
    }
    Ok(SignedEnsemble {
        entries,
        total: total.value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalizationReport {
    pub n: usize,
    pub cap: u32,
    pub depth: u32,
    pub beta: f64,
    /// `max_phi |P(phi) - P~(max(psi, 0) = phi)|`.
    pub max_discrepancy: f64,
    /// `e^{-4 beta (D + 1)} / (1 - e^{-4 beta})`, the mass an isolated zero
    /// loses relative to the untruncated sum.
    pub tail_factor: f64,
    /// `(1 - e^{-4 beta (D + 1)})^{-ceil(N^2 / 2)} - 1`, a rigorous bound on
    /// `max_discrepancy`.
    pub analytic_bound: f64,
}

/// Compares the pinned measure at `h = h_w` with the positive-part marginal of
/// the signed measure truncated at depth `depth`.
pub fn verify_marginalization(
    n: usize,
    cap: u32,
    depth: u32,
    beta: f64,
) -> Result<MarginalizationReport> {
    let params = Parameters::critical(beta, n)?;
    let space = CappedSpace::new(n, cap)?;
    let law = ExactLaw::new(&space, &params)?;
    let ensemble = enumerate_signed_space(&CappedSpace::signed(n, cap, depth)?, &params)?;

    let mut marginal = vec![0.0; law.probabilities().len()];
    for (psi, w) in ensemble.entries() {
        let idx = space
            .index_of(&psi.positive_part())
            .expect("positive part lies in the capped space");
        marginal[idx as usize] += w / ensemble.partition_function();
    }
    let max_discrepancy = law
        .probabilities()
        .iter()
        .zip(&marginal)
        .map(|(p, m)| (p - m).abs())
        .fold(0.0, f64::max);

    let eps = (-4.0 * beta * (depth as f64 + 1.0)).exp();
    let max_isolated = ((n * n) as i32 + 1) / 2;
    Ok(MarginalizationReport {
        n,
        cap,
        depth,
        beta,
        max_discrepancy,
        tail_factor: eps / -(-4.0 * beta).exp_m1(),
        analytic_bound: (1.0 - eps).powi(-max_isolated) - 1.0,
    })
}

/// The truncated marginal predicted without enumerating the signed space:
/// each isolated zero keeps a fraction `1 - e^{-4 beta (D + 1)}` of its
/// untruncated weight, so the marginal is `P(phi) rho^{|q1(phi)|}` renormalized.
pub fn predicted_truncated_marginal(law: &ExactLaw, depth: u32, beta: f64) -> Vec<f64> {
    let rho = 1.0 - (-4.0 * beta * (depth as f64 + 1.0)).exp();
    let space = law.space();
    let mut out: Vec<f64> = law
        .probabilities()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let q1 = classify_zeros(&space.field_at(i as u64)).isolated.len();
            p * rho.powi(q1 as i32)
        })
        .collect();
    let z = crate::numeric::compensated_sum(out.iter().copied());
    out.iter_mut().for_each(|v| *v /= z);
    out
}
