//! The lifting maps used in the zero- and level-counting arguments, their
//! energy and zero-count bookkeeping, and injectivity checks on small spaces.

use std::collections::HashSet;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{first_isolation_violation, hamiltonian, Field, SignedField, Site};

use super::signed::signed_at;
use super::CappedSpace;

/// `U_A`: sites of `A` (zeros of `phi`) stay at zero, every other site goes up by one.
pub fn lift_zeros(field: &Field, subset: &[Site]) -> Result<Field> {
    let mut out = field.clone();
    out.heights_mut().iter_mut().for_each(|h| *h += 1);
    for &site in subset {
        if field.get(site) != 0 {
            return Err(Error::InvalidField(format!(
                "site {site:?} of A is not a zero"
            )));
        }
        out.set(site, 0);
    }
    Ok(out)
}

/// `V_A`: zeros stay at zero, sites of `A` (at height `level`) go to one and
/// every other site goes up by one.
pub fn lift_level(field: &Field, level: u32, subset: &[Site]) -> Result<Field> {
    if level == 0 {
        return Err(Error::InvalidParameter("level must be at least 1".into()));
    }
    let mut out = field.clone();
    out.heights_mut().iter_mut().for_each(|h| {
        if *h > 0 {
            *h += 1
        }
    });
    for &site in subset {
        if field.get(site) != level {
            return Err(Error::InvalidField(format!(
                "site {site:?} of A is not at level {level}"
            )));
        }
        out.set(site, 1);
    }
    Ok(out)
}

/// `U_A` on the signed space, for `A` inside the non-isolated zeros of `psi`.
pub fn lift_signed(psi: &SignedField, subset: &[Site]) -> Result<SignedField> {
    let n = psi.side();
    let non_isolated: HashSet<Site> = psi.classify_zeros().non_isolated.into_iter().collect();
    let mut heights: Vec<i32> = psi.heights().iter().map(|h| h + 1).collect();
    for &site in subset {
        if !non_isolated.contains(&site) {
            return Err(Error::InvalidField(format!(
                "site {site:?} of A is not a non-isolated zero"
            )));
        }
        heights[site.0 * n + site.1] = 0;
    }
    SignedField::from_heights(n, heights)
}

/// One input to [`verify_lifting_inequalities`].
#[derive(Debug, Clone, PartialEq)]
pub enum LiftingCase {
    Zeros {
        field: Field,
        subset: Vec<Site>,
    },
    Level {
        field: Field,
        level: u32,
        subset: Vec<Site>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LiftingReport {
    pub zero_cases: usize,
    pub level_cases: usize,
    pub violations: Vec<String>,
}

impl LiftingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, for each case,
///
/// * `H(U_A phi) <= H(phi) + 4|A| + 4N` and
///   `|phi^{-1}(0)| - |(U_A phi)^{-1}(0)| = |phi^{-1}(0) \ A|`;
/// * `H(V_A phi) <= H(phi) + 4N + 4|phi^{-1}(0)| + 4 l |A|` and
///   `|(V_A phi)^{-1}(0)| = |phi^{-1}(0)|`.
pub fn verify_lifting_inequalities<I>(cases: I) -> LiftingReport
where
    I: IntoIterator<Item = LiftingCase>,
{
    let mut report = LiftingReport::default();
    for case in cases {
        match case {
            LiftingCase::Zeros { field, subset } => {
                report.zero_cases += 1;
                let lifted = match lift_zeros(&field, &subset) {
                    Ok(f) => f,
                    Err(e) => {
                        report.violations.push(e.to_string());
                        continue;
                    }
                };
                let n = field.side() as u64;
                let a = subset.len() as u64;
                if hamiltonian(&lifted) > hamiltonian(&field) + 4 * a + 4 * n {
                    report.violations.push(format!(
                        "energy bound for U_A fails on {field:?}, A = {subset:?}"
                    ));
                }
                let zeros = field.zero_count();
                if zeros - lifted.zero_count() != zeros - subset.len() {
                    report.violations.push(format!(
                        "zero count for U_A fails on {field:?}, A = {subset:?}"
                    ));
                }
            }
            LiftingCase::Level {
                field,
                level,
                subset,
            } => {
                report.level_cases += 1;
                let lifted = match lift_level(&field, level, &subset) {
                    Ok(f) => f,
                    Err(e) => {
                        report.violations.push(e.to_string());
                        continue;
                    }
                };
                let n = field.side() as u64;
                let zeros = field.zero_count() as u64;
                let bound = hamiltonian(&field)
                    + 4 * n
                    + 4 * zeros
                    + 4 * level as u64 * subset.len() as u64;
                if hamiltonian(&lifted) > bound {
                    report.violations.push(format!(
                        "energy bound for V_A fails on {field:?}, l = {level}, A = {subset:?}"
                    ));
                }
                if lifted.zero_count() as u64 != zeros {
                    report.violations.push(format!(
                        "zero count for V_A fails on {field:?}, l = {level}, A = {subset:?}"
                    ));
                }
            }
        }
    }
    report
}

/// Random `(phi, A)` pairs, alternating between the two maps.
pub fn random_lifting_cases(
    sides: &[usize],
    max_height: u32,
    count: usize,
    seed: u64,
) -> Vec<LiftingCase> {
    assert!(!sides.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below = |k: u64| rng.next_u64() % k;
    (0..count)
        .map(|i| {
            let n = sides[below(sides.len() as u64) as usize];
            let heights = (0..n * n)
                .map(|_| below(max_height as u64 + 1) as u32)
                .collect();
            let field = Field::from_heights(n, heights).expect("sized correctly");
            if i % 2 == 0 {
                let subset = (0..n * n)
                    .filter(|&j| field.heights()[j] == 0 && below(2) == 1)
                    .map(|j| field.site_of(j))
                    .collect();
                LiftingCase::Zeros { field, subset }
            } else {
                let level = 1 + below(max_height.max(1) as u64) as u32;
                let subset = (0..n * n)
                    .filter(|&j| field.heights()[j] == level && below(2) == 1)
                    .map(|j| field.site_of(j))
                    .collect();
                LiftingCase::Level {
                    field,
                    level,
                    subset,
                }
            }
        })
        .collect()
}

/// Number of `(input, A)` pairs and of distinct images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    pub pairs: usize,
    pub distinct_images: usize,
}

impl InjectivityReport {
    pub fn injective(&self) -> bool {
        self.pairs == self.distinct_images
    }
}

fn subsets(sites: &[Site]) -> impl Iterator<Item = Vec<Site>> + '_ {
    (0..1u64 << sites.len()).map(move |mask| {
        sites
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &s)| s)
            .collect()
    })
}

/// `(phi, A) -> U_A phi` over every capped field and every `A` inside its zeros.
pub fn check_zero_lift_injectivity(space: &CappedSpace) -> InjectivityReport {
    let mut images = HashSet::new();
    let mut pairs = 0;
    for field in space.fields() {
        let zeros: Vec<Site> = (0..field.len())
            .filter(|&i| field.heights()[i] == 0)
            .map(|i| field.site_of(i))
            .collect();
        for a in subsets(&zeros) {
            pairs += 1;
            images.insert(lift_zeros(&field, &a).expect("A is inside the zeros"));
        }
    }
    InjectivityReport {
        pairs,
        distinct_images: images.len(),
    }
}

/// `(phi, A) -> V_A phi` over every capped field and every `A` inside `phi^{-1}(level)`.
pub fn check_level_lift_injectivity(space: &CappedSpace, level: u32) -> InjectivityReport {
    let mut images = HashSet::new();
    let mut pairs = 0;
    for field in space.fields() {
        let at_level: Vec<Site> = (0..field.len())
            .filter(|&i| field.heights()[i] == level)
            .map(|i| field.site_of(i))
            .collect();
        for a in subsets(&at_level) {
            pairs += 1;
            images.insert(lift_level(&field, level, &a).expect("A is at the level"));
        }
    }
    InjectivityReport {
        pairs,
        distinct_images: images.len(),
    }
}

/// `(psi, A) -> U_A psi` over the truncated signed space and every `A` inside
/// the non-isolated zeros of `psi`.
pub fn check_signed_lift_injectivity(space: &CappedSpace) -> InjectivityReport {
    let n = space.side();
    let mut images = HashSet::new();
    let mut pairs = 0;
    for index in 0..space.signed_candidates() {
        let heights = signed_at(n, space.cap(), space.depth(), index);
        if first_isolation_violation(n, &heights).is_some() {
            continue;
        }
        let psi = SignedField::from_heights(n, heights).expect("constraint checked");
        let non_isolated = psi.classify_zeros().non_isolated;
        for a in subsets(&non_isolated) {
            pairs += 1;
            images.insert(lift_signed(&psi, &a).expect("A is inside q2+"));
        }
    }
    InjectivityReport {
        pairs,
        distinct_images: images.len(),
    }
}
