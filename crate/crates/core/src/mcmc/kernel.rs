//! Dense transition matrices of the checkerboard dynamics on tiny lattices.
//!
//! States are indexed as in [`CappedSpace`]. Matrices are row-major, row =
//! current state, column = next state.

use crate::error::{Error, Result};
use crate::lattice::Parameters;
use crate::oracle::CappedSpace;

use super::conditional::SiteConditional;

/// Largest state space for which a dense kernel is built.
pub const MAX_KERNEL_STATES: u64 = 4096;

fn check(space: &CappedSpace, params: &Parameters) -> Result<usize> {
    if params.n() != space.side() {
        return Err(Error::SideMismatch {
            space: space.side(),
            params: params.n(),
        });
    }
    if space.size() > MAX_KERNEL_STATES {
        return Err(Error::BudgetExceeded {
            states: space.size() as f64,
            budget: MAX_KERNEL_STATES,
        });
    }
    Ok(space.size() as usize)
}

/// Kernel that resamples every site of one color (0: `r + c` even) from its
/// conditional law given the other color.
pub fn half_sweep_kernel(
    space: &CappedSpace,
    params: &Parameters,
    color: usize,
) -> Result<Vec<f64>> {
    let size = check(space, params)?;
    let n = space.side();
    let fields: Vec<_> = space.fields().collect();
    let colored: Vec<usize> = (0..n * n)
        .filter(|i| (i / n + i % n) % 2 == color)
        .collect();
    let mut k = vec![0.0; size * size];
    for (x, fx) in fields.iter().enumerate() {
        let laws: Vec<Vec<f64>> = colored
            .iter()
            .map(|&i| {
                SiteConditional::from_params(
                    fx.neighbor_heights(fx.site_of(i)),
                    params,
                    space.cap(),
                )
                .probabilities()
            })
            .collect();
        for (y, fy) in fields.iter().enumerate() {
            let off_color_equal = fx
                .heights()
                .iter()
                .zip(fy.heights())
                .enumerate()
                .all(|(i, (a, b))| a == b || (i / n + i % n) % 2 == color);
            if off_color_equal {
                k[x * size + y] = colored
                    .iter()
                    .zip(&laws)
                    .map(|(&i, law)| law[fy.heights()[i] as usize])
                    .product();
            }
        }
    }
    Ok(k)
}

pub fn mat_mul(a: &[f64], b: &[f64], size: usize) -> Vec<f64> {
    let mut c = vec![0.0; size * size];
    for i in 0..size {
        for l in 0..size {
            let ail = a[i * size + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..size {
                c[i * size + j] += ail * b[l * size + j];
            }
        }
    }
    c
}

/// Kernel of a full sweep: black half-sweep followed by white half-sweep.
pub fn sweep_kernel(space: &CappedSpace, params: &Parameters) -> Result<Vec<f64>> {
    let size = check(space, params)?;
    let black = half_sweep_kernel(space, params, 0)?;
    let white = half_sweep_kernel(space, params, 1)?;
    Ok(mat_mul(&black, &white, size))
}

/// `max_{i,j} |pi_i K_ij - pi_j K_ji|`.
pub fn detailed_balance_defect(pi: &[f64], kernel: &[f64]) -> f64 {
    let size = pi.len();
    let mut worst: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            worst = worst.max((pi[i] * kernel[i * size + j] - pi[j] * kernel[j * size + i]).abs());
        }
    }
    worst
}

/// `max_j |(pi K)_j - pi_j|`.
pub fn stationarity_defect(pi: &[f64], kernel: &[f64]) -> f64 {
    let size = pi.len();
    (0..size)
        .map(|j| {
            let pushed: f64 = (0..size).map(|i| pi[i] * kernel[i * size + j]).sum();
            (pushed - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// `max_i |sum_j K_ij - 1|`.
pub fn row_sum_defect(kernel: &[f64], size: usize) -> f64 {
    kernel
        .chunks(size)
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::critical_h;
    use crate::oracle::ExactLaw;

    #[test]
    fn half_sweeps_are_reversible() {
        for h in [0.0, critical_h(1.0), 0.5] {
            let params = Parameters::new(1.0, h, 2).unwrap();
            let space = CappedSpace::new(2, 1).unwrap();
            let law = ExactLaw::new(&space, &params).unwrap();
            for color in 0..2 {
                let k = half_sweep_kernel(&space, &params, color).unwrap();
                assert!(row_sum_defect(&k, 16) < 1e-14);
                assert!(detailed_balance_defect(law.probabilities(), &k) < 1e-15);
            }
            let full = sweep_kernel(&space, &params).unwrap();
            assert!(stationarity_defect(law.probabilities(), &full) < 1e-15);
        }
    }

    #[test]
    fn three_by_three_stationary() {
        let params = Parameters::new(0.6, 0.1, 3).unwrap();
        let space = CappedSpace::new(3, 1).unwrap();
        let law = ExactLaw::new(&space, &params).unwrap();
        let k = sweep_kernel(&space, &params).unwrap();
        assert!(stationarity_defect(law.probabilities(), &k) < 1e-14);
    }

    #[test]
    fn refuses_large_spaces() {
        let params = Parameters::new(1.0, 0.0, 3).unwrap();
        let space = CappedSpace::new(3, 2).unwrap();
        assert!(matches!(
            half_sweep_kernel(&space, &params, 0),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
