//! Heat-bath sampler against exact enumeration on tiny lattices.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use sos_core::mcmc::{
    conditional_distribution, detailed_balance_defect, half_sweep_kernel, run_chain,
    stationarity_defect, sweep_kernel, ChainState, RunSpec,
};
use sos_core::oracle::{CappedSpace, ExactLaw};
use sos_core::{critical_h, Field, Parameters};

fn tv(p: &[f64], counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    0.5 * p
        .iter()
        .zip(counts)
        .map(|(a, &c)| (a - c as f64 / total as f64).abs())
        .sum::<f64>()
}

#[test]
fn single_site_chain_draws_its_conditional() {
    for h in [0.0, 0.5] {
        let params = Parameters::new(1.0, h, 1).unwrap();
        let cap = 8;
        let mut chain = ChainState::new(&params, cap, 2024).unwrap();
        let mut counts = vec![0u64; cap as usize + 1];
        for _ in 0..1_000_000 {
            chain.sweep();
            counts[chain.height((0, 0)) as usize] += 1;
        }
        let exact = conditional_distribution([0; 4], &params, cap);
        let d = tv(&exact, &counts);
        assert!(d < 0.005, "h = {h}: TV {d}");
    }
}

#[test]
fn thinned_chain_matches_enumeration() {
    let space = CappedSpace::new(2, 1).unwrap();
    for h in [0.0, critical_h(1.0)] {
        let params = Parameters::new(1.0, h, 2).unwrap();
        let law = ExactLaw::new(&space, &params).unwrap();
        let mut spec = RunSpec::new(200_000 * 10 + 100, 100, 10, 7);
        spec.cap = Some(1);
        let mut counts = vec![0u64; 16];
        run_chain(&params, &spec, |_, s| {
            counts[space.index_of(&s.field()).unwrap() as usize] += 1
        })
        .unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 200_000);
        let d = law.total_variation(&counts);
        assert!(d < 0.01, "h = {h}: TV {d}");
    }
}

#[test]
fn one_sweep_preserves_the_exact_law() {
    let space = CappedSpace::new(2, 1).unwrap();
    let params = Parameters::new(1.0, 0.0, 2).unwrap();
    let law = ExactLaw::new(&space, &params).unwrap();
    let pick = WeightedIndex::new(law.probabilities()).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    let mut chain = ChainState::new(&params, 1, 3).unwrap();
    let mut counts = vec![0u64; 16];
    for _ in 0..1_000_000 {
        let start = space.field_at(pick.sample(&mut rng) as u64);
        chain.set_field(&start).unwrap();
        chain.sweep();
        counts[space.index_of(&chain.field()).unwrap() as usize] += 1;
    }
    let d = law.total_variation(&counts);
    assert!(d < 0.01, "TV {d}");
}

#[test]
fn kernels_satisfy_detailed_balance() {
    let space = CappedSpace::new(2, 1).unwrap();
    for beta in [0.5, 1.0, 2.0] {
        for h in [0.0, critical_h(beta), 1.0] {
            let params = Parameters::new(beta, h, 2).unwrap();
            let law = ExactLaw::new(&space, &params).unwrap();
            for color in 0..2 {
                let k = half_sweep_kernel(&space, &params, color).unwrap();
                assert!(detailed_balance_defect(law.probabilities(), &k) < 1e-10);
            }
            let full = sweep_kernel(&space, &params).unwrap();
            assert!(stationarity_defect(law.probabilities(), &full) < 1e-12);
        }
    }
}

#[test]
fn kernel_rows_agree_with_simulated_transitions() {
    // empirical one-sweep transition frequencies out of a fixed state
    let space = CappedSpace::new(2, 1).unwrap();
    let params = Parameters::new(0.7, 0.2, 2).unwrap();
    let k = sweep_kernel(&space, &params).unwrap();
    let start = Field::from_rows(&[[1, 0], [0, 1]]).unwrap();
    let x = space.index_of(&start).unwrap() as usize;
    let mut chain = ChainState::new(&params, 1, 17).unwrap();
    let mut counts = vec![0u64; 16];
    for _ in 0..400_000 {
        chain.set_field(&start).unwrap();
        chain.sweep();
        counts[space.index_of(&chain.field()).unwrap() as usize] += 1;
    }
    let d = tv(&k[x * 16..(x + 1) * 16], &counts);
    assert!(d < 0.01, "TV {d}");
}
