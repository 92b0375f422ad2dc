//! The interval partitioning process seen at finitely many loci is the ARG:
//! restricting simulated partitions of [0, R) to z reproduces the exact
//! transient law computed by uniformization.

use arg_ibd::exactarg::transient_law;
use arg_ibd::partitions::{LociSet, SetPartition, StateSpace};
use arg_ibd::simulate::{stream_rng, BlockState};

fn restricted_law(z: &LociSet, r: f64, rho: f64, t: f64, reps: u64, seed: u64) -> Vec<f64> {
    let space = StateSpace::new(z.n()).unwrap();
    let mut counts = vec![0u64; space.len()];
    for i in 0..reps {
        let mut rng = stream_rng(seed, i);
        let mut state = BlockState::single_block(r);
        state.run_until(rho, t, &mut rng);
        let pi = state.to_partition().restrict_to_loci(z).unwrap();
        counts[space.index_of(&pi).unwrap()] += 1;
    }
    counts.iter().map(|&c| c as f64 / reps as f64).collect()
}

fn check(z: &[f64], r: f64, rho: f64, t: f64, seed: u64) {
    let z = LociSet::new(z.to_vec()).unwrap();
    let reps = 40_000u64;
    let exact = transient_law(&z, rho, &SetPartition::coarsest(z.len()), t).unwrap();
    let sim = restricted_law(&z, r, rho, t, reps, seed);
    for (k, (&p, &q)) in exact.iter().zip(&sim).enumerate() {
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!(
            (p - q).abs() <= 4.0 * se + 1e-4,
            "state {k}: exact {p}, simulated {q}, se {se}"
        );
    }
}

#[test]
fn restriction_matches_exact_transient_law_short_interval() {
    check(&[0.0, 0.7, 2.1, 4.9], 5.0, 1.0, 1.5, 31);
}

#[test]
fn restriction_matches_exact_transient_law_with_trapped_material() {
    // loci far from 0 inside a long interval, where other blocks sit in gaps
    check(&[0.0, 0.7, 2.1, 4.9], 30.0, 1.0, 3.0, 32);
}

#[test]
fn restriction_matches_exact_law_at_high_recombination() {
    check(&[0.0, 0.3, 0.5], 10.0, 4.0, 2.0, 33);
}
