//! Property tests over random loci sets, partitions and event sequences.

use arg_ibd::exactarg::{check_consistency, check_scaling, stationary_exact};
use arg_ibd::partitions::{metric_d, IntervalPartition, LociSet};
use arg_ibd::scenario::{f_bruteforce, f_dp};
use arg_ibd::partitions::enumerate_partitions;
use arg_ibd::simulate::{stream_rng, BlockState};
use proptest::prelude::*;

fn loci(max_n: usize) -> impl Strategy<Value = LociSet> {
    prop::collection::vec(0.05f64..3.0, 1..=max_n).prop_map(|gaps| {
        let mut z = vec![0.0];
        for g in gaps {
            let last = z[z.len() - 1];
            z.push(last + g);
        }
        LociSet::new(z).unwrap()
    })
}

fn interval_partition(r: f64) -> impl Strategy<Value = IntervalPartition> {
    prop::collection::vec((0.0f64..1.0, 0u32..4), 0..8).prop_map(move |cuts| {
        let mut xs: Vec<f64> = cuts.iter().map(|c| c.0 * r).filter(|&x| x > 0.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut bps = vec![0.0];
        bps.extend(xs);
        bps.push(r);
        let labels: Vec<u32> = (0..bps.len() - 1)
            .map(|i| cuts.get(i).map_or(0, |c| c.1))
            .collect();
        IntervalPartition::new(bps, labels).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stationary_law_is_a_probability_vector(z in loci(4), rho in 0.01f64..50.0) {
        let table = stationary_exact(&z, rho).unwrap();
        let total: f64 = table.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(table.probabilities().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn restriction_to_any_subset_is_consistent(z in loci(4), rho in 0.05f64..20.0, mask in 1u32..32) {
        let keep: Vec<usize> = (0..z.len()).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!keep.is_empty());
        prop_assert!(check_consistency(&z, &keep, rho).unwrap() < 1e-10);
    }

    #[test]
    fn rescaling_space_equals_rescaling_rho(z in loci(4), rho in 0.05f64..20.0, lambda in 0.1f64..10.0) {
        prop_assert!(check_scaling(&z, rho, lambda).unwrap() < 1e-10);
    }

    #[test]
    fn f_dynamic_programme_matches_brute_force(z in loci(4)) {
        for pi in enumerate_partitions(z.n()).unwrap().iter().filter(|p| !p.is_singletons()) {
            let (dp, bf) = (f_dp(pi, &z).unwrap(), f_bruteforce(pi, &z).unwrap());
            prop_assert!((dp - bf).abs() <= 1e-12 * bf);
        }
    }

    #[test]
    fn metric_axioms(a in interval_partition(4.0), b in interval_partition(4.0), c in interval_partition(4.0)) {
        let (ab, ba) = (metric_d(&a, &b).unwrap(), metric_d(&b, &a).unwrap());
        prop_assert_eq!(metric_d(&a, &a).unwrap(), 0.0);
        prop_assert!((ab - ba).abs() < 1e-15);
        prop_assert!(ab >= 0.0);
        let (ac, cb) = (metric_d(&a, &c).unwrap(), metric_d(&c, &b).unwrap());
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn block_state_invariants_hold_along_random_paths(r in 1.0f64..60.0, rho in 0.1f64..5.0, seed in 0u64..1000) {
        let mut rng = stream_rng(seed, 0);
        let mut state = BlockState::single_block(r);
        for _ in 0..300 {
            state.step(rho, &mut rng);
            prop_assert!(state.verify().is_ok(), "{:?}", state.verify());
        }
        let round = BlockState::from_partition(&state.to_partition());
        prop_assert_eq!(round.to_partition(), state.to_partition());
    }
}
