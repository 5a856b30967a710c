use liarwalk::chipfield::{liar_run_fast, ChipConfiguration, Parity};
use liarwalk::discrepancy::{interval_discrepancy, site_discrepancy, IntervalSpec};
use liarwalk::parityforge::{adversarial_construction, force_parity, parity_mismatches, ParityGrid, Target};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forced_parities_match_and_cost_is_bounded(seed in any::<u64>(), n in 1usize..=16, t in 1usize..=16, odd in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = if odd { Parity::Odd } else { Parity::Even };
        let g = ParityGrid::random(&mut rng, n, t, p).unwrap();
        let f0 = force_parity(&g).unwrap();
        prop_assert!(parity_mismatches(&g, &f0).unwrap().is_empty());
        let cap = BigUint::from((n * t) as u64) << t;
        prop_assert!(f0.total() <= cap);
    }

    #[test]
    fn grid_text_round_trips(seed in any::<u64>(), n in 1usize..=20, t in 1usize..=20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ParityGrid::random(&mut rng, n, t, Parity::Even).unwrap();
        prop_assert_eq!(ParityGrid::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn adversarial_values_are_realized(t in 1u64..48, a in -6i64..6, w in 0i64..9) {
        let iv = IntervalSpec::new(a, a + w).unwrap();
        let adv = adversarial_construction(t, Target::Interval(iv)).unwrap();
        prop_assert_eq!(interval_discrepancy(&adv.config, t, iv).unwrap().max_abs, adv.predicted.clone());
        // Whatever sits on a guard cell at time tau cannot reach the interval by time T.
        for &(site, tau) in &adv.guards {
            let pile = liar_run_fast(&adv.config, tau, 1 << 20).unwrap().get(site);
            if pile.bits() == 0 {
                continue;
            }
            let alone = ChipConfiguration::from_pairs([(site, pile)]).unwrap();
            let end = liar_run_fast(&alone, t - tau, 1 << 20).unwrap();
            prop_assert!(end.support().unwrap().1 < a);
        }
    }
}

#[test]
fn site_targets_beat_random_configurations() {
    let t = 64;
    let adv = adversarial_construction(t, Target::Site(0)).unwrap();
    let best = site_discrepancy(&adv.config, t, 0);
    assert_eq!(best, adv.predicted);
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..100 {
        let f0 = ChipConfiguration::random(&mut rng, 64, 40, 20, Parity::Even);
        let d = site_discrepancy(&f0, t, 0);
        assert!(d <= best, "random {d} beats adversarial {best}");
    }
}
