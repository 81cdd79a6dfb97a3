use std::f64::consts::TAU;

use proptest::prelude::*;
use qutrit_lhv::born::{mix, noise_tensor, quantum_tensor, NoiseModel};
use qutrit_lhv::cli::parse_alpha_grid;
use qutrit_lhv::lhv::critical_visibility;
use qutrit_lhv::observables::{MeasurementFamily, ParameterLayout, Sharing, Unitary3};
use qutrit_lhv::optimizer::wrap_angles;
use qutrit_lhv::states::ghz_state;

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn noise_model() -> impl Strategy<Value = NoiseModel> {
    prop_oneof![Just(NoiseModel::White), Just(NoiseModel::Product)]
}

proptest! {
    #[test]
    fn measurements_are_unitary(u3 in angles(8), t in angles(3)) {
        let a = MeasurementFamily::U3.measurement(&u3).unwrap();
        let b = MeasurementFamily::Tritter.measurement(&t).unwrap();
        prop_assert!(a.deviation_from_unitarity() < 1e-10);
        prop_assert!(b.deviation_from_unitarity() < 1e-10);
    }

    #[test]
    fn tensors_are_distributions(alpha in 0.0..1.6f64, x in angles(48), noise in noise_model()) {
        let layout = ParameterLayout::new(MeasurementFamily::U3, 2, Sharing::PerParty).unwrap();
        let bank = layout.bank(&x).unwrap();
        let state = ghz_state(alpha);
        for p in [quantum_tensor(&state, &bank).unwrap(), noise_tensor(noise, &state, &bank).unwrap()] {
            for t in p.entries().chunks(27) {
                prop_assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(t.iter().all(|&v| v >= 0.0));
            }
            // Alice's marginal does not depend on the other settings.
            for r in 0..3 {
                let reference = p.marginal(0, [1, 0, 0], r);
                for triple in [[1, 0, 1], [1, 1, 0], [1, 1, 1]] {
                    prop_assert!((p.marginal(0, triple, r) - reference).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_noise_keeps_the_marginals(alpha in 0.0..1.6f64, x in angles(16)) {
        let layout = ParameterLayout::new(MeasurementFamily::U3, 2, Sharing::SharedAcrossParties).unwrap();
        let bank = layout.bank(&x).unwrap();
        let state = ghz_state(alpha);
        let ps = quantum_tensor(&state, &bank).unwrap();
        let pn = noise_tensor(NoiseModel::Product, &state, &bank).unwrap();
        for party in 0..3 {
            for r in 0..3 {
                prop_assert!((ps.marginal(party, [0, 1, 1], r) - pn.marginal(party, [0, 1, 1], r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixing_is_affine(alpha in 0.0..1.6f64, x in angles(6), v in 0.0..=1.0f64) {
        let bank = ParameterLayout::new(MeasurementFamily::Tritter, 2, Sharing::SharedAcrossParties)
            .unwrap()
            .bank(&x)
            .unwrap();
        let state = ghz_state(alpha);
        let ps = quantum_tensor(&state, &bank).unwrap();
        let pn = noise_tensor(NoiseModel::White, &state, &bank).unwrap();
        let mixed = mix(&ps, &pn, v).unwrap();
        for ((m, s), n) in mixed.entries().iter().zip(ps.entries()).zip(pn.entries()) {
            prop_assert!((m - (v * s + (1.0 - v) * n)).abs() < 1e-15);
        }
    }

    #[test]
    fn angle_wrapping_keeps_the_settings(x in angles(6)) {
        let layout = ParameterLayout::new(MeasurementFamily::Tritter, 2, Sharing::SharedAcrossParties).unwrap();
        let wrapped = wrap_angles(&x);
        prop_assert!(wrapped.iter().all(|w| (0.0..TAU).contains(w)));
        let a = quantum_tensor(&ghz_state(0.8), &layout.bank(&x).unwrap()).unwrap();
        let b = quantum_tensor(&ghz_state(0.8), &layout.bank(&wrapped).unwrap()).unwrap();
        for (p, q) in a.entries().iter().zip(b.entries()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_grids_cover_the_range(start in 0.0..45.0f64, span in 0.0..45.0f64, step in 0.5..10.0f64) {
        let stop = start + span;
        let grid = parse_alpha_grid(&format!("{start}:{stop}:{step}")).unwrap();
        prop_assert_eq!(grid[0], start);
        prop_assert!(grid.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(*grid.last().unwrap() <= stop + 1e-9);
        prop_assert!(*grid.last().unwrap() > stop - step);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn visibility_is_a_fraction_and_relabeling_invariant(
        alpha in 0.1..1.5f64,
        x in angles(6),
        noise in noise_model(),
        party in 0usize..3,
        setting in 0usize..2,
    ) {
        let bank = ParameterLayout::new(MeasurementFamily::Tritter, 2, Sharing::SharedAcrossParties)
            .unwrap()
            .bank(&x)
            .unwrap();
        let state = ghz_state(alpha);
        let v = critical_visibility(&state, &bank, noise).unwrap().v_crit;
        prop_assert!((0.0..=1.0).contains(&v));
        let swap = Unitary3::permutation([1, 2, 0]).unwrap();
        let moved = bank.with_setting(party, setting, swap.compose(bank.get(party, setting)));
        let w = critical_visibility(&state, &moved, noise).unwrap().v_crit;
        prop_assert!((v - w).abs() < 1e-8);
    }
}
