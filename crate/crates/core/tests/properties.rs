use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

use demon_core::channel::{outcome_reports, photon_subtracted_mean};
use demon_core::merit::{baseline, best_strategy, delta_n, demon_contribution};
use demon_core::state::{
    anticorrelated, make_thermal, product_thermal, split_thermal, thermal_marginal_anticorrelated, tmss_diagonal,
};
use demon_core::{DemonParams, JointNumberState, ModePmf, Outcome, OutcomeStats, PolarityStrategy, ThermalSpec};
use proptest::prelude::*;

const EPS: f64 = 1e-12;

fn any_state() -> impl Strategy<Value = JointNumberState> {
    prop_oneof![
        (0.05f64..30.0, 0.05f64..30.0).prop_map(|(a, b)| product_thermal(a, b, EPS).unwrap()),
        (0.05f64..20.0, 0.0f64..1.5707).prop_map(|(n, t)| split_thermal(n, t, EPS).unwrap()),
        (0.05f64..20.0).prop_map(|n| tmss_diagonal(n, EPS).unwrap()),
        (0.05f64..1.0).prop_map(|n| thermal_marginal_anticorrelated(n, EPS).unwrap()),
        prop::collection::vec(0.0f64..1.0, 1..25).prop_filter_map("all zero", |w| {
            let s: f64 = w.iter().sum();
            (s > 0.0).then(|| anticorrelated(&w.iter().map(|x| x / s).collect::<Vec<_>>()).ok()).flatten()
        }),
    ]
}

fn any_params() -> impl Strategy<Value = DemonParams> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, any::<bool>()).prop_map(|(ra, rb, ea, eb, indep)| {
        if indep {
            DemonParams::independent(ra, rb, ea, eb).unwrap()
        } else {
            DemonParams::new(ra, ea, eb).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn outcome_probabilities_sum_to_stored_mass(state in any_state(), p in any_params()) {
        let reps = outcome_reports(&state, &p);
        prop_assert!((reps.total_prob() - state.stored_mass()).abs() < 1e-12);
        prop_assert!((reps.total_prob() - 1.0).abs() <= state.tail_mass() + 1e-12);
        prop_assert!(reps.iter().all(|r| r.prob >= -1e-15));
    }

    #[test]
    fn transmitted_photons_are_conserved(state in any_state(), p in any_params()) {
        let reps = outcome_reports(&state, &p);
        let (ma, mb) = state.marginal_means();
        let expected = (1.0 - p.r_a()) * ma + (1.0 - p.r_b()) * mb;
        prop_assert!((reps.transmitted_photons() - expected).abs() <= 1e-10 * expected.max(1.0));
    }

    #[test]
    fn pointwise_strategy_dominates(state in any_state(), p in any_params()) {
        let reps = outcome_reports(&state, &p);
        let (best, value) = best_strategy(reps.as_slice());
        prop_assert!((delta_n(reps.as_slice(), best) - value).abs() < 1e-10 * value.abs().max(1.0));
        for s in PolarityStrategy::all() {
            prop_assert!(delta_n(reps.as_slice(), s) <= value + 1e-12 * value.abs().max(1.0));
        }
    }

    #[test]
    fn mirror_symmetry(state in any_state(), p in any_params()) {
        let reps = outcome_reports(&state, &p);
        let mirrored = outcome_reports(&state.swapped(), &p.mirrored());
        for r in reps.iter() {
            let m = &mirrored[r.outcome.mirrored()];
            prop_assert!((r.prob - m.prob).abs() < 1e-12);
            prop_assert!((r.weighted_delta() + m.weighted_delta()).abs() < 1e-10 * r.weighted_delta().abs().max(1.0));
        }
    }

    #[test]
    fn anticorrelated_never_double_click(
        w in prop::collection::vec(0.0f64..1.0, 2..40),
        p in any_params(),
    ) {
        let s: f64 = w.iter().sum();
        prop_assume!(s > 0.0);
        let state = anticorrelated(&w.iter().map(|x| x / s).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(outcome_reports(&state, &p)[Outcome::BOTH].prob, 0.0);
    }

    #[test]
    fn number_correlated_signs(nbar in 0.01f64..50.0, p in any_params()) {
        prop_assume!(p.r_a() > 1e-6 && p.r_a() < 1.0 - 1e-6 && p.r_b() < 1.0 - 1e-6);
        prop_assume!(p.eta_a() > 1e-6 && p.eta_b() > 1e-6);
        let reps = outcome_reports(&tmss_diagonal(nbar, EPS).unwrap(), &DemonParams::new(p.r_a(), p.eta_a(), p.eta_b()).unwrap());
        prop_assert!(reps[Outcome::ONLY_B].delta < 0.0);
        prop_assert!(reps[Outcome::ONLY_A].delta > 0.0);
    }
}

#[test]
fn split_thermal_demon_never_helps() {
    let axis: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
    for (n_in, theta) in [(2.0, FRAC_PI_4), (3.0, FRAC_PI_3)] {
        let state = split_thermal(n_in, theta, EPS).unwrap();
        let mut worst: f64 = 0.0;
        for &r in &axis {
            for &ea in &axis {
                for &eb in &axis {
                    let p = DemonParams::new(r, ea, eb).unwrap();
                    let (s, _) = best_strategy(outcome_reports(&state, &p).as_slice());
                    worst = worst.max(demon_contribution(&state, &p, s).abs());
                }
            }
        }
        assert!(worst < 1e-9, "n_in={n_in}: {worst}");
    }
}

#[test]
fn split_thermal_keep_strategy_is_the_baseline() {
    let state = split_thermal(3.0, FRAC_PI_3, EPS).unwrap();
    let p = DemonParams::new(0.4, 0.7, 0.2).unwrap();
    let reps = outcome_reports(&state, &p);
    let (s, v) = best_strategy(reps.as_slice());
    assert_eq!(s, PolarityStrategy::KEEP);
    assert!((v - baseline(&state, &p)).abs() < 1e-10);
    let (ma, mb) = state.marginal_means();
    assert!((v - 0.6 * (mb - ma)).abs() < 1e-10);
}

#[test]
fn photon_subtraction_doubles_thermal_mean() {
    for nbar in [0.5, 1.0, 10.0] {
        let pmf = make_thermal(ThermalSpec::new(nbar).unwrap(), EPS).unwrap();
        let sub = photon_subtracted_mean(&pmf).unwrap();
        assert!((sub - 2.0 * nbar).abs() < 1e-8 * nbar, "nbar={nbar}: {sub}");
    }
}

#[test]
fn photon_subtraction_identity_other_pmfs() {
    for mean in [0.3, 2.0, 12.5] {
        let pmf = ModePmf::poisson(mean, EPS).unwrap();
        let expected = pmf.mean() - 1.0 + pmf.variance() / pmf.mean();
        assert!((photon_subtracted_mean(&pmf).unwrap() - expected).abs() < 1e-10);
        assert!((expected - mean).abs() < 1e-8);
    }
    for m in [1, 4, 30] {
        let pmf = ModePmf::fock(m);
        assert_eq!(photon_subtracted_mean(&pmf).unwrap(), m as f64 - 1.0);
    }
    let custom = ModePmf::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let expected = custom.mean() - 1.0 + custom.variance() / custom.mean();
    assert!((photon_subtracted_mean(&custom).unwrap() - expected).abs() < 1e-12);
    assert!(photon_subtracted_mean(&ModePmf::fock(0)).is_err());
}
