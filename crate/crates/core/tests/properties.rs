use proptest::prelude::*;

use ces_ge_core::equilibrium::{solve_shock, Attribution, PriceMethod, SolverOptions};
use ces_ge_core::estimation::{ols_fit_with, tornqvist_sector, StdErrors};
use ces_ge_core::synthetic::{generate_economy, roundtrip_report, simulate_linked_observation, SyntheticSpec};

fn xs_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 4..40).prop_filter("spread", |xs| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo > 0.1
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_lines_are_recovered(xs in xs_strategy(), gamma in -2.0f64..2.0, tfpg in -0.5f64..0.5) {
        prop_assume!(gamma.abs() > 0.05);
        let ys: Vec<f64> = xs.iter().map(|x| gamma * (x - tfpg)).collect();
        let f = ols_fit_with(&xs, &ys, StdErrors::Classical).unwrap();
        prop_assert!((f.slope - gamma).abs() < 1e-10);
        prop_assert!((-f.intercept / f.slope - tfpg).abs() < 1e-9);
    }

    #[test]
    fn ols_is_affine_equivariant(
        xs in xs_strategy(),
        noise in prop::collection::vec(-0.1f64..0.1, 40),
        shift in -3.0f64..3.0,
        scale in 0.2f64..5.0,
    ) {
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| 0.3 - 0.7 * x + e).collect();
        let base = ols_fit_with(&xs, &ys, StdErrors::Classical).unwrap();
        let xs2: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| scale * y).collect();
        let moved = ols_fit_with(&xs2, &ys2, StdErrors::Classical).unwrap();
        prop_assert!((moved.slope - scale * base.slope).abs() < 1e-9);
        prop_assert!((moved.intercept - scale * (base.intercept - base.slope * shift)).abs() < 1e-8);
        // t statistics of the slope do not depend on units
        prop_assert!((moved.p_slope - base.p_slope).abs() < 1e-9);
    }

    #[test]
    fn tornqvist_is_exact_for_cobb_douglas(seed in 0u64..10_000, n in 1usize..12, lo in 0.3f64..1.0, width in 0.0f64..2.0) {
        let spec = SyntheticSpec { n, seed, gamma_range: (0.0, 0.0), z_range: (lo, lo + width), density: 0.7, ..Default::default() };
        let e = generate_economy(&spec).unwrap();
        let z = spec.draw_productivity();
        let obs = simulate_linked_observation(&e, &z, 0.0, seed, &SolverOptions::default()).unwrap();
        for j in 0..n {
            prop_assert!((tornqvist_sector(&obs, j).unwrap() - z[j].ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_roundtrip_recovers_gamma(seed in 0u64..10_000, n in 3usize..15) {
        let spec = SyntheticSpec { n, seed, gamma_range: (0.1, 1.5), z_range: (0.7, 1.4), ..Default::default() };
        let z = spec.draw_productivity();
        prop_assume!(z.iter().all(|v| (v - 1.0).abs() > 1e-3));
        let r = roundtrip_report(&spec, &z).unwrap();
        prop_assert!(r.max_gamma_error() < 1e-8, "{}", r.max_gamma_error());
        prop_assert!(r.max_tfpg_error() < 1e-8, "{}", r.max_tfpg_error());
    }

    #[test]
    fn scs_ranks_methods_by_substitutability(seed in 0u64..10_000, n in 2usize..20, k in 0usize..20, f in 1.1f64..3.0) {
        // more room to substitute toward the cheaper input saves more
        let e = generate_economy(&SyntheticSpec { n, seed, gamma_range: (0.5, 0.5), ..Default::default() }).unwrap();
        let mut z = vec![1.0; n];
        z[k % n] = f;
        let opts = SolverOptions::default();
        let run = |m| solve_shock(&e, &z, m, &opts, Attribution::Producing).unwrap().scs_total;
        let (leo, ces, cd) = (run(PriceMethod::Leontief), run(PriceMethod::Ces), run(PriceMethod::CobbDouglas));
        prop_assert!(leo <= ces + 1e-12 && ces <= cd + 1e-12, "{leo} {ces} {cd}");
    }
}
