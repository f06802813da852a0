//! Randomized checks of the model invariants.

use lifeindex::{
    fairness_degree, greedy_allocate, luxury_index, perfect_ensurance_closed,
    perfect_ensurance_mc, saturating_share, shortage_sample, AllocationProblem,
    ExpenditureVector, LuxuryComponents, ModelCoefficients, PopulationModel, ResourceBundle,
    SaturationCoefficients, UrbanRuralSplit,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn saturating_share_stays_in_the_unit_interval_and_grows(
        x in 0.0..1e12f64,
        dx in 0.0..1e12f64,
        k in 1e-6..1e9f64,
    ) {
        let s = saturating_share(x, k).unwrap();
        prop_assert!((0.0..1.0).contains(&s), "share {s}");
        let s2 = saturating_share(x + dx, k).unwrap();
        prop_assert!(s2 >= s, "share fell from {s} to {s2} as input grew");
    }
}

proptest! {
    #[test]
    fn closed_form_is_bounded_and_monotone_in_aid(
        f_med in 1.0..1e6f64,
        income_frac in 0.0..0.95f64,
        g_a in 0.0..0.95f64,
        g_b in 0.0..0.95f64,
        p_uninsure in 0.0..1.0f64,
        e_indicator in 0.0..1.0f64,
    ) {
        let f_income = income_frac * f_med;
        let (lo, hi) = if g_a <= g_b { (g_a, g_b) } else { (g_b, g_a) };
        let p_lo =
            perfect_ensurance_closed(f_income, f_med, lo * f_med, p_uninsure, e_indicator)
                .unwrap();
        let p_hi =
            perfect_ensurance_closed(f_income, f_med, hi * f_med, p_uninsure, e_indicator)
                .unwrap();
        prop_assert!((0.0..=1.0).contains(&p_lo), "p_lo {p_lo}");
        prop_assert!((0.0..=1.0).contains(&p_hi), "p_hi {p_hi}");
        // More aid never lowers the index.
        prop_assert!(p_hi >= p_lo - 1e-12, "aid {lo}->{hi} dropped {p_lo} to {p_hi}");
    }

    #[test]
    fn mc_estimate_respects_its_bounds(
        lambda_med in 1.0..1500.0f64,
        mu_inc in 0.0..6000.0f64,
        sigma_inc in 10.0..3000.0f64,
        essential_expense in 0.0..4000.0f64,
        k_gov in 0.0..1.0f64,
        n_insured in 0u64..5_000_000,
        n_uninsured in 1u64..5_000_000,
        seed in any::<u64>(),
    ) {
        let model = PopulationModel {
            lambda_med,
            mu_inc,
            sigma_inc,
            essential_expense,
            k_gov,
            n_insured,
            n_uninsured,
            expense_quantum: 1.0,
        };
        let est = perfect_ensurance_mc(&model, 2048, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.shortage_ratio), "ratio {}", est.shortage_ratio);
        prop_assert!((0.0..=1.0).contains(&est.p_ei), "p_ei {}", est.p_ei);
        prop_assert!((0.0..=1.0).contains(&est.indicator_rate));
        prop_assert!(est.std_error >= 0.0);
        // Insured people never contribute shortage.
        prop_assert!(est.p_ei >= est.p_insure - 1e-12);
    }

    #[test]
    fn shortage_sample_is_consistent(
        x_med in 0.0..1e5f64,
        k_gov in 0.0..1.0f64,
        x_inc in -1e4..1e5f64,
        essential_expense in 0.0..1e4f64,
    ) {
        let s = shortage_sample(x_med, k_gov, x_inc, essential_expense).unwrap();
        prop_assert!((s.burden - x_med * (1.0 - k_gov)).abs() <= 1e-12 * x_med.max(1.0));
        prop_assert!(s.shortage >= 0.0);
        prop_assert_eq!(s.indicator, s.shortage > 0.0);
        if s.indicator {
            let expected = s.burden - (x_inc - essential_expense);
            prop_assert!((s.shortage - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn greedy_spends_exactly_the_budget(
        prob in arb_problem(),
        steps in 7u64..301,
    ) {
        let step = prob.f_total / steps as f64;
        let plan = greedy_allocate(&prob, step).unwrap();
        prop_assert!(plan.feasible);
        let spent = plan.x.sum();
        prop_assert!(
            (spent - prob.f_total).abs() <= 1e-12 * prob.f_total.max(1.0),
            "spent {spent} of {}", prob.f_total
        );
        prop_assert!(prob.baseline.0[0] + plan.x.0[0] <= prob.aid_cap() * (1.0 + 1e-12));
        let unspent = prob.objective(&ExpenditureVector::zeros()).unwrap();
        prop_assert!(plan.objective >= unspent - 1e-12);
    }

    #[test]
    fn luxury_index_is_a_share_that_necessities_shrink(
        r_essential in 0.0..1.0f64,
        r_complementary in 0.0..1.0f64,
        p_ei in 0.0..1.0f64,
        p_hc in 0.0..1.0f64,
        bump in 0.0..1.0f64,
    ) {
        prop_assume!(r_complementary + p_hc > 0.0 || r_essential + p_ei > 0.0);
        let base = LuxuryComponents { r_essential, r_complementary, p_ei, p_hc };
        let lux = luxury_index(&base).unwrap();
        prop_assert!((0.0..=1.0).contains(&lux), "luxury {lux}");
        let more_necessity = LuxuryComponents { p_ei: (p_ei + bump).min(1.0), ..base };
        let lux2 = luxury_index(&more_necessity).unwrap();
        prop_assert!(lux2 <= lux + 1e-12, "raising ensurance raised luxury {lux} -> {lux2}");
    }

    #[test]
    fn fairness_degree_is_a_scale_invariant_ratio(
        rural in 0.0..50.0f64,
        urban in 0.01..50.0f64,
        scale in 0.1..10.0f64,
    ) {
        let f = fairness_degree(&UrbanRuralSplit { rural_beds: rural, urban_beds: urban }).unwrap();
        prop_assert!(f >= 0.0);
        if rural <= urban {
            prop_assert!(f <= 1.0 + 1e-12);
        }
        let scaled =
            fairness_degree(&UrbanRuralSplit { rural_beds: rural * scale, urban_beds: urban * scale })
                .unwrap();
        prop_assert!((f - scaled).abs() <= 1e-9 * (1.0 + f));
    }

    #[test]
    fn calibration_preserves_the_density_rule(
        k_essential in proptest::array::uniform3(0.1..50.0f64),
        r_e in proptest::array::uniform3(0.1..50.0f64),
        r_c in proptest::array::uniform3(0.1..50.0f64),
    ) {
        let essential = ResourceBundle { doctors: r_e[0], nurses: r_e[1], beds: r_e[2] };
        let complementary = ResourceBundle { doctors: r_c[0], nurses: r_c[1], beds: r_c[2] };
        let sat = SaturationCoefficients::calibrated(k_essential, &essential, &complementary)
            .unwrap();
        // Half-saturation scales with density: k_c * R_c == k_e * R_e.
        for i in 0..3 {
            let lhs = sat.k_complementary[i] * r_c[i];
            let rhs = k_essential[i] * r_e[i];
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs, "axis {i}: {lhs} vs {rhs}");
        }
    }
}

prop_compose! {
    fn arb_problem()(
        money in (10.0..2000.0f64, 100.0..10_000.0f64, 0.0..0.9f64),
        shares in (0.0..1.0f64, 0.0..1.0f64, 0.01..2.0f64),
        n_units in proptest::array::uniform6(0.5..500.0f64),
        baseline in proptest::array::uniform9(0.0..40.0f64),
        research in (1.0..100.0f64, 1.0..100.0f64),
        k_e in proptest::array::uniform3(0.5..20.0f64),
        k_c in proptest::array::uniform3(0.5..20.0f64),
    ) -> AllocationProblem {
        let (f_total, f_med, income_frac) = money;
        let (p_uninsure, e_indicator, s_salary) = shares;
        let (k_n, k_m) = research;
        let mut baseline = baseline;
        // Keep the starting aid strictly under the cap.
        baseline[0] = baseline[0].min(0.9 * f_med);
        AllocationProblem {
            f_total,
            f_med,
            f_income: income_frac * f_med,
            p_uninsure,
            e_indicator,
            s_salary,
            n_unit_essential: [n_units[0], n_units[1], n_units[2]],
            n_unit_complementary: [n_units[3], n_units[4], n_units[5]],
            baseline: ExpenditureVector(baseline),
            coeffs: ModelCoefficients { k_q: 4.0, k_n, k_m, e0: 70.0, k_lt: 10.0, tau: 25 },
            sat: SaturationCoefficients::explicit(k_e, k_c).unwrap(),
        }
    }
}
