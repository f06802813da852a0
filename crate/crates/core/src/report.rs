//! Scenario evaluation: one country, one year, one report.
//!
//! [`evaluate_at_year`] runs the whole metric stack over a loaded
//! [`Scenario`] and returns every intermediate alongside the life index,
//! so callers never need to re-derive components. Two identities hold
//! exactly, not just within tolerance, because the report is built from
//! the same arithmetic:
//!
//! * `l_index == q_life * e_life`
//! * `q_life == (p_mr + p_ei + p_tech) / k_q`

use serde::{Deserialize, Serialize};

use crate::ensurance::{perfect_ensurance_mc, perfect_ensurance_quadrature};
use crate::error::ModelError;
use crate::metrics::{
    life_expectancy, life_index, potential_of_health_care, power_of_tech, quality_of_life,
    resource_share_products,
};
use crate::profiles::Scenario;
use crate::subordinate::{fairness_degree, luxury_index, matching_degree, EconomicContext, LuxuryComponents};

/// How the perfect ensurance index is estimated during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum EnsuranceMethod {
    /// Seeded, thread-count-independent Monte Carlo.
    MonteCarlo { samples: u64, seed: u64 },
    /// Deterministic truncated-Poisson quadrature.
    Quadrature { tail_eps: f64 },
}

/// Full evaluation result for one country and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub country: String,
    pub year: i32,
    /// The life index, `q_life * e_life`.
    pub l_index: f64,
    pub q_life: f64,
    /// Life expectancy, years.
    pub e_life: f64,
    /// Practical effect of medical resources, in `[0, 2)`.
    pub p_mr: f64,
    /// Perfect ensurance index, in `[0, 1]`.
    pub p_ei: f64,
    /// Standard error of `p_ei`; absent for deterministic estimators.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_ei_std_error: Option<f64>,
    /// Power of technology: research potential one delay ago, in `[0, 1)`.
    pub p_tech: f64,
    /// Potential of health care at the evaluation year, in `[0, 1)`.
    pub p_hc: f64,
    /// GDP-to-index matching degree; negative when the index outruns GDP.
    pub matching_degree: f64,
    /// Rural over urban bed density.
    pub fairness_degree: f64,
    /// Share of non-essential development in total development.
    pub luxury_index: f64,
    pub warnings: Vec<String>,
}

/// Evaluates the scenario at its own default year.
pub fn evaluate(scenario: &Scenario, method: &EnsuranceMethod) -> Result<MetricReport, ModelError> {
    evaluate_at_year(scenario, scenario.year, method)
}

/// Evaluates the scenario at an arbitrary year.
///
/// The research record must cover both `year` and `year - tau` under the
/// scenario's lookup policy.
pub fn evaluate_at_year(
    scenario: &Scenario,
    year: i32,
    method: &EnsuranceMethod,
) -> Result<MetricReport, ModelError> {
    let profile = &scenario.profile;
    let coeffs = &scenario.coeffs;
    let mut warnings = Vec::new();

    let (prod_e, prod_c) =
        resource_share_products(&profile.essential, &profile.complementary, &scenario.sat)?;
    let p_mr = prod_e + prod_c;

    let (p_ei, p_ei_std_error) = match *method {
        EnsuranceMethod::MonteCarlo { samples, seed } => {
            let est = perfect_ensurance_mc(&profile.population, samples, seed)?;
            (est.p_ei, Some(est.std_error))
        }
        EnsuranceMethod::Quadrature { tail_eps } => {
            (perfect_ensurance_quadrature(&profile.population, tail_eps)?, None)
        }
    };

    let p_tech = power_of_tech(&profile.research, year, coeffs, scenario.series_lookup)?;
    let current = profile.research.lookup(year, scenario.series_lookup)?;
    let p_hc = potential_of_health_care(current.staff, current.funding, coeffs)?;

    let q_life = quality_of_life(p_mr, p_ei, p_tech, coeffs)?;
    let e_life = life_expectancy(p_hc, coeffs)?;
    let l_index = life_index(q_life, e_life)?;

    let matching = matching_degree(&EconomicContext {
        per_capita_gdp: profile.per_capita_gdp,
        life_index: l_index,
    })?;
    if matching.regime_warning {
        warnings.push(format!(
            "life index {l_index:.4} exceeds the per-capita GDP scale; matching degree is negative"
        ));
    }
    let fairness = fairness_degree(&profile.beds_split)?;
    let luxury = luxury_index(&LuxuryComponents {
        r_essential: prod_e,
        r_complementary: prod_c,
        p_ei,
        p_hc,
    })?;

    Ok(MetricReport {
        country: profile.name.clone(),
        year,
        l_index,
        q_life,
        e_life,
        p_mr,
        p_ei,
        p_ei_std_error,
        p_tech,
        p_hc,
        matching_degree: matching.value,
        fairness_degree: fairness,
        luxury_index: luxury,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensurance::PopulationModel;
    use crate::metrics::{
        ModelCoefficients, ResearchEntry, ResearchSeries, ResourceBundle, SaturationCoefficients,
        SeriesLookup,
    };
    use crate::profiles::CountryProfile;
    use crate::subordinate::UrbanRuralSplit;
    use std::path::PathBuf;

    /// Every share sits at half saturation, so p_mr = 0.25 and
    /// p_hc = p_tech = 0.25; the population model is the ensurance test
    /// oracle with an 85% insured population.
    fn scenario() -> Scenario {
        let coeffs = ModelCoefficients {
            k_q: 4.0,
            k_n: 20_000.0,
            k_m: 3_000.0,
            e0: 70.0,
            k_lt: 10.0,
            tau: 25,
        };
        Scenario {
            profile: CountryProfile {
                name: "Testland".to_string(),
                per_capita_gdp: 30_000.0,
                essential: ResourceBundle { doctors: 2.5, nurses: 10.0, beds: 3.0 },
                complementary: ResourceBundle { doctors: 8.0, nurses: 64.0, beds: 9.0 },
                beds_split: UrbanRuralSplit { rural_beds: 2.2, urban_beds: 3.2 },
                population: PopulationModel {
                    lambda_med: 800.0,
                    mu_inc: 3000.0,
                    sigma_inc: 1000.0,
                    essential_expense: 2500.0,
                    k_gov: 0.3,
                    n_insured: 850,
                    n_uninsured: 150,
                    expense_quantum: 1.0,
                },
                research: ResearchSeries::new(vec![
                    ResearchEntry { year: 1985, staff: 20_000.0, funding: 3_000.0 },
                    ResearchEntry { year: 2010, staff: 20_000.0, funding: 3_000.0 },
                ])
                .unwrap(),
            },
            profile_path: PathBuf::from("testland.toml"),
            year: 2010,
            series_lookup: SeriesLookup::Strict,
            coeffs,
            sat: SaturationCoefficients {
                k_essential: [2.5, 10.0, 3.0],
                k_complementary: [8.0, 64.0, 9.0],
            },
            allocation: None,
        }
    }

    #[test]
    fn quadrature_report_holds_identities_and_frozen_values() {
        let s = scenario();
        let r = evaluate(&s, &EnsuranceMethod::Quadrature { tail_eps: 1e-12 }).unwrap();
        assert_eq!(r.year, 2010);
        assert_eq!(r.country, "Testland");
        // Identities are exact by construction.
        assert_eq!(r.l_index, r.q_life * r.e_life);
        assert_eq!(r.q_life, (r.p_mr + r.p_ei + r.p_tech) / 4.0);
        // All six resource shares at one half.
        assert!((r.p_mr - 0.25).abs() < 1e-12);
        assert!((r.p_hc - 0.25).abs() < 1e-12);
        assert!((r.p_tech - 0.25).abs() < 1e-12);
        assert_eq!(r.e_life, 72.5);
        // Frozen quadrature value of the oracle population model.
        assert!((r.p_ei - 0.8848915523644016).abs() < 1e-9);
        assert!(r.p_ei_std_error.is_none());
        assert_eq!(r.fairness_degree, 2.2 / 3.2);
        // luxury = (0.125 + 0.25) / ((0.125 + p_ei) + (0.125 + 0.25)).
        let expected_luxury = 0.375 / (0.125 + r.p_ei + 0.375);
        assert!((r.luxury_index - expected_luxury).abs() < 1e-12);
        assert!(r.matching_degree > 0.0);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn mc_report_consistent_with_quadrature() {
        let s = scenario();
        let quad = evaluate(&s, &EnsuranceMethod::Quadrature { tail_eps: 1e-12 }).unwrap();
        let mc = evaluate(&s, &EnsuranceMethod::MonteCarlo { samples: 200_000, seed: 7 }).unwrap();
        let se = mc.p_ei_std_error.expect("MC must report a standard error");
        assert!(se > 0.0);
        assert!(
            (mc.p_ei - quad.p_ei).abs() <= 4.0 * se,
            "MC {} vs quadrature {} exceeds 4 SE ({se})",
            mc.p_ei,
            quad.p_ei
        );
        // Everything not involving the estimator is identical.
        assert_eq!(mc.p_mr, quad.p_mr);
        assert_eq!(mc.p_hc, quad.p_hc);
        assert_eq!(mc.p_tech, quad.p_tech);
    }

    #[test]
    fn evaluate_is_deterministic() {
        let s = scenario();
        let method = EnsuranceMethod::MonteCarlo { samples: 100_000, seed: 42 };
        let a = evaluate(&s, &method).unwrap();
        let b = evaluate(&s, &method).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evaluate_at_year_respects_lookup_policy() {
        let s = scenario();
        // 2011 - 25 = 1986 missing: strict fails, nearest-prior works.
        let err = evaluate_at_year(&s, 2011, &EnsuranceMethod::Quadrature { tail_eps: 1e-12 });
        assert!(matches!(err, Err(ModelError::MissingYear { year: 1986, .. })));
        let mut lenient = s.clone();
        lenient.series_lookup = SeriesLookup::NearestPrior;
        let r = evaluate_at_year(&lenient, 2011, &EnsuranceMethod::Quadrature { tail_eps: 1e-12 })
            .unwrap();
        assert_eq!(r.year, 2011);
        assert!((r.p_tech - 0.25).abs() < 1e-12);
    }

    #[test]
    fn regime_warning_when_index_exceeds_gdp_scale() {
        let mut s = scenario();
        // A per-capita GDP below the index value flips the log gap negative.
        s.profile.per_capita_gdp = 10.0;
        let r = evaluate(&s, &EnsuranceMethod::Quadrature { tail_eps: 1e-12 }).unwrap();
        assert!(r.matching_degree < 0.0);
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("matching degree is negative"));
    }
}
