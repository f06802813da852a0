//! Diagnostic ratios layered on top of the life index: economic matching,
//! urban and rural fairness, and the luxury tilt of the system.

use serde::{Deserialize, Serialize};

use crate::error::{require_in_range, require_nonnegative, require_positive, ModelError};

/// Inputs of [`matching_degree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomicContext {
    /// Per-capita GDP, money units per person per year.
    pub per_capita_gdp: f64,
    /// The country's life index.
    pub life_index: f64,
}

/// Result of [`matching_degree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingDegree {
    /// `10 / (ln gdp - ln life_index)`.
    pub value: f64,
    /// Set when the life index exceeds per-capita GDP; the value is then
    /// negative and outside the calibrated regime.
    pub regime_warning: bool,
}

/// Matching degree between medical level and economic output.
///
/// `10 / (ln per_capita_gdp - ln life_index)`. Larger values mean the
/// medical level runs ahead of what the economy alone would predict. Equal
/// arguments hit the pole and raise a singularity error; a life index above
/// GDP flips the sign, which is reported as-is with `regime_warning` set.
pub fn matching_degree(ctx: &EconomicContext) -> Result<MatchingDegree, ModelError> {
    require_positive(ctx.per_capita_gdp, "per_capita_gdp")?;
    require_positive(ctx.life_index, "life_index")?;
    let gap = ctx.per_capita_gdp.ln() - ctx.life_index.ln();
    if gap == 0.0 {
        return Err(ModelError::singularity(format!(
            "per-capita GDP {} equals the life index; matching degree undefined",
            ctx.per_capita_gdp
        )));
    }
    Ok(MatchingDegree { value: 10.0 / gap, regime_warning: gap < 0.0 })
}

/// Hospital bed densities split by region, per 1000 population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UrbanRuralSplit {
    pub rural_beds: f64,
    pub urban_beds: f64,
}

/// Fairness degree: rural bed density over urban bed density.
///
/// 1 means parity; scale-invariant in the common unit.
pub fn fairness_degree(split: &UrbanRuralSplit) -> Result<f64, ModelError> {
    require_nonnegative(split.rural_beds, "rural_beds")?;
    require_positive(split.urban_beds, "urban_beds")?;
    Ok(split.rural_beds / split.urban_beds)
}

/// Inputs of [`luxury_index`]; every component lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuxuryComponents {
    /// Product of the essential resource shares.
    pub r_essential: f64,
    /// Product of the complementary resource shares.
    pub r_complementary: f64,
    /// Perfect ensurance index.
    pub p_ei: f64,
    /// Potential of health care.
    pub p_hc: f64,
}

/// Luxury index `D_un / (D_ne + D_un)` with the unnecessary degree
/// `D_un = r_complementary + p_hc` and the necessary degree
/// `D_ne = r_essential + p_ei`.
///
/// 0 means every effort goes to essentials; both degrees zero is a
/// degenerate domain error.
pub fn luxury_index(c: &LuxuryComponents) -> Result<f64, ModelError> {
    require_in_range(c.r_essential, 0.0, 1.0, "r_essential")?;
    require_in_range(c.r_complementary, 0.0, 1.0, "r_complementary")?;
    require_in_range(c.p_ei, 0.0, 1.0, "p_ei")?;
    require_in_range(c.p_hc, 0.0, 1.0, "p_hc")?;
    let d_unnecessary = c.r_complementary + c.p_hc;
    let d_necessary = c.r_essential + c.p_ei;
    if d_unnecessary == 0.0 && d_necessary == 0.0 {
        return Err(ModelError::domain("both luxury degrees are zero; index undefined"));
    }
    Ok(d_unnecessary / (d_necessary + d_unnecessary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_degree_log_gap_examples() {
        // A gdp / L ratio of e^10 gives 10 / 10 = 1; e^5 gives 2.
        let gdp = 46_000.0;
        let m10 = matching_degree(&EconomicContext { per_capita_gdp: gdp, life_index: gdp / 10f64.exp() })
            .unwrap();
        assert!((m10.value - 1.0).abs() < 1e-9, "got {}", m10.value);
        let m5 = matching_degree(&EconomicContext { per_capita_gdp: gdp, life_index: gdp / 5f64.exp() })
            .unwrap();
        assert!((m5.value - 2.0).abs() < 1e-9, "got {}", m5.value);
    }

    #[test]
    fn matching_degree_inverts_to_known_coefficient() {
        // L chosen so ln gdp - ln L = 10 / 1.66.
        let gdp = 46_000.0;
        let life = gdp / (10.0f64 / 1.66).exp();
        let m = matching_degree(&EconomicContext { per_capita_gdp: gdp, life_index: life }).unwrap();
        assert!((m.value - 1.66).abs() < 1e-9, "got {}", m.value);
        assert!(!m.regime_warning);
    }

    #[test]
    fn matching_degree_pole_and_inverted_regime() {
        assert!(matches!(
            matching_degree(&EconomicContext { per_capita_gdp: 50.0, life_index: 50.0 }),
            Err(ModelError::Singularity(_))
        ));
        let m = matching_degree(&EconomicContext { per_capita_gdp: 30.0, life_index: 60.0 }).unwrap();
        assert!(m.value < 0.0);
        assert!(m.regime_warning);
    }

    #[test]
    fn fairness_degree_example() {
        // 2.6 / 4.1 = 0.634146...
        let f = fairness_degree(&UrbanRuralSplit { rural_beds: 2.6, urban_beds: 4.1 }).unwrap();
        assert!((f - 0.6341463414634146).abs() < 1e-12);
        assert!(fairness_degree(&UrbanRuralSplit { rural_beds: 2.6, urban_beds: 0.0 }).is_err());
        // Parity above 1 is possible and meaningful.
        let f = fairness_degree(&UrbanRuralSplit { rural_beds: 5.0, urban_beds: 4.0 }).unwrap();
        assert!((f - 1.25).abs() < 1e-12);
    }

    #[test]
    fn luxury_index_example() {
        // D_un = 0.1 + 0.2 = 0.3, D_ne = 0.4 + 0.5 = 0.9, 0.3 / 1.2 = 0.25.
        let l = luxury_index(&LuxuryComponents {
            r_essential: 0.4,
            r_complementary: 0.1,
            p_ei: 0.5,
            p_hc: 0.2,
        })
        .unwrap();
        assert!((l - 0.25).abs() < 1e-12);
    }

    #[test]
    fn luxury_index_edges() {
        let all_necessary = LuxuryComponents {
            r_essential: 0.5,
            r_complementary: 0.0,
            p_ei: 0.5,
            p_hc: 0.0,
        };
        assert_eq!(luxury_index(&all_necessary).unwrap(), 0.0);
        let all_unnecessary = LuxuryComponents {
            r_essential: 0.0,
            r_complementary: 0.5,
            p_ei: 0.0,
            p_hc: 0.5,
        };
        assert_eq!(luxury_index(&all_unnecessary).unwrap(), 1.0);
        let degenerate = LuxuryComponents {
            r_essential: 0.0,
            r_complementary: 0.0,
            p_ei: 0.0,
            p_hc: 0.0,
        };
        assert!(luxury_index(&degenerate).is_err());
    }
}
