//! The core metric stack: saturating resource shares and the life index.
//!
//! Everything here is built from one primitive, the monomial saturating
//! share `x / (x + k)`. It rises from 0 toward 1, crosses one half exactly
//! at `x = k`, and has diminishing returns throughout, which is the shape
//! wanted for "more resources help, but less and less".

use serde::{Deserialize, Serialize};

use crate::error::{
    require_finite, require_in_range, require_nonnegative, require_positive, ModelError,
};

/// Default divisor for the quality-of-life average.
pub const DEFAULT_K_Q: f64 = 4.0;
/// Default base life expectancy, years. A demonstration value, not a fit.
pub const DEFAULT_E0: f64 = 70.0;
/// Default life expectancy gain at full research potential, years.
/// A demonstration value, not a fit.
pub const DEFAULT_K_LT: f64 = 10.0;
/// Default publication-to-practice delay, years.
pub const DEFAULT_TAU: u32 = 25;

/// The saturating share `x / (x + k)`.
///
/// Strictly increasing in `x`, strictly decreasing in `k`, equal to 0.5 at
/// `x = k`. The exact value is always below 1; in floating point the result
/// rounds to exactly 1.0 once `x / k` exceeds roughly `4.5e15`.
///
/// Errors: `x` must be finite and nonnegative, `k` finite and positive.
pub fn saturating_share(x: f64, k: f64) -> Result<f64, ModelError> {
    require_nonnegative(x, "saturating share input x")?;
    require_positive(k, "saturation coefficient k")?;
    Ok(x / (x + k))
}

/// Per-1000-population densities of the three core medical resources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceBundle {
    pub doctors: f64,
    pub nurses: f64,
    pub beds: f64,
}

impl ResourceBundle {
    pub fn as_array(&self) -> [f64; 3] {
        [self.doctors, self.nurses, self.beds]
    }

    pub fn validate(&self, label: &str) -> Result<(), ModelError> {
        require_nonnegative(self.doctors, &format!("{label} doctors density"))?;
        require_nonnegative(self.nurses, &format!("{label} nurses density"))?;
        require_nonnegative(self.beds, &format!("{label} beds density"))?;
        Ok(())
    }
}

/// Half-saturation constants for the essential and complementary resource
/// triples, in the same per-1000 units as [`ResourceBundle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationCoefficients {
    pub k_essential: [f64; 3],
    pub k_complementary: [f64; 3],
}

impl SaturationCoefficients {
    /// Builds from explicit constants for both triples.
    pub fn explicit(k_essential: [f64; 3], k_complementary: [f64; 3]) -> Result<Self, ModelError> {
        for (i, k) in k_essential.iter().enumerate() {
            require_positive(*k, &format!("k_essential[{i}]"))?;
        }
        for (i, k) in k_complementary.iter().enumerate() {
            require_positive(*k, &format!("k_complementary[{i}]"))?;
        }
        Ok(SaturationCoefficients { k_essential, k_complementary })
    }

    /// Builds the complementary constants from a baseline country so that
    /// `R_e,i * k_e,i = R_c,i * k_c,i` holds at the baseline densities.
    ///
    /// Fails with a diagnostic if any baseline complementary density is zero;
    /// supply explicit constants in that case.
    pub fn calibrated(
        k_essential: [f64; 3],
        baseline_essential: &ResourceBundle,
        baseline_complementary: &ResourceBundle,
    ) -> Result<Self, ModelError> {
        baseline_essential.validate("baseline essential")?;
        baseline_complementary.validate("baseline complementary")?;
        let r_e = baseline_essential.as_array();
        let r_c = baseline_complementary.as_array();
        let mut k_complementary = [0.0; 3];
        for i in 0..3 {
            require_positive(k_essential[i], &format!("k_essential[{i}]"))?;
            if r_c[i] <= 0.0 {
                return Err(ModelError::domain(format!(
                    "cannot calibrate k_complementary[{i}]: baseline complementary density is 0; \
                     supply k_complementary explicitly"
                )));
            }
            k_complementary[i] = r_e[i] * k_essential[i] / r_c[i];
        }
        Ok(SaturationCoefficients { k_essential, k_complementary })
    }

    /// Largest relative residual of the calibration identity
    /// `R_e,i * k_e,i = R_c,i * k_c,i` at the given densities.
    pub fn calibration_residual(
        &self,
        essential: &ResourceBundle,
        complementary: &ResourceBundle,
    ) -> f64 {
        let r_e = essential.as_array();
        let r_c = complementary.as_array();
        let mut worst = 0.0f64;
        for i in 0..3 {
            let lhs = r_e[i] * self.k_essential[i];
            let rhs = r_c[i] * self.k_complementary[i];
            let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, k) in self.k_essential.iter().enumerate() {
            require_positive(*k, &format!("k_essential[{i}]"))?;
        }
        for (i, k) in self.k_complementary.iter().enumerate() {
            require_positive(*k, &format!("k_complementary[{i}]"))?;
        }
        Ok(())
    }
}

/// The two halves of [`practical_effect`]: the product of the three
/// essential shares and the product of the three complementary shares.
/// Each product lies in `[0, 1)`.
pub fn resource_share_products(
    essential: &ResourceBundle,
    complementary: &ResourceBundle,
    sat: &SaturationCoefficients,
) -> Result<(f64, f64), ModelError> {
    essential.validate("essential")?;
    complementary.validate("complementary")?;
    let r_e = essential.as_array();
    let r_c = complementary.as_array();
    let mut prod_e = 1.0;
    let mut prod_c = 1.0;
    for i in 0..3 {
        prod_e *= saturating_share(r_e[i], sat.k_essential[i])?;
        prod_c *= saturating_share(r_c[i], sat.k_complementary[i])?;
    }
    Ok((prod_e, prod_c))
}

/// Practical effect of medical resources, `P_mr`, in `[0, 2)`.
///
/// Sum of the essential and complementary share products. The result is 0
/// exactly when at least one essential and at least one complementary
/// density is 0.
pub fn practical_effect(
    essential: &ResourceBundle,
    complementary: &ResourceBundle,
    sat: &SaturationCoefficients,
) -> Result<f64, ModelError> {
    let (prod_e, prod_c) = resource_share_products(essential, complementary, sat)?;
    Ok(prod_e + prod_c)
}

/// One year of the medical research record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResearchEntry {
    pub year: i32,
    /// Research staff headcount.
    pub staff: f64,
    /// Research funding, millions of currency units.
    pub funding: f64,
}

/// How a research series lookup treats a year with no entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesLookup {
    /// Missing years are an error.
    #[default]
    Strict,
    /// Fall back to the closest earlier entry.
    NearestPrior,
}

/// Yearly research staff and funding, strictly increasing in year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ResearchEntry>", into = "Vec<ResearchEntry>")]
pub struct ResearchSeries {
    entries: Vec<ResearchEntry>,
}

impl ResearchSeries {
    pub fn new(entries: Vec<ResearchEntry>) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::domain("research series must not be empty"));
        }
        for pair in entries.windows(2) {
            if pair[1].year <= pair[0].year {
                return Err(ModelError::domain(format!(
                    "research series years must strictly increase, got {} after {}",
                    pair[1].year, pair[0].year
                )));
            }
        }
        for e in &entries {
            require_nonnegative(e.staff, &format!("research staff in {}", e.year))?;
            require_nonnegative(e.funding, &format!("research funding in {}", e.year))?;
        }
        Ok(ResearchSeries { entries })
    }

    pub fn entries(&self) -> &[ResearchEntry] {
        &self.entries
    }

    pub fn first_year(&self) -> i32 {
        self.entries[0].year
    }

    pub fn last_year(&self) -> i32 {
        self.entries[self.entries.len() - 1].year
    }

    /// Finds the entry for `year` under the given miss policy.
    pub fn lookup(&self, year: i32, policy: SeriesLookup) -> Result<&ResearchEntry, ModelError> {
        match self.entries.binary_search_by_key(&year, |e| e.year) {
            Ok(idx) => Ok(&self.entries[idx]),
            Err(insert) => match policy {
                SeriesLookup::Strict => Err(ModelError::MissingYear {
                    year,
                    detail: format!(
                        "series covers {}..={} (strict lookup)",
                        self.first_year(),
                        self.last_year()
                    ),
                }),
                SeriesLookup::NearestPrior if insert > 0 => Ok(&self.entries[insert - 1]),
                SeriesLookup::NearestPrior => Err(ModelError::MissingYear {
                    year,
                    detail: format!("no entry at or before {year}; series starts {}", self.first_year()),
                }),
            },
        }
    }
}

impl TryFrom<Vec<ResearchEntry>> for ResearchSeries {
    type Error = ModelError;

    fn try_from(entries: Vec<ResearchEntry>) -> Result<Self, Self::Error> {
        ResearchSeries::new(entries)
    }
}

impl From<ResearchSeries> for Vec<ResearchEntry> {
    fn from(series: ResearchSeries) -> Self {
        series.entries
    }
}

/// Coefficients shared by the whole metric stack.
///
/// `k_n` and `k_m` (half-saturation of research staff and funding) have no
/// sensible universal default and must be supplied. `e0` and `k_lt` default
/// to demonstration values and should be calibrated before serious use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoefficients {
    /// Divisor of the quality-of-life average, default 4.
    #[serde(default = "default_k_q")]
    pub k_q: f64,
    /// Half-saturation research staff headcount.
    pub k_n: f64,
    /// Half-saturation research funding, millions of currency units.
    pub k_m: f64,
    /// Base life expectancy, years.
    #[serde(default = "default_e0")]
    pub e0: f64,
    /// Life expectancy gain at full research potential, years.
    #[serde(default = "default_k_lt")]
    pub k_lt: f64,
    /// Publication-to-practice delay, whole years.
    #[serde(default = "default_tau")]
    pub tau: u32,
}

fn default_k_q() -> f64 {
    DEFAULT_K_Q
}

fn default_e0() -> f64 {
    DEFAULT_E0
}

fn default_k_lt() -> f64 {
    DEFAULT_K_LT
}

fn default_tau() -> u32 {
    DEFAULT_TAU
}

impl ModelCoefficients {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive(self.k_q, "k_q")?;
        require_positive(self.k_n, "k_n")?;
        require_positive(self.k_m, "k_m")?;
        require_positive(self.e0, "e0")?;
        require_positive(self.k_lt, "k_lt")?;
        Ok(())
    }
}

/// Potential of health care, `P_hc`, in `[0, 1)`: the product of the staff
/// share and the funding share.
pub fn potential_of_health_care(
    staff: f64,
    funding: f64,
    coeffs: &ModelCoefficients,
) -> Result<f64, ModelError> {
    coeffs.validate()?;
    let staff_share = saturating_share(staff, coeffs.k_n)?;
    let funding_share = saturating_share(funding, coeffs.k_m)?;
    Ok(staff_share * funding_share)
}

/// Power of technology, `P_tech(t) = P_hc(t - tau)`.
///
/// Looks the research record up `coeffs.tau` years before `year` and
/// evaluates [`potential_of_health_care`] there.
pub fn power_of_tech(
    series: &ResearchSeries,
    year: i32,
    coeffs: &ModelCoefficients,
    policy: SeriesLookup,
) -> Result<f64, ModelError> {
    let target = year
        .checked_sub_unsigned(coeffs.tau)
        .ok_or_else(|| ModelError::domain(format!("year {year} minus delay {} overflows", coeffs.tau)))?;
    let entry = series.lookup(target, policy)?;
    potential_of_health_care(entry.staff, entry.funding, coeffs)
}

/// Life expectancy `E_life = e0 + k_lt * P_hc`, years.
pub fn life_expectancy(p_hc: f64, coeffs: &ModelCoefficients) -> Result<f64, ModelError> {
    coeffs.validate()?;
    require_finite(p_hc, "p_hc")?;
    if !(0.0..1.0).contains(&p_hc) {
        return Err(ModelError::domain(format!("p_hc must lie in [0, 1), got {p_hc}")));
    }
    Ok(coeffs.e0 + coeffs.k_lt * p_hc)
}

/// Quality of life `Q_life = (P_mr + P_ei + P_tech) / k_q`.
///
/// With the default `k_q = 4` and the component ranges `[0, 2)`, `[0, 1]`
/// and `[0, 1)`, the result stays below 1.
pub fn quality_of_life(
    p_mr: f64,
    p_ei: f64,
    p_tech: f64,
    coeffs: &ModelCoefficients,
) -> Result<f64, ModelError> {
    coeffs.validate()?;
    require_finite(p_mr, "p_mr")?;
    if !(0.0..2.0).contains(&p_mr) {
        return Err(ModelError::domain(format!("p_mr must lie in [0, 2), got {p_mr}")));
    }
    require_in_range(p_ei, 0.0, 1.0, "p_ei")?;
    require_finite(p_tech, "p_tech")?;
    if !(0.0..1.0).contains(&p_tech) {
        return Err(ModelError::domain(format!("p_tech must lie in [0, 1), got {p_tech}")));
    }
    Ok((p_mr + p_ei + p_tech) / coeffs.k_q)
}

/// The life index `L = Q_life * E_life`.
pub fn life_index(q_life: f64, e_life: f64) -> Result<f64, ModelError> {
    require_nonnegative(q_life, "q_life")?;
    require_positive(e_life, "e_life")?;
    Ok(q_life * e_life)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs() -> ModelCoefficients {
        ModelCoefficients {
            k_q: 4.0,
            k_n: 180_000.0,
            k_m: 15_000.0,
            e0: 70.0,
            k_lt: 10.0,
            tau: 25,
        }
    }

    #[test]
    fn share_at_zero_is_zero() {
        assert_eq!(saturating_share(0.0, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn share_at_half_saturation_is_half() {
        assert_eq!(saturating_share(2.5, 2.5).unwrap(), 0.5);
    }

    #[test]
    fn share_approaches_one_from_below() {
        let s = saturating_share(1e12, 1.0).unwrap();
        assert!(s < 1.0, "share must stay below 1, got {s}");
        assert!((1.0 - s).abs() < 1e-9, "share should be within 1e-9 of 1, got {s}");
    }

    #[test]
    fn share_rejects_bad_inputs() {
        assert!(saturating_share(-1.0, 1.0).is_err());
        assert!(saturating_share(f64::NAN, 1.0).is_err());
        assert!(saturating_share(1.0, 0.0).is_err());
        assert!(saturating_share(1.0, -2.0).is_err());
        assert!(saturating_share(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn practical_effect_at_half_saturation_everywhere() {
        // Six shares of 0.5: each product is 0.125, the sum 0.25.
        let r = ResourceBundle { doctors: 2.0, nurses: 3.0, beds: 1.5 };
        let sat = SaturationCoefficients::explicit([2.0, 3.0, 1.5], [2.0, 3.0, 1.5]).unwrap();
        let p = practical_effect(&r, &r, &sat).unwrap();
        assert!((p - 0.25).abs() < 1e-12, "expected 0.25, got {p}");
    }

    #[test]
    fn practical_effect_calibrated_example() {
        // Essential densities sit exactly at their half-saturation constants,
        // so the essential product is 0.125. The complementary constants are
        // calibrated from the same baseline, giving k_c = (9.6, 12.0125,
        // 90/7) and shares 0.6/10.2, 0.8/12.8125, 0.7/(0.7 + 90/7); their
        // product is 1.89643e-4. Total 0.125189643103894.
        let essential = ResourceBundle { doctors: 2.4, nurses: 3.1, beds: 3.0 };
        let complementary = ResourceBundle { doctors: 0.6, nurses: 0.8, beds: 0.7 };
        let sat =
            SaturationCoefficients::calibrated([2.4, 3.1, 3.0], &essential, &complementary).unwrap();
        assert!(sat.calibration_residual(&essential, &complementary) < 1e-9);
        let p = practical_effect(&essential, &complementary, &sat).unwrap();
        assert!((p - 0.125189643103894).abs() < 1e-12, "got {p}");
        assert!((p - 0.125184).abs() < 1e-5);
    }

    #[test]
    fn practical_effect_zero_only_when_both_products_vanish() {
        let sat = SaturationCoefficients::explicit([1.0; 3], [1.0; 3]).unwrap();
        let zeroed = ResourceBundle { doctors: 0.0, nurses: 5.0, beds: 5.0 };
        let full = ResourceBundle { doctors: 5.0, nurses: 5.0, beds: 5.0 };
        assert_eq!(practical_effect(&zeroed, &zeroed, &sat).unwrap(), 0.0);
        assert!(practical_effect(&zeroed, &full, &sat).unwrap() > 0.0);
        assert!(practical_effect(&full, &zeroed, &sat).unwrap() > 0.0);
    }

    #[test]
    fn calibration_rejects_zero_baseline_complementary() {
        let essential = ResourceBundle { doctors: 2.4, nurses: 3.1, beds: 3.0 };
        let complementary = ResourceBundle { doctors: 0.0, nurses: 0.8, beds: 0.7 };
        let err =
            SaturationCoefficients::calibrated([2.4, 3.1, 3.0], &essential, &complementary)
                .unwrap_err();
        assert!(err.to_string().contains("k_complementary"), "got: {err}");
    }

    #[test]
    fn potential_at_half_saturation() {
        let c = coeffs();
        let p = potential_of_health_care(c.k_n, c.k_m, &c).unwrap();
        assert!((p - 0.25).abs() < 1e-12, "0.5 * 0.5 = 0.25, got {p}");
        // Staff at three times half-saturation: 0.75 * 0.5 = 0.375.
        let p = potential_of_health_care(3.0 * c.k_n, c.k_m, &c).unwrap();
        assert!((p - 0.375).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn power_of_tech_looks_back_tau_years() {
        let c = coeffs();
        let series = ResearchSeries::new(vec![
            ResearchEntry { year: 1985, staff: c.k_n, funding: c.k_m },
            ResearchEntry { year: 2010, staff: 3.0 * c.k_n, funding: c.k_m },
        ])
        .unwrap();
        // 2010 - 25 = 1985, both factors at half saturation.
        let p = power_of_tech(&series, 2010, &c, SeriesLookup::Strict).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
        // 2011 - 25 = 1986 is absent: strict fails, nearest-prior uses 1985.
        assert!(matches!(
            power_of_tech(&series, 2011, &c, SeriesLookup::Strict),
            Err(ModelError::MissingYear { year: 1986, .. })
        ));
        let p = power_of_tech(&series, 2011, &c, SeriesLookup::NearestPrior).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn series_rejects_unsorted_years() {
        let entries = vec![
            ResearchEntry { year: 2000, staff: 1.0, funding: 1.0 },
            ResearchEntry { year: 2000, staff: 2.0, funding: 2.0 },
        ];
        assert!(ResearchSeries::new(entries).is_err());
    }

    #[test]
    fn life_expectancy_examples() {
        let c = coeffs();
        assert_eq!(life_expectancy(0.5, &c).unwrap(), 75.0);
        assert_eq!(life_expectancy(0.375, &c).unwrap(), 73.75);
        assert!(life_expectancy(1.0, &c).is_err());
        assert!(life_expectancy(-0.1, &c).is_err());
    }

    #[test]
    fn quality_of_life_example() {
        let q = quality_of_life(0.25, 1.0, 0.25, &coeffs()).unwrap();
        assert_eq!(q, 0.375);
    }

    #[test]
    fn quality_of_life_stays_below_one_at_extremes() {
        let q = quality_of_life(2.0 - 1e-12, 1.0, 1.0 - 1e-12, &coeffs()).unwrap();
        assert!(q < 1.0, "got {q}");
    }

    #[test]
    fn quality_of_life_rejects_out_of_range_components() {
        let c = coeffs();
        assert!(quality_of_life(2.0, 1.0, 0.5, &c).is_err());
        assert!(quality_of_life(0.5, 1.1, 0.5, &c).is_err());
        assert!(quality_of_life(0.5, 1.0, 1.0, &c).is_err());
    }

    #[test]
    fn life_index_example() {
        // 0.375 * 73.75 = 27.65625.
        assert_eq!(life_index(0.375, 73.75).unwrap(), 27.65625);
        assert!(life_index(-0.1, 70.0).is_err());
        assert!(life_index(0.5, 0.0).is_err());
    }
}
