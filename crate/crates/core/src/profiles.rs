//! TOML country profiles and evaluation scenarios.
//!
//! A *country profile* (`country-profile/v1`) carries the observed facts
//! about one country: resource densities, insurance counts, the population
//! spending model and the yearly research record. An *evaluation scenario*
//! (`evaluation-scenario/v1`) points at a profile and adds everything
//! needed to score it: model coefficients, saturation constants and,
//! optionally, a budget allocation block.
//!
//! Loading validates eagerly and collects every problem found into one
//! [`ProfileError::Validation`] rather than stopping at the first.
//! [`save_profile`] writes canonically (fixed key order, atomic replace),
//! so save followed by load is the identity and saving twice produces
//! byte-identical files.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::allocator::{AllocationProblem, ExpenditureVector};
use crate::ensurance::{indicator_rate_quadrature, PopulationModel, DEFAULT_TAIL_EPS};
use crate::error::ModelError;
use crate::metrics::{
    ModelCoefficients, ResearchEntry, ResearchSeries, ResourceBundle, SaturationCoefficients,
    SeriesLookup,
};
use crate::subordinate::UrbanRuralSplit;

/// Schema tag of a country profile document.
pub const PROFILE_SCHEMA: &str = "country-profile/v1";
/// Schema tag of an evaluation scenario document.
pub const SCENARIO_SCHEMA: &str = "evaluation-scenario/v1";

/// The only accepted unit declarations. Everything downstream assumes them,
/// so a profile in other units must be converted before loading.
pub const EXPECTED_CURRENCY: &str = "USD";
pub const EXPECTED_FUNDING_UNITS: &str = "millions USD";
pub const EXPECTED_RESOURCE_BASIS: &str = "per 1000 population";

/// One problem found while validating a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Dotted path of the offending field, e.g. `units.currency`.
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Errors from profile and scenario I/O.
#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("cannot access {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
    #[error("scenario references missing profile {}", .path.display())]
    MissingProfile { path: PathBuf },
    #[error("{} failed validation:{}", .path.display(), format_violations(.violations))]
    Validation { path: PathBuf, violations: Vec<Violation> },
}

fn format_violations(violations: &[Violation]) -> String {
    let mut out = String::new();
    for v in violations {
        out.push_str("\n  - ");
        out.push_str(&v.to_string());
    }
    out
}

// ---------------------------------------------------------------------------
// On-disk document shapes. Scalar fields are declared before tables so the
// canonical serialization is valid TOML with a fixed key order.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    schema: String,
    country: CountrySection,
    insurance: InsuranceSection,
    population: PopulationSection,
    research: Vec<ResearchEntry>,
    resources: ResourcesSection,
    units: UnitsSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountrySection {
    name: String,
    per_capita_gdp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InsuranceSection {
    n_insured: u64,
    n_uninsured: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationSection {
    essential_expense: f64,
    #[serde(default = "one")]
    expense_quantum: f64,
    k_gov: f64,
    lambda_med: f64,
    mu_inc: f64,
    sigma_inc: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResourcesSection {
    beds_split: UrbanRuralSplit,
    complementary: ResourceBundle,
    essential: ResourceBundle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitsSection {
    currency: String,
    funding: String,
    resource_basis: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    profile: String,
    schema: String,
    #[serde(default)]
    series_lookup: SeriesLookup,
    year: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    allocation: Option<AllocationSection>,
    coefficients: ModelCoefficients,
    saturation: SaturationSection,
}

/// Saturation constants come either spelled out or calibrated against a
/// baseline country's densities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
enum SaturationSection {
    Explicit { k_complementary: [f64; 3], k_essential: [f64; 3] },
    Calibrated {
        k_essential: [f64; 3],
        baseline_complementary: ResourceBundle,
        baseline_essential: ResourceBundle,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationSection {
    baseline: [f64; 9],
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_indicator: Option<f64>,
    f_income: f64,
    f_med: f64,
    n_unit_complementary: [f64; 3],
    n_unit_essential: [f64; 3],
    s_salary: f64,
    #[serde(default = "default_tail_eps")]
    tail_eps: f64,
}

fn default_tail_eps() -> f64 {
    DEFAULT_TAIL_EPS
}

// ---------------------------------------------------------------------------
// Public shapes.

/// Everything a profile document says about one country.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryProfile {
    pub name: String,
    pub per_capita_gdp: f64,
    /// Essential resource densities, per 1000 population.
    pub essential: ResourceBundle,
    /// Complementary resource densities, per 1000 population.
    pub complementary: ResourceBundle,
    pub beds_split: UrbanRuralSplit,
    /// Spending model including the insured and uninsured headcounts.
    pub population: PopulationModel,
    pub research: ResearchSeries,
}

impl CountryProfile {
    /// Collects every semantic problem; an empty vector means valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.name.trim().is_empty() {
            out.push(Violation::new("country.name", "must not be empty"));
        }
        if !(self.per_capita_gdp > 0.0 && self.per_capita_gdp.is_finite()) {
            out.push(Violation::new(
                "country.per_capita_gdp",
                format!("must be positive and finite, got {}", self.per_capita_gdp),
            ));
        }
        if let Err(e) = self.essential.validate("essential") {
            out.push(Violation::new("resources.essential", e.to_string()));
        }
        if let Err(e) = self.complementary.validate("complementary") {
            out.push(Violation::new("resources.complementary", e.to_string()));
        }
        if !(self.beds_split.urban_beds > 0.0 && self.beds_split.urban_beds.is_finite()) {
            out.push(Violation::new(
                "resources.beds_split.urban_beds",
                format!("must be positive and finite, got {}", self.beds_split.urban_beds),
            ));
        }
        if !(self.beds_split.rural_beds >= 0.0 && self.beds_split.rural_beds.is_finite()) {
            out.push(Violation::new(
                "resources.beds_split.rural_beds",
                format!("must be nonnegative and finite, got {}", self.beds_split.rural_beds),
            ));
        }
        if let Err(e) = self.population.validate() {
            out.push(Violation::new("population", e.to_string()));
        }
        out
    }
}

fn profile_from_doc(doc: ProfileDoc, path: &Path) -> Result<CountryProfile, ProfileError> {
    let mut violations = Vec::new();
    if doc.units.currency != EXPECTED_CURRENCY {
        violations.push(Violation::new(
            "units.currency",
            format!("expected {EXPECTED_CURRENCY:?}, got {:?}", doc.units.currency),
        ));
    }
    if doc.units.funding != EXPECTED_FUNDING_UNITS {
        violations.push(Violation::new(
            "units.funding",
            format!("expected {EXPECTED_FUNDING_UNITS:?}, got {:?}", doc.units.funding),
        ));
    }
    if doc.units.resource_basis != EXPECTED_RESOURCE_BASIS {
        violations.push(Violation::new(
            "units.resource_basis",
            format!("expected {EXPECTED_RESOURCE_BASIS:?}, got {:?}", doc.units.resource_basis),
        ));
    }
    let research = match ResearchSeries::new(doc.research) {
        Ok(series) => Some(series),
        Err(e) => {
            violations.push(Violation::new("research", e.to_string()));
            None
        }
    };
    let profile = research.map(|research| CountryProfile {
        name: doc.country.name,
        per_capita_gdp: doc.country.per_capita_gdp,
        essential: doc.resources.essential,
        complementary: doc.resources.complementary,
        beds_split: doc.resources.beds_split,
        population: PopulationModel {
            lambda_med: doc.population.lambda_med,
            mu_inc: doc.population.mu_inc,
            sigma_inc: doc.population.sigma_inc,
            essential_expense: doc.population.essential_expense,
            k_gov: doc.population.k_gov,
            n_insured: doc.insurance.n_insured,
            n_uninsured: doc.insurance.n_uninsured,
            expense_quantum: doc.population.expense_quantum,
        },
        research,
    });
    if let Some(ref p) = profile {
        violations.extend(p.violations());
    }
    if violations.is_empty() {
        Ok(profile.expect("no violations implies the series parsed"))
    } else {
        Err(ProfileError::Validation { path: path.to_path_buf(), violations })
    }
}

fn doc_from_profile(profile: &CountryProfile) -> ProfileDoc {
    ProfileDoc {
        schema: PROFILE_SCHEMA.to_string(),
        country: CountrySection {
            name: profile.name.clone(),
            per_capita_gdp: profile.per_capita_gdp,
        },
        insurance: InsuranceSection {
            n_insured: profile.population.n_insured,
            n_uninsured: profile.population.n_uninsured,
        },
        population: PopulationSection {
            essential_expense: profile.population.essential_expense,
            expense_quantum: profile.population.expense_quantum,
            k_gov: profile.population.k_gov,
            lambda_med: profile.population.lambda_med,
            mu_inc: profile.population.mu_inc,
            sigma_inc: profile.population.sigma_inc,
        },
        research: profile.research.entries().to_vec(),
        resources: ResourcesSection {
            beds_split: profile.beds_split,
            complementary: profile.complementary,
            essential: profile.essential,
        },
        units: UnitsSection {
            currency: EXPECTED_CURRENCY.to_string(),
            funding: EXPECTED_FUNDING_UNITS.to_string(),
            resource_basis: EXPECTED_RESOURCE_BASIS.to_string(),
        },
    }
}

/// Budget allocation inputs of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSettings {
    /// Default budget; a caller-supplied budget overrides it.
    pub budget: Option<f64>,
    /// Total annual medical expenditure of the uninsured, millions.
    pub f_med: f64,
    /// Total annual income of the uninsured beyond essential expenses,
    /// millions.
    pub f_income: f64,
    /// Annual cost of one researcher, millions.
    pub s_salary: f64,
    pub n_unit_essential: [f64; 3],
    pub n_unit_complementary: [f64; 3],
    pub baseline: ExpenditureVector,
    /// Shortage probability of an uninsured person; computed from the
    /// population model when absent.
    pub e_indicator: Option<f64>,
    /// Tail mass tolerance for that computation.
    pub tail_eps: f64,
}

/// A loaded evaluation scenario with its profile resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub profile: CountryProfile,
    /// Absolute or scenario-relative path the profile was loaded from.
    pub profile_path: PathBuf,
    /// Default evaluation year.
    pub year: i32,
    pub series_lookup: SeriesLookup,
    pub coeffs: ModelCoefficients,
    pub sat: SaturationCoefficients,
    pub allocation: Option<AllocationSettings>,
}

impl Scenario {
    /// Builds the nine-category allocation problem, deriving the uninsured
    /// share from the insurance counts and the shortage probability from
    /// the population model when the scenario does not pin it.
    ///
    /// `budget` overrides the scenario's own; one of the two must be given.
    pub fn allocation_problem(&self, budget: Option<f64>) -> Result<AllocationProblem, ModelError> {
        let settings = self.allocation.as_ref().ok_or_else(|| {
            ModelError::domain("scenario has no [allocation] section")
        })?;
        let f_total = budget.or(settings.budget).ok_or_else(|| {
            ModelError::domain("no budget given and the scenario sets none")
        })?;
        let p_insure = self.profile.population.insured_proportion()?;
        let e_indicator = match settings.e_indicator {
            Some(v) => v,
            None => indicator_rate_quadrature(&self.profile.population, settings.tail_eps)?,
        };
        let problem = AllocationProblem {
            f_total,
            f_med: settings.f_med,
            f_income: settings.f_income,
            p_uninsure: 1.0 - p_insure,
            e_indicator,
            s_salary: settings.s_salary,
            n_unit_essential: settings.n_unit_essential,
            n_unit_complementary: settings.n_unit_complementary,
            baseline: settings.baseline,
            coeffs: self.coeffs,
            sat: self.sat,
        };
        problem.validate()?;
        Ok(problem)
    }
}

// ---------------------------------------------------------------------------
// I/O.

fn read_to_string(path: &Path) -> Result<String, ProfileError> {
    std::fs::read_to_string(path)
        .map_err(|source| ProfileError::Io { path: path.to_path_buf(), source })
}

/// Loads and validates a country profile document.
pub fn load_profile(path: impl AsRef<Path>) -> Result<CountryProfile, ProfileError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let doc: ProfileDoc = toml::from_str(&text)
        .map_err(|e| ProfileError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    if doc.schema != PROFILE_SCHEMA {
        return Err(ProfileError::Parse {
            path: path.to_path_buf(),
            message: format!("unsupported schema {:?}, expected {PROFILE_SCHEMA:?}", doc.schema),
        });
    }
    profile_from_doc(doc, path)
}

/// Writes a country profile canonically and atomically.
///
/// The document is rendered with a fixed key order and replaces `path` via
/// a rename, so a crash cannot leave a half-written file behind.
pub fn save_profile(profile: &CountryProfile, path: impl AsRef<Path>) -> Result<(), ProfileError> {
    let path = path.as_ref();
    let violations = profile.violations();
    if !violations.is_empty() {
        return Err(ProfileError::Validation { path: path.to_path_buf(), violations });
    }
    let doc = doc_from_profile(profile);
    let text = toml::to_string(&doc).map_err(|e| ProfileError::Parse {
        path: path.to_path_buf(),
        message: format!("cannot serialize profile: {e}"),
    })?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|source| ProfileError::Io { path: path.to_path_buf(), source })?;
    tmp.write_all(text.as_bytes())
        .map_err(|source| ProfileError::Io { path: path.to_path_buf(), source })?;
    tmp.persist(path)
        .map_err(|e| ProfileError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Loads a scenario, resolving its profile reference relative to the
/// scenario file's directory.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ProfileError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let doc: ScenarioDoc = toml::from_str(&text)
        .map_err(|e| ProfileError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    if doc.schema != SCENARIO_SCHEMA {
        return Err(ProfileError::Parse {
            path: path.to_path_buf(),
            message: format!("unsupported schema {:?}, expected {SCENARIO_SCHEMA:?}", doc.schema),
        });
    }

    let referenced = PathBuf::from(&doc.profile);
    let profile_path = if referenced.is_absolute() {
        referenced
    } else {
        path.parent().unwrap_or(Path::new(".")).join(referenced)
    };
    if !profile_path.is_file() {
        return Err(ProfileError::MissingProfile { path: profile_path });
    }
    let profile = load_profile(&profile_path)?;

    let mut violations = Vec::new();
    if let Err(e) = doc.coefficients.validate() {
        violations.push(Violation::new("coefficients", e.to_string()));
    }
    let sat = match &doc.saturation {
        SaturationSection::Explicit { k_complementary, k_essential } => {
            SaturationCoefficients::explicit(*k_essential, *k_complementary)
        }
        SaturationSection::Calibrated {
            k_essential,
            baseline_complementary,
            baseline_essential,
        } => SaturationCoefficients::calibrated(
            *k_essential,
            baseline_essential,
            baseline_complementary,
        ),
    };
    let sat = match sat {
        Ok(s) => Some(s),
        Err(e) => {
            violations.push(Violation::new("saturation", e.to_string()));
            None
        }
    };

    // The evaluation year needs research data both at the year itself and
    // one delay earlier; surface missing coverage now, not at evaluate time.
    if doc.coefficients.validate().is_ok() {
        if let Err(e) = profile.research.lookup(doc.year, doc.series_lookup) {
            violations.push(Violation::new("year", e.to_string()));
        }
        match doc.year.checked_sub_unsigned(doc.coefficients.tau) {
            Some(target) => {
                if let Err(e) = profile.research.lookup(target, doc.series_lookup) {
                    violations.push(Violation::new("year", e.to_string()));
                }
            }
            None => violations.push(Violation::new(
                "year",
                format!("year {} minus delay {} overflows", doc.year, doc.coefficients.tau),
            )),
        }
    }

    let allocation = doc.allocation.as_ref().map(|a| {
        check_allocation_section(a, &mut violations);
        AllocationSettings {
            budget: a.budget,
            f_med: a.f_med,
            f_income: a.f_income,
            s_salary: a.s_salary,
            n_unit_essential: a.n_unit_essential,
            n_unit_complementary: a.n_unit_complementary,
            baseline: ExpenditureVector(a.baseline),
            e_indicator: a.e_indicator,
            tail_eps: a.tail_eps,
        }
    });

    if !violations.is_empty() {
        return Err(ProfileError::Validation { path: path.to_path_buf(), violations });
    }
    Ok(Scenario {
        profile,
        profile_path,
        year: doc.year,
        series_lookup: doc.series_lookup,
        coeffs: doc.coefficients,
        sat: sat.expect("no violations implies saturation resolved"),
        allocation,
    })
}

fn check_allocation_section(a: &AllocationSection, violations: &mut Vec<Violation>) {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if let Some(b) = a.budget {
        if !positive(b) {
            violations.push(Violation::new("allocation.budget", format!("must be positive, got {b}")));
        }
    }
    if !positive(a.f_med) {
        violations.push(Violation::new("allocation.f_med", format!("must be positive, got {}", a.f_med)));
    }
    if !(a.f_income >= 0.0 && a.f_income.is_finite()) || a.f_income > a.f_med {
        violations.push(Violation::new(
            "allocation.f_income",
            format!("must lie in [0, f_med], got {}", a.f_income),
        ));
    }
    if !positive(a.s_salary) {
        violations.push(Violation::new(
            "allocation.s_salary",
            format!("must be positive, got {}", a.s_salary),
        ));
    }
    for (name, arr) in [
        ("allocation.n_unit_essential", &a.n_unit_essential),
        ("allocation.n_unit_complementary", &a.n_unit_complementary),
    ] {
        if arr.iter().any(|v| !positive(*v)) {
            violations.push(Violation::new(name, format!("entries must be positive, got {arr:?}")));
        }
    }
    if a.baseline.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        violations.push(Violation::new(
            "allocation.baseline",
            format!("entries must be nonnegative, got {:?}", a.baseline),
        ));
    }
    if let Some(e) = a.e_indicator {
        if !(0.0..=1.0).contains(&e) {
            violations.push(Violation::new(
                "allocation.e_indicator",
                format!("must lie in [0, 1], got {e}"),
            ));
        }
    }
    if !(a.tail_eps > 0.0 && a.tail_eps < 1.0) {
        violations.push(Violation::new(
            "allocation.tail_eps",
            format!("must lie in (0, 1), got {}", a.tail_eps),
        ));
    }
}
