//! Quantitative evaluation of national health systems.
//!
//! The model family implemented here scores a health system along three
//! axes and combines them into a single life index:
//!
//! * resource adequacy, measured through saturating shares of medical
//!   resource densities ([`metrics`]),
//! * insurance coverage quality, estimated by Monte Carlo simulation of
//!   household medical burden or by an equivalent quadrature ([`ensurance`]),
//! * research capability, entering both directly and with a multi-decade
//!   publication-to-practice delay ([`metrics::power_of_tech`]).
//!
//! On top of the index sit three diagnostic ratios ([`subordinate`]) and a
//! nine-category budget allocator that searches for the spending split
//! maximizing the index ([`allocator`]). Country data is read from TOML
//! profile and scenario documents ([`profiles`]) and evaluated into reports
//! ([`report`]).
//!
//! All randomness is seeded and the Monte Carlo engine produces bit-identical
//! results regardless of thread count; see [`ensurance::perfect_ensurance_mc`].

pub mod allocator;
pub mod ensurance;
pub mod error;
pub mod metrics;
pub mod profiles;
pub mod report;
pub mod subordinate;

pub use allocator::{
    greedy_allocate, grid_oracle, projected_ascent, uniform_allocation, AllocationPlan,
    AllocationProblem, ExpenditureVector, ObjectiveComponents, SolverKind, CATEGORY_LABELS,
};
pub use ensurance::{
    indicator_rate_quadrature, insured_proportion, perfect_ensurance_closed, perfect_ensurance_mc,
    perfect_ensurance_quadrature, shortage_sample, EnsuranceEstimate, PopulationModel,
    ShortageSample,
};
pub use error::ModelError;
pub use metrics::{
    life_expectancy, life_index, potential_of_health_care, power_of_tech, practical_effect,
    quality_of_life, resource_share_products, saturating_share, ModelCoefficients, ResearchEntry,
    ResearchSeries, ResourceBundle, SaturationCoefficients, SeriesLookup,
};
pub use profiles::{
    load_profile, load_scenario, save_profile, CountryProfile, ProfileError, Scenario, Violation,
};
pub use report::{evaluate, evaluate_at_year, EnsuranceMethod, MetricReport};
pub use subordinate::{
    fairness_degree, luxury_index, matching_degree, EconomicContext, LuxuryComponents,
    MatchingDegree, UrbanRuralSplit,
};
