//! Perfect ensurance index: how well insurance and government support cover
//! the population's medical spending.
//!
//! The index is `P_ei = 1 - (1 - P_insure) * shortage_ratio`, where the
//! shortage ratio is estimated over the uninsured subpopulation: each
//! simulated person draws an annual medical expenditure (Poisson) and an
//! annual income (normal), pays `burden = x_med * (1 - k_gov)` out of
//! pocket, and is in shortage when the burden exceeds income left after
//! essential living expenses.
//!
//! Three estimators are provided:
//! * [`perfect_ensurance_mc`], the seeded Monte Carlo engine. Bit-identical
//!   results for a given `(model, n_samples, seed)` regardless of thread
//!   count: samples are drawn in fixed 16384-sample batches, each batch on
//!   its own counter-derived ChaCha stream, and partial sums are reduced in
//!   batch order.
//! * [`perfect_ensurance_quadrature`], a deterministic oracle that sums the
//!   truncated Poisson index against closed-form normal partial moments.
//! * [`perfect_ensurance_closed`], the aggregate closed form used by the
//!   budget allocator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Discrete, Normal as NormalDist, Poisson as PoissonDist};

use crate::error::{require_in_range, require_nonnegative, require_positive, ModelError};

/// Samples per Monte Carlo batch. Fixed so that serial and parallel runs
/// partition the sample space identically.
const MC_BATCH: u64 = 16_384;

/// Upper bound on Poisson quadrature terms before giving up.
const MAX_QUAD_TERMS: u64 = 4_000_000;

/// Default tail mass tolerance of the quadrature; callers that do not care
/// about the truncation point should use this.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;

/// Spending and income model of one country's population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationModel {
    /// Poisson mean of annual medical expenditure, money units.
    pub lambda_med: f64,
    /// Mean annual income, money units.
    pub mu_inc: f64,
    /// Income standard deviation, money units.
    pub sigma_inc: f64,
    /// Essential non-medical living expenses, money units.
    pub essential_expense: f64,
    /// Government-covered fraction of medical expenditure, in `[0, 1]`.
    pub k_gov: f64,
    /// People with medical insurance.
    pub n_insured: u64,
    /// People without medical insurance.
    pub n_uninsured: u64,
    /// Money units per Poisson count. Expenditure is drawn as
    /// `quantum * Poisson(lambda_med / quantum)`; the default quantum of 1
    /// means lambda_med is used directly.
    pub expense_quantum: f64,
}

impl PopulationModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive(self.lambda_med, "lambda_med")?;
        require_positive(self.sigma_inc, "sigma_inc")?;
        require_nonnegative(self.essential_expense, "essential_expense")?;
        require_in_range(self.k_gov, 0.0, 1.0, "k_gov")?;
        require_positive(self.expense_quantum, "expense_quantum")?;
        if !self.mu_inc.is_finite() {
            return Err(ModelError::domain(format!("mu_inc must be finite, got {}", self.mu_inc)));
        }
        if self.n_insured == 0 && self.n_uninsured == 0 {
            return Err(ModelError::domain("population must contain at least one person"));
        }
        Ok(())
    }

    pub fn insured_proportion(&self) -> Result<f64, ModelError> {
        insured_proportion(self.n_insured, self.n_uninsured)
    }
}

/// One simulated person's burden, shortage indicator and shortage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortageSample {
    /// Out-of-pocket medical cost, `x_med * (1 - k_gov)`.
    pub burden: f64,
    /// True when the burden exceeds income left after essential expenses.
    pub indicator: bool,
    /// `burden - (x_inc - essential_expense)` when the indicator is set,
    /// otherwise 0.
    pub shortage: f64,
}

/// Result of a perfect ensurance estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsuranceEstimate {
    /// The index itself, `1 - (1 - p_insure) * shortage_ratio`.
    pub p_ei: f64,
    /// Insured share of the population.
    pub p_insure: f64,
    /// Total shortage over total burden among the uninsured, clamped to
    /// `[0, 1]`; 0 by convention when the total burden is 0.
    pub shortage_ratio: f64,
    /// Fraction of samples with the shortage indicator set.
    pub indicator_rate: f64,
    /// Delta-method standard error of `p_ei`. 0 for exact estimators.
    pub std_error: f64,
    /// Monte Carlo sample count, 0 for exact estimators.
    pub samples: u64,
}

/// Insured share `N_in / (N_in + N_un)`.
pub fn insured_proportion(n_insured: u64, n_uninsured: u64) -> Result<f64, ModelError> {
    let total = n_insured.checked_add(n_uninsured).ok_or_else(|| {
        ModelError::domain("population count overflows u64")
    })?;
    if total == 0 {
        return Err(ModelError::domain("population must contain at least one person"));
    }
    Ok(n_insured as f64 / total as f64)
}

/// Evaluates one person's shortage given expenditure and income draws.
pub fn shortage_sample(
    x_med: f64,
    k_gov: f64,
    x_inc: f64,
    essential_expense: f64,
) -> Result<ShortageSample, ModelError> {
    require_nonnegative(x_med, "x_med")?;
    require_in_range(k_gov, 0.0, 1.0, "k_gov")?;
    if !x_inc.is_finite() {
        return Err(ModelError::domain(format!("x_inc must be finite, got {x_inc}")));
    }
    require_nonnegative(essential_expense, "essential_expense")?;
    let burden = x_med * (1.0 - k_gov);
    let disposable = x_inc - essential_expense;
    let indicator = burden > disposable;
    let shortage = if indicator { burden - disposable } else { 0.0 };
    Ok(ShortageSample { burden, indicator, shortage })
}

/// Compensated accumulator. The quadrature mass and moment sums run over
/// tens of thousands of terms and feed tolerances near machine epsilon,
/// where a plain running sum loses exactly the digits being compared.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, term: f64) {
        let y = term - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Per-batch running sums for the Monte Carlo estimator.
#[derive(Debug, Clone, Copy, Default)]
struct BatchSums {
    shortage: f64,
    burden: f64,
    shortage_sq: f64,
    burden_sq: f64,
    cross: f64,
    indicators: u64,
}

fn mc_batch(model: &PopulationModel, seed: u64, batch: u64, len: u64) -> Result<BatchSums, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let lambda_q = model.lambda_med / model.expense_quantum;
    let poisson = Poisson::new(lambda_q)
        .map_err(|e| ModelError::domain(format!("invalid Poisson mean {lambda_q}: {e}")))?;
    let normal = Normal::new(model.mu_inc, model.sigma_inc)
        .map_err(|e| ModelError::domain(format!("invalid income distribution: {e}")))?;
    let mut sums = BatchSums::default();
    for _ in 0..len {
        let x_med = model.expense_quantum * poisson.sample(&mut rng);
        let x_inc = normal.sample(&mut rng);
        let s = shortage_sample(x_med, model.k_gov, x_inc, model.essential_expense)?;
        sums.shortage += s.shortage;
        sums.burden += s.burden;
        sums.shortage_sq += s.shortage * s.shortage;
        sums.burden_sq += s.burden * s.burden;
        sums.cross += s.shortage * s.burden;
        sums.indicators += s.indicator as u64;
    }
    Ok(sums)
}

/// Monte Carlo estimate of the perfect ensurance index.
///
/// Deterministic: the same `(model, n_samples, seed)` produces bit-identical
/// results whether run serially or on any number of threads. When the
/// population is fully insured the index is exactly 1 regardless of the
/// sampled shortage ratio.
pub fn perfect_ensurance_mc(
    model: &PopulationModel,
    n_samples: u64,
    seed: u64,
) -> Result<EnsuranceEstimate, ModelError> {
    model.validate()?;
    if n_samples == 0 {
        return Err(ModelError::domain("n_samples must be at least 1"));
    }
    let n_batches = n_samples.div_ceil(MC_BATCH);
    let partials: Vec<Result<BatchSums, ModelError>> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let start = batch * MC_BATCH;
            let len = MC_BATCH.min(n_samples - start);
            mc_batch(model, seed, batch, len)
        })
        .collect();
    // Reduction runs in batch order, so the result does not depend on how
    // rayon scheduled the batches.
    let mut total = BatchSums::default();
    for partial in partials {
        let p = partial?;
        total.shortage += p.shortage;
        total.burden += p.burden;
        total.shortage_sq += p.shortage_sq;
        total.burden_sq += p.burden_sq;
        total.cross += p.cross;
        total.indicators += p.indicators;
    }

    let n = n_samples as f64;
    let p_insure = model.insured_proportion()?;
    let (shortage_ratio, std_error) = if total.burden > 0.0 {
        let ratio = (total.shortage / total.burden).clamp(0.0, 1.0);
        let mean_s = total.shortage / n;
        let mean_b = total.burden / n;
        let var_s = (total.shortage_sq / n - mean_s * mean_s).max(0.0);
        let var_b = (total.burden_sq / n - mean_b * mean_b).max(0.0);
        let cov = total.cross / n - mean_s * mean_b;
        // Delta method for the ratio of means.
        let var_ratio =
            ((var_s - 2.0 * ratio * cov + ratio * ratio * var_b) / (n * mean_b * mean_b)).max(0.0);
        (ratio, (1.0 - p_insure) * var_ratio.sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(EnsuranceEstimate {
        p_ei: 1.0 - (1.0 - p_insure) * shortage_ratio,
        p_insure,
        shortage_ratio,
        indicator_rate: total.indicators as f64 / n,
        std_error,
        samples: n_samples,
    })
}

/// Expectations over the truncated Poisson window.
struct QuadratureMoments {
    e_shortage: f64,
    e_burden: f64,
    e_indicator: f64,
}

fn quadrature_moments(model: &PopulationModel, tail_eps: f64) -> Result<QuadratureMoments, ModelError> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(ModelError::domain(format!("tail_eps must lie in (0, 1), got {tail_eps}")));
    }
    let lambda_q = model.lambda_med / model.expense_quantum;
    let poisson = PoissonDist::new(lambda_q)
        .map_err(|e| ModelError::domain(format!("invalid Poisson mean {lambda_q}: {e}")))?;
    let unit_normal = NormalDist::standard();

    // Normal-approximation estimate of the window that will be needed for
    // the requested tail mass; refuse clearly hopeless cases before
    // scanning millions of terms.
    let z = (2.0 * (1.0 / tail_eps).ln()).sqrt() + 2.0;
    if 2.0 * z * lambda_q.sqrt() > MAX_QUAD_TERMS as f64 {
        return Err(ModelError::resource(format!(
            "Poisson quadrature window exceeds {MAX_QUAD_TERMS} terms for mean {lambda_q}; \
             raise expense_quantum or tail_eps"
        )));
    }

    // Grow the index window outward from the mode, preferring whichever
    // side has the larger next term, until geometric bounds certify that
    // both uncaptured tails together stay below tail_eps. Past the window
    // edge each term shrinks by at least the worst-case neighbor ratio, so
    // the excluded mass is at most the next term times a geometric series.
    // Bounding the tails directly instead of comparing the accumulated
    // mass against 1 - tail_eps matters for huge means: there the pmf
    // values carry enough rounding bias that their sum settles a few 1e-9
    // away from 1 and an absolute mass target can never be met.
    let below_tail = |lo: u64| -> f64 {
        if lo == 0 {
            return 0.0;
        }
        // pmf(k - 1) / pmf(k) = k / lambda <= (lo - 1) / lambda below the
        // window, and lo - 1 < lambda whenever lo is at or below the mode.
        poisson.pmf(lo - 1) / (1.0 - (lo as f64 - 1.0) / lambda_q)
    };
    let above_tail = |hi: u64| -> f64 {
        // pmf(k + 1) / pmf(k) = lambda / (k + 1) <= lambda / (hi + 2).
        let ratio = lambda_q / (hi as f64 + 2.0);
        if ratio < 1.0 {
            poisson.pmf(hi + 1) / (1.0 - ratio)
        } else {
            f64::INFINITY
        }
    };
    let mode = lambda_q.floor() as u64;
    let mut lo = mode;
    let mut hi = mode;
    let mut mass = KahanSum::default();
    mass.add(poisson.pmf(mode));
    while below_tail(lo) + above_tail(hi) > tail_eps {
        if hi - lo + 1 >= MAX_QUAD_TERMS {
            return Err(ModelError::resource(format!(
                "Poisson quadrature window exceeds {MAX_QUAD_TERMS} terms for mean {lambda_q}; \
                 raise expense_quantum or tail_eps"
            )));
        }
        let below = if lo > 0 { poisson.pmf(lo - 1) } else { 0.0 };
        let above = poisson.pmf(hi + 1);
        if below >= above && lo > 0 {
            lo -= 1;
            mass.add(below);
        } else {
            hi += 1;
            mass.add(above);
        }
    }

    let inv_sqrt_2pi = 0.3989422804014327;
    let mut e_shortage = KahanSum::default();
    let mut e_burden = KahanSum::default();
    let mut e_indicator = KahanSum::default();
    for k in lo..=hi {
        let w = poisson.pmf(k);
        let burden = model.expense_quantum * k as f64 * (1.0 - model.k_gov);
        // Shortage occurs when income falls below c = burden + essential
        // expenses; E[(c - Y)^+] has the closed form
        // (c - mu) Phi(z) + sigma phi(z) with z = (c - mu) / sigma.
        let c = burden + model.essential_expense;
        let z = (c - model.mu_inc) / model.sigma_inc;
        let cdf = unit_normal.cdf(z);
        let pdf = inv_sqrt_2pi * (-0.5 * z * z).exp();
        e_shortage.add(w * ((c - model.mu_inc) * cdf + model.sigma_inc * pdf));
        e_burden.add(w * burden);
        e_indicator.add(w * cdf);
    }
    // Normalizing by the captured mass turns the truncated sums into
    // expectations conditional on the window and cancels any common
    // rounding bias in the pmf values.
    let mass = mass.value();
    Ok(QuadratureMoments {
        e_shortage: e_shortage.value() / mass,
        e_burden: e_burden.value() / mass,
        e_indicator: e_indicator.value() / mass,
    })
}

/// Deterministic quadrature value of the perfect ensurance index.
///
/// Truncates the Poisson expenditure index where the tail mass drops below
/// `tail_eps` and integrates the income dimension in closed form. Serves as
/// the accuracy oracle for [`perfect_ensurance_mc`].
pub fn perfect_ensurance_quadrature(model: &PopulationModel, tail_eps: f64) -> Result<f64, ModelError> {
    model.validate()?;
    let p_insure = model.insured_proportion()?;
    let m = quadrature_moments(model, tail_eps)?;
    let ratio = if m.e_burden > 0.0 { (m.e_shortage / m.e_burden).clamp(0.0, 1.0) } else { 0.0 };
    Ok(1.0 - (1.0 - p_insure) * ratio)
}

/// Probability that an uninsured person is in shortage, `E[I_A]`, computed
/// by the same quadrature as [`perfect_ensurance_quadrature`].
///
/// This is the constant the budget allocator's closed form treats as
/// supplied.
pub fn indicator_rate_quadrature(model: &PopulationModel, tail_eps: f64) -> Result<f64, ModelError> {
    model.validate()?;
    Ok(quadrature_moments(model, tail_eps)?.e_indicator)
}

/// Aggregate closed form of the perfect ensurance index:
/// `1 - p_uninsure * e_indicator * (1 - f_income / (f_med - f_gov1))`,
/// clamped to `[0, 1]`.
///
/// `f_med` is the uninsured population's total medical expenditure,
/// `f_income` its total income beyond essential expenses, and `f_gov1`
/// government economic aid to patients, all in the same money units.
/// The pole at `f_gov1 = f_med` is a singularity error.
pub fn perfect_ensurance_closed(
    f_income: f64,
    f_med: f64,
    f_gov1: f64,
    p_uninsure: f64,
    e_indicator: f64,
) -> Result<f64, ModelError> {
    require_nonnegative(f_income, "f_income")?;
    require_positive(f_med, "f_med")?;
    require_nonnegative(f_gov1, "f_gov1")?;
    require_in_range(p_uninsure, 0.0, 1.0, "p_uninsure")?;
    require_in_range(e_indicator, 0.0, 1.0, "e_indicator")?;
    if f_gov1 >= f_med {
        return Err(ModelError::singularity(format!(
            "patient aid f_gov1 = {f_gov1} reaches the uninsured medical expenditure f_med = {f_med}"
        )));
    }
    let raw = 1.0 - p_uninsure * e_indicator * (1.0 - f_income / (f_med - f_gov1));
    Ok(raw.clamp(0.0, 1.0))
}
