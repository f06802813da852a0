//! Nine-category health budget allocator.
//!
//! Splits a budget across patient aid, research salaries, research funding,
//! and the essential and complementary resource triples so that the life
//! index objective
//!
//! `(P_ei + P_mr + P_hc) * (e0 + k_lt * P_hc) / k_q`
//!
//! is maximized subject to the budget and the patient-aid cap. Three
//! solvers: a chunked greedy pass, projected gradient ascent for polishing,
//! and an exhaustive composition grid restricted to a few categories which
//! serves as the correctness oracle for the other two.

use serde::{Deserialize, Serialize};

use crate::ensurance::perfect_ensurance_closed;
use crate::error::{require_in_range, require_nonnegative, require_positive, ModelError};
use crate::metrics::{ModelCoefficients, SaturationCoefficients};

/// Spending category labels, index order.
pub const CATEGORY_LABELS: [&str; 9] = [
    "patient economic aid",
    "research salaries",
    "research funding",
    "essential doctors",
    "essential nurses",
    "essential equipment",
    "complementary doctors",
    "complementary nurses",
    "complementary equipment",
];

/// Patient aid may take at most this fraction of the uninsured medical
/// expenditure, keeping the closed form away from its pole.
pub const AID_CAP_FRACTION: f64 = 0.95;

/// Relative tolerance on the budget identity of a feasible plan.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

/// Hard cap on greedy chunk count.
const MAX_CHUNKS: u64 = 1_000_000;

/// Hard cap on grid oracle evaluations.
const MAX_GRID_EVALS: u128 = 10_000_000;

/// Grid oracle dimension limit.
const MAX_GRID_DIMS: usize = 4;

/// Money assigned to the nine spending categories, in the order of
/// [`CATEGORY_LABELS`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpenditureVector(pub [f64; 9]);

impl ExpenditureVector {
    pub fn zeros() -> Self {
        ExpenditureVector([0.0; 9])
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, v) in self.0.iter().enumerate() {
            require_nonnegative(*v, &format!("expenditure f[{}] ({})", i + 1, CATEGORY_LABELS[i]))?;
        }
        Ok(())
    }
}

/// The three objective components of a spending split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveComponents {
    pub p_ei: f64,
    pub p_mr: f64,
    pub p_hc: f64,
}

/// A budget allocation instance.
///
/// The increment being optimized sits on top of `baseline`, the money the
/// system already spends per category; saturation applies to the totals.
/// A zero baseline reproduces the plain from-scratch problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    /// Budget to distribute, money units.
    pub f_total: f64,
    /// Total annual medical expenditure of the uninsured.
    pub f_med: f64,
    /// Total annual income of the uninsured beyond essential expenses.
    pub f_income: f64,
    /// Uninsured share of the population, in `[0, 1]`.
    pub p_uninsure: f64,
    /// Probability that an uninsured person is in shortage, in `[0, 1]`.
    pub e_indicator: f64,
    /// Annual salary of one researcher, money units.
    pub s_salary: f64,
    /// Money per unit of essential resource density, per category.
    pub n_unit_essential: [f64; 3],
    /// Money per unit of complementary resource density, per category.
    pub n_unit_complementary: [f64; 3],
    /// Pre-existing spending per category.
    pub baseline: ExpenditureVector,
    pub coeffs: ModelCoefficients,
    pub sat: SaturationCoefficients,
}

impl AllocationProblem {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive(self.f_total, "f_total")?;
        require_positive(self.f_med, "f_med")?;
        require_nonnegative(self.f_income, "f_income")?;
        if self.f_income > self.f_med {
            return Err(ModelError::domain(format!(
                "f_income ({}) must not exceed f_med ({})",
                self.f_income, self.f_med
            )));
        }
        require_in_range(self.p_uninsure, 0.0, 1.0, "p_uninsure")?;
        require_in_range(self.e_indicator, 0.0, 1.0, "e_indicator")?;
        require_positive(self.s_salary, "s_salary")?;
        for i in 0..3 {
            require_positive(self.n_unit_essential[i], &format!("n_unit_essential[{i}]"))?;
            require_positive(self.n_unit_complementary[i], &format!("n_unit_complementary[{i}]"))?;
        }
        self.baseline.validate()?;
        self.coeffs.validate()?;
        self.sat.validate()?;
        if self.baseline.0[0] > self.aid_cap() {
            return Err(ModelError::domain(format!(
                "baseline patient aid {} already exceeds the cap {}",
                self.baseline.0[0],
                self.aid_cap()
            )));
        }
        Ok(())
    }

    /// Upper bound on total patient aid, `0.95 * f_med`.
    pub fn aid_cap(&self) -> f64 {
        AID_CAP_FRACTION * self.f_med
    }

    /// Perfect ensurance component at increment `x`, via the closed form.
    /// Total patient aid past the cap is a constraint error.
    pub fn p_ei_of(&self, x: &ExpenditureVector) -> Result<f64, ModelError> {
        x.validate()?;
        let aid = self.baseline.0[0] + x.0[0];
        let cap = self.aid_cap();
        if aid > cap * (1.0 + 1e-12) {
            return Err(ModelError::constraint(format!(
                "patient aid {aid} exceeds the cap {cap} (0.95 * f_med)"
            )));
        }
        perfect_ensurance_closed(self.f_income, self.f_med, aid, self.p_uninsure, self.e_indicator)
    }

    /// Health care potential at increment `x`: research salaries buy staff
    /// at `s_salary` each, so the staff share is
    /// `f2 / (k_n * s_salary + f2)`, and funding enters directly.
    pub fn p_hc_of(&self, x: &ExpenditureVector) -> Result<f64, ModelError> {
        x.validate()?;
        let f2 = self.baseline.0[1] + x.0[1];
        let f3 = self.baseline.0[2] + x.0[2];
        let staff_share = f2 / (self.coeffs.k_n * self.s_salary + f2);
        let funding_share = f3 / (self.coeffs.k_m + f3);
        Ok(staff_share * funding_share)
    }

    /// Practical effect at increment `x`: money buys density at the unit
    /// costs, so each share is `f / (f + n_unit * k)`.
    pub fn p_mr_of(&self, x: &ExpenditureVector) -> Result<f64, ModelError> {
        x.validate()?;
        let mut prod_e = 1.0;
        let mut prod_c = 1.0;
        for i in 0..3 {
            let fe = self.baseline.0[3 + i] + x.0[3 + i];
            let fc = self.baseline.0[6 + i] + x.0[6 + i];
            prod_e *= fe / (fe + self.n_unit_essential[i] * self.sat.k_essential[i]);
            prod_c *= fc / (fc + self.n_unit_complementary[i] * self.sat.k_complementary[i]);
        }
        Ok(prod_e + prod_c)
    }

    pub fn components(&self, x: &ExpenditureVector) -> Result<ObjectiveComponents, ModelError> {
        Ok(ObjectiveComponents {
            p_ei: self.p_ei_of(x)?,
            p_mr: self.p_mr_of(x)?,
            p_hc: self.p_hc_of(x)?,
        })
    }

    /// The life index objective at increment `x`.
    pub fn objective(&self, x: &ExpenditureVector) -> Result<f64, ModelError> {
        let c = self.components(x)?;
        Ok(self.objective_of_components(&c))
    }

    pub fn objective_of_components(&self, c: &ObjectiveComponents) -> f64 {
        (c.p_ei + c.p_mr + c.p_hc) * (self.coeffs.e0 + self.coeffs.k_lt * c.p_hc) / self.coeffs.k_q
    }

    /// Budget identity and cap check for a finished plan.
    pub fn is_feasible(&self, x: &ExpenditureVector) -> bool {
        x.validate().is_ok()
            && (x.sum() - self.f_total).abs() <= self.f_total * BUDGET_TOLERANCE
            && self.baseline.0[0] + x.0[0] <= self.aid_cap() * (1.0 + 1e-12)
    }

    /// Raw objective without domain validation, extended smoothly to small
    /// negative coordinates. Only for finite difference probes near the
    /// boundary.
    fn objective_unchecked(&self, x: &ExpenditureVector) -> f64 {
        let aid = self.baseline.0[0] + x.0[0];
        let p_ei = (1.0
            - self.p_uninsure
                * self.e_indicator
                * (1.0 - self.f_income / (self.f_med - aid)))
            .clamp(0.0, 1.0);
        let f2 = self.baseline.0[1] + x.0[1];
        let f3 = self.baseline.0[2] + x.0[2];
        let p_hc = f2 / (self.coeffs.k_n * self.s_salary + f2) * (f3 / (self.coeffs.k_m + f3));
        let mut prod_e = 1.0;
        let mut prod_c = 1.0;
        for i in 0..3 {
            let fe = self.baseline.0[3 + i] + x.0[3 + i];
            let fc = self.baseline.0[6 + i] + x.0[6 + i];
            prod_e *= fe / (fe + self.n_unit_essential[i] * self.sat.k_essential[i]);
            prod_c *= fc / (fc + self.n_unit_complementary[i] * self.sat.k_complementary[i]);
        }
        (p_ei + prod_e + prod_c + p_hc) * (self.coeffs.e0 + self.coeffs.k_lt * p_hc) / self.coeffs.k_q
    }
}

/// Which algorithm produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Greedy,
    Ascent,
    Grid,
}

/// A finished allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    /// The spending increment per category.
    pub x: ExpenditureVector,
    pub objective: f64,
    pub components: ObjectiveComponents,
    /// Budget identity holds and the aid cap is respected.
    pub feasible: bool,
    pub solver: SolverKind,
    /// Chunks placed, ascent steps taken, or grid points evaluated.
    pub iterations: u64,
    /// Largest single-chunk objective gain seen during a greedy run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_marginal_gain: Option<f64>,
    /// Kink-aware stationarity gap at the final ascent iterate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_norm: Option<f64>,
}

fn finish_plan(
    prob: &AllocationProblem,
    x: ExpenditureVector,
    solver: SolverKind,
    iterations: u64,
    max_marginal_gain: Option<f64>,
    grad_norm: Option<f64>,
) -> Result<AllocationPlan, ModelError> {
    let components = prob.components(&x)?;
    Ok(AllocationPlan {
        objective: prob.objective_of_components(&components),
        feasible: prob.is_feasible(&x),
        x,
        components,
        solver,
        iterations,
        max_marginal_gain,
        grad_norm,
    })
}

/// Greedy chunk allocation.
///
/// Starting from a zero increment, repeatedly places one chunk of size
/// `step` (the final chunk may be smaller) on the category with the largest
/// marginal objective gain. Ties go to the lowest index. Categories whose
/// next chunk would break the aid cap are skipped. Deterministic.
pub fn greedy_allocate(prob: &AllocationProblem, step: f64) -> Result<AllocationPlan, ModelError> {
    prob.validate()?;
    require_positive(step, "step")?;
    let n_chunks = (prob.f_total / step).ceil() as u64;
    if n_chunks > MAX_CHUNKS {
        return Err(ModelError::resource(format!(
            "step {step} means {n_chunks} chunks; at most {MAX_CHUNKS} are allowed"
        )));
    }
    let cap = prob.aid_cap();
    let mut x = ExpenditureVector::zeros();
    let mut remaining = prob.f_total;
    let mut iterations = 0u64;
    let mut max_gain = f64::NEG_INFINITY;
    while remaining > prob.f_total * 1e-15 {
        let chunk = remaining.min(step);
        let base = prob.objective(&x)?;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..9 {
            if j == 0 && prob.baseline.0[0] + x.0[0] + chunk > cap {
                continue;
            }
            let mut candidate = x;
            candidate.0[j] += chunk;
            let gain = prob.objective(&candidate)? - base;
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let (j, gain) =
            best.ok_or_else(|| ModelError::constraint("no category can accept the next chunk"))?;
        x.0[j] += chunk;
        remaining -= chunk;
        iterations += 1;
        max_gain = max_gain.max(gain);
    }
    finish_plan(prob, x, SolverKind::Greedy, iterations, Some(max_gain), None)
}

/// The capped uniform split: an equal ninth per category, with any patient
/// aid beyond the cap redistributed evenly over the other eight.
pub fn uniform_allocation(prob: &AllocationProblem) -> Result<ExpenditureVector, ModelError> {
    prob.validate()?;
    let ninth = prob.f_total / 9.0;
    let mut x = ExpenditureVector([ninth; 9]);
    let aid_room = (prob.aid_cap() - prob.baseline.0[0]).max(0.0);
    if x.0[0] > aid_room {
        let spill = x.0[0] - aid_room;
        x.0[0] = aid_room;
        for v in &mut x.0[1..] {
            *v += spill / 8.0;
        }
    }
    Ok(x)
}

/// Euclidean projection onto `{lo <= f <= hi, sum f = f_total}` by
/// bisection on the dual shift.
fn project_box(f_total: f64, y: &[f64; 9], lo_b: &[f64; 9], hi_b: &[f64; 9]) -> [f64; 9] {
    let clipped_sum = |theta: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..9 {
            s += (y[i] - theta).clamp(lo_b[i], hi_b[i]);
        }
        s
    };
    // At theta = lo every coordinate sits at its upper bound, at theta = hi
    // at its lower bound; the clipped sum is nonincreasing in between.
    let mut lo = (0..9).map(|i| y[i] - hi_b[i]).fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = (0..9).map(|i| y[i] - lo_b[i]).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clipped_sum(mid) > f_total {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    let mut x = [0.0; 9];
    for i in 0..9 {
        x[i] = (y[i] - theta).clamp(lo_b[i], hi_b[i]);
    }
    // Spread the leftover rounding over the coordinates that are strictly
    // inside their bounds so the budget identity holds to machine accuracy.
    let residual = f_total - x.iter().sum::<f64>();
    if residual != 0.0 {
        let free: Vec<usize> = (0..9)
            .filter(|&i| x[i] > lo_b[i] && x[i] < hi_b[i] - f64::EPSILON * hi_b[i].abs())
            .collect();
        if !free.is_empty() {
            let share = residual / free.len() as f64;
            for i in free {
                x[i] = (x[i] + share).clamp(lo_b[i], hi_b[i]);
            }
        }
    }
    x
}

fn standard_bounds(prob: &AllocationProblem) -> ([f64; 9], [f64; 9]) {
    let aid_room = (prob.aid_cap() - prob.baseline.0[0]).max(0.0);
    let mut hi = [prob.f_total; 9];
    hi[0] = aid_room.min(prob.f_total);
    ([0.0; 9], hi)
}

fn project(prob: &AllocationProblem, y: &[f64; 9]) -> [f64; 9] {
    let (lo, hi) = standard_bounds(prob);
    project_box(prob.f_total, y, &lo, &hi)
}

/// Central-difference gradient of the objective, falling back to one-sided
/// differences against the coordinate bounds.
fn fd_gradient(prob: &AllocationProblem, x: &ExpenditureVector, ref_step: f64) -> [f64; 9] {
    let aid_room = (prob.aid_cap() - prob.baseline.0[0]).max(0.0);
    let mut g = [0.0; 9];
    for i in 0..9 {
        let h = 1e-6 * x.0[i].max(ref_step);
        let upper = if i == 0 { aid_room } else { f64::INFINITY };
        let (a, b) = if x.0[i] - h < 0.0 {
            (x.0[i], x.0[i] + h)
        } else if x.0[i] + h > upper {
            (x.0[i] - h, x.0[i])
        } else {
            (x.0[i] - h, x.0[i] + h)
        };
        if a == b {
            g[i] = 0.0;
            continue;
        }
        let mut xa = *x;
        xa.0[i] = a;
        let mut xb = *x;
        xb.0[i] = b;
        g[i] = (prob.objective_unchecked(&xb) - prob.objective_unchecked(&xa)) / (b - a);
    }
    g
}

/// Forward and backward difference quotients per coordinate; `None` where
/// the probe would leave the box. The pair exposes kinks (the patient aid
/// channel goes flat once its index clamps) that a central difference
/// averages away.
fn one_sided_gradients(
    prob: &AllocationProblem,
    x: &ExpenditureVector,
    ref_step: f64,
) -> ([Option<f64>; 9], [Option<f64>; 9]) {
    let aid_room = (prob.aid_cap() - prob.baseline.0[0]).max(0.0);
    let base = prob.objective_unchecked(x);
    let mut plus = [None; 9];
    let mut minus = [None; 9];
    for i in 0..9 {
        let h = 1e-6 * x.0[i].max(ref_step);
        let upper = if i == 0 { aid_room } else { f64::INFINITY };
        if x.0[i] + h <= upper {
            let mut xp = *x;
            xp.0[i] += h;
            plus[i] = Some((prob.objective_unchecked(&xp) - base) / h);
        }
        if x.0[i] - h >= 0.0 {
            let mut xm = *x;
            xm.0[i] -= h;
            minus[i] = Some((base - prob.objective_unchecked(&xm)) / h);
        }
    }
    (plus, minus)
}

/// Kink-aware stationarity measure: the norm of the projected step along
/// the best one-sided ascent direction, with coordinates that cannot
/// improve in either direction held fixed during the projection. Zero (up
/// to difference noise) at a constrained maximum even when it sits on a
/// kink.
fn stationarity_gap(prob: &AllocationProblem, x: &ExpenditureVector, ref_step: f64) -> f64 {
    let (plus, minus) = one_sided_gradients(prob, x, ref_step);
    let (mut lo, mut hi) = standard_bounds(prob);
    let mut y = x.0;
    for i in 0..9 {
        let up = plus[i].filter(|g| *g > 0.0);
        let down = minus[i].filter(|g| *g < 0.0);
        match up.or(down) {
            Some(g) => y[i] += g,
            None => {
                lo[i] = x.0[i];
                hi[i] = x.0[i];
            }
        }
    }
    let projected = project_box(prob.f_total, &y, &lo, &hi);
    let mut moved = [0.0; 9];
    for i in 0..9 {
        moved[i] = projected[i] - x.0[i];
    }
    norm2(&moved)
}

fn norm2(v: &[f64; 9]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Coarse scan points per exchange interval.
const POLISH_GRID: usize = 16;
/// Golden-section refinement steps; shrinks the bracket below 1e-12 of it.
const GOLDEN_ITERS: usize = 60;
/// Full polish sweeps before giving up.
const MAX_SWEEPS: usize = 200;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `phi` over `[0, t_max]` with a coarse scan and golden-section
/// refinement around the best coarse point (the bracket spans its two
/// neighbors, so a maximum between grid points is kept). Returns the best
/// `t` and value found; `(0, phi(0))` when nothing beats the left end.
fn line_search(t_max: f64, base: f64, phi: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best_t = 0.0;
    let mut best_v = base;
    for j in 1..=POLISH_GRID {
        let t = t_max * j as f64 / POLISH_GRID as f64;
        let v = phi(t);
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    let step = t_max / POLISH_GRID as f64;
    let mut a = (best_t - step).max(0.0);
    let mut b = (best_t + step).min(t_max);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = phi(d);
        }
    }
    let (t_ref, v_ref) = if fc >= fd { (c, fc) } else { (d, fd) };
    if v_ref > best_v {
        (t_ref, v_ref)
    } else {
        (best_t, best_v)
    }
}

fn polish_threshold(base: f64) -> f64 {
    1e-13 * (1.0 + base.abs())
}

/// One pass of pairwise budget exchanges: for every ordered pair of
/// categories, line-search the objective over "move `t` from one to the
/// other" and apply strict improvements. Exchanges keep the budget sum and
/// all bounds feasible by construction and, unlike a gradient step, walk
/// straight to an interior objective kink. Returns the best accepted gain.
fn pair_sweep(prob: &AllocationProblem, x: &mut ExpenditureVector, moves: &mut u64) -> f64 {
    let aid_room = (prob.aid_cap() - prob.baseline.0[0]).max(0.0);
    let mut sweep_gain = 0.0f64;
    for from in 0..9 {
        for to in 0..9 {
            if to == from {
                continue;
            }
            let mut t_max = x.0[from];
            if to == 0 {
                t_max = t_max.min(aid_room - x.0[0]);
            }
            if !(t_max > 0.0) {
                continue;
            }
            let base = prob.objective_unchecked(x);
            let phi = |t: f64| {
                let mut y = *x;
                y.0[from] -= t;
                y.0[to] += t;
                prob.objective_unchecked(&y)
            };
            let (best_t, best_v) = line_search(t_max, base, phi);
            let gain = best_v - base;
            if gain > polish_threshold(base) {
                x.0[from] -= best_t;
                x.0[to] += best_t;
                *moves += 1;
                sweep_gain = sweep_gain.max(gain);
            }
        }
    }
    sweep_gain
}

/// One pass of escape rays: line-search the objective along the segment
/// from `x` toward each of a fixed set of feasible probes: the nine
/// single-category concentrations, the even nine-way split, and an even
/// split within each factor group of the objective (the research pair and
/// the two resource trios). The feasible set is convex, so every segment
/// is feasible. Pair exchanges are blind to optima that need money moved
/// between several categories at once, and both basin shapes occur: the
/// patient aid channel pays off convexly (worthless until aid approaches
/// the clamp, then strong), which rewards concentration, while a product
/// group far below half saturation only pays once every member is funded,
/// which rewards co-funding. Returns the best accepted gain.
fn ray_sweep(prob: &AllocationProblem, x: &mut ExpenditureVector, moves: &mut u64) -> f64 {
    let mut targets: Vec<[f64; 9]> = Vec::with_capacity(13);
    for target in 0..9 {
        let mut concentrated = [0.0; 9];
        concentrated[target] = prob.f_total;
        targets.push(project(prob, &concentrated));
    }
    if let Ok(even) = uniform_allocation(prob) {
        targets.push(even.0);
    }
    for group in [&[1usize, 2][..], &[3, 4, 5], &[6, 7, 8]] {
        let mut spread = [0.0; 9];
        for &i in group {
            spread[i] = prob.f_total / group.len() as f64;
        }
        targets.push(project(prob, &spread));
    }
    let mut sweep_gain = 0.0f64;
    for tgt in &targets {
        let base = prob.objective_unchecked(x);
        let phi = |alpha: f64| {
            let mut y = *x;
            for i in 0..9 {
                y.0[i] += alpha * (tgt[i] - y.0[i]);
            }
            prob.objective_unchecked(&y)
        };
        let (best_alpha, best_v) = line_search(1.0, base, phi);
        let gain = best_v - base;
        if gain > polish_threshold(base) {
            for i in 0..9 {
                x.0[i] += best_alpha * (tgt[i] - x.0[i]);
            }
            *moves += 1;
            sweep_gain = sweep_gain.max(gain);
        }
    }
    sweep_gain
}

/// Deterministic exchange polish: pair sweeps until they stall, then corner
/// rays to escape concentration basins, repeating while anything improves.
/// Returns the accepted move count.
fn exchange_polish(prob: &AllocationProblem, x: &mut ExpenditureVector) -> u64 {
    let mut moves = 0u64;
    for _ in 0..MAX_SWEEPS {
        if pair_sweep(prob, x, &mut moves) > 0.0 {
            continue;
        }
        if ray_sweep(prob, x, &mut moves) == 0.0 {
            break;
        }
    }
    moves
}

/// Shifts the tiny floating point drift of repeated exchanges onto the
/// largest coordinate so the budget identity holds to machine accuracy.
fn repair_budget(prob: &AllocationProblem, x: &mut ExpenditureVector) {
    let residual = prob.f_total - x.sum();
    if residual != 0.0 {
        let mut idx = 0;
        for i in 1..9 {
            if x.0[i] > x.0[idx] {
                idx = i;
            }
        }
        x.0[idx] = (x.0[idx] + residual).max(0.0);
    }
}

/// Projected gradient ascent from `start` (typically a greedy plan),
/// finished by a pairwise exchange polish.
///
/// The gradient phase takes finite-difference steps, projects back onto
/// the feasible set, and backtracks the step length until the objective
/// improves, so the objective is nondecreasing throughout. Because a
/// central difference misreads objective kinks (the aid channel goes flat
/// once the ensurance index clamps at 1), a deterministic pairwise
/// exchange polish then line-searches every category pair, which walks
/// exactly onto such kinks; rays toward each category's maximal
/// concentration and toward the even split let it escape basins a pair
/// move cannot leave, such as a greedy start that never fed the convex
/// aid channel or never co-funded a resource trio. Stops the gradient
/// phase at `max_iters`
/// iterations or when the projected step norm falls to `tol`;
/// `max_iters = 0` skips both phases and returns the (projected) start.
/// `iterations` on the plan counts gradient steps plus accepted exchanges,
/// and `grad_norm` is a kink-aware stationarity gap at the final point.
pub fn projected_ascent(
    prob: &AllocationProblem,
    start: &ExpenditureVector,
    max_iters: u64,
    tol: f64,
) -> Result<AllocationPlan, ModelError> {
    prob.validate()?;
    require_positive(tol, "tol")?;
    start.validate()?;
    let ref_step = prob.f_total / 300.0;
    // A feasible start is kept bit for bit; only infeasible starts are
    // projected, so a stationary feasible point round-trips exactly.
    let mut x = if prob.is_feasible(start) {
        *start
    } else {
        ExpenditureVector(project(prob, &start.0))
    };
    let mut iterations = 0u64;
    loop {
        let g = fd_gradient(prob, &x, ref_step);
        let projected = project(prob, &{
            let mut y = x.0;
            for i in 0..9 {
                y[i] += g[i];
            }
            y
        });
        let mut moved = [0.0; 9];
        for i in 0..9 {
            moved[i] = projected[i] - x.0[i];
        }
        if norm2(&moved) <= tol || iterations >= max_iters {
            break;
        }

        let current = prob.objective(&x)?;
        let g_scale = norm2(&g).max(f64::MIN_POSITIVE);
        let mut alpha = 0.25 * prob.f_total / g_scale;
        let mut accepted = false;
        for _ in 0..60 {
            let mut y = x.0;
            for i in 0..9 {
                y[i] += alpha * g[i];
            }
            let candidate = ExpenditureVector(project(prob, &y));
            let value = prob.objective(&candidate)?;
            if value > current {
                x = candidate;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // No step length improves the objective: numerically stationary
            // for the gradient phase; the exchange polish takes over.
            break;
        }
    }
    if max_iters > 0 {
        let moves = exchange_polish(prob, &mut x);
        iterations += moves;
        if moves > 0 {
            repair_budget(prob, &mut x);
        }
    }
    let grad_norm = stationarity_gap(prob, &x, ref_step);
    finish_plan(prob, x, SolverKind::Ascent, iterations, None, Some(grad_norm))
}

/// Exhaustive search over all ways to split `chunks` equal chunks among the
/// categories in `dims` (zero-based indices); every other category stays at
/// zero increment. The reference oracle for the other solvers.
///
/// Refuses more than 4 dimensions or more than 1e7 grid points. Ties are
/// broken lexicographically in the enumeration order (ascending chunk
/// counts on `dims[0]`, then `dims[1]`, ...).
pub fn grid_oracle(
    prob: &AllocationProblem,
    dims: &[usize],
    chunks: u32,
) -> Result<AllocationPlan, ModelError> {
    prob.validate()?;
    if dims.is_empty() || dims.len() > MAX_GRID_DIMS {
        return Err(ModelError::resource(format!(
            "grid oracle handles 1 to {MAX_GRID_DIMS} categories, got {}",
            dims.len()
        )));
    }
    let mut seen = [false; 9];
    for &d in dims {
        if d >= 9 {
            return Err(ModelError::domain(format!("grid dimension {d} out of range 0..9")));
        }
        if seen[d] {
            return Err(ModelError::domain(format!("grid dimension {d} repeated")));
        }
        seen[d] = true;
    }
    if chunks == 0 {
        return Err(ModelError::domain("chunks must be at least 1"));
    }
    // C(chunks + dims - 1, dims - 1) compositions.
    let mut points: u128 = 1;
    for i in 1..dims.len() {
        points = points * (chunks as u128 + i as u128) / i as u128;
        if points > MAX_GRID_EVALS {
            return Err(ModelError::resource(format!(
                "grid would evaluate more than {MAX_GRID_EVALS} points"
            )));
        }
    }

    let chunk = prob.f_total / chunks as f64;
    let mut best: Option<(ExpenditureVector, f64)> = None;
    let mut evaluated = 0u64;
    let mut counts = vec![0u32; dims.len()];
    enumerate_compositions(chunks, &mut counts, 0, &mut |counts| {
        let mut x = ExpenditureVector::zeros();
        for (slot, &d) in dims.iter().enumerate() {
            x.0[d] = counts[slot] as f64 * chunk;
        }
        if prob.baseline.0[0] + x.0[0] > prob.aid_cap() {
            return;
        }
        evaluated += 1;
        let value = prob.objective_unchecked(&x);
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((x, value));
        }
    });
    let (x, _) = best.ok_or_else(|| {
        ModelError::constraint("every grid point violates the patient aid cap")
    })?;
    finish_plan(prob, x, SolverKind::Grid, evaluated, None, None)
}

/// Calls `visit` with every way to write `total` as an ordered sum over
/// `counts.len()` slots, ascending lexicographically.
fn enumerate_compositions<F: FnMut(&[u32])>(
    total: u32,
    counts: &mut [u32],
    slot: usize,
    visit: &mut F,
) {
    if slot == counts.len() - 1 {
        counts[slot] = total;
        visit(counts);
        return;
    }
    for c in 0..=total {
        counts[slot] = c;
        enumerate_compositions(total - c, counts, slot + 1, visit);
    }
}
