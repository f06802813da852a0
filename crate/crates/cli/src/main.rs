//! `lifeindex` command line interface.
//!
//! Four subcommands over TOML scenario files: `evaluate` one scenario to a
//! JSON report, `compare` several into a ranking, `history` one scenario
//! across years as CSV, and `optimize` a scenario's budget allocation.
//!
//! Exit codes: 0 success, 1 argument/profile/file problems, 2 model
//! evaluation failures. Errors go to stderr as one-line JSON.

mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lifeindex::ensurance::DEFAULT_TAIL_EPS;
use lifeindex::{
    evaluate_at_year, greedy_allocate, grid_oracle, load_scenario, projected_ascent,
    uniform_allocation, AllocationPlan, EnsuranceMethod, ExpenditureVector, MetricReport,
    ModelError, CATEGORY_LABELS,
};
use serde::Serialize;

use output::{canonical_json, emit, CliError};

#[derive(Parser)]
#[command(name = "lifeindex", version, about = "Health system life-index evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one scenario and print the metric report as JSON.
    Evaluate(EvaluateArgs),
    /// Score several scenarios and rank them by life index.
    Compare(CompareArgs),
    /// Trace one scenario across a year range as CSV.
    History(HistoryArgs),
    /// Search for the budget split that maximizes the life index.
    Optimize(OptimizeArgs),
}

/// How the ensurance index is computed.
#[derive(Args)]
struct MethodArgs {
    /// Computation method for the ensurance index.
    #[arg(long, value_enum, default_value_t = MethodKind::Quadrature)]
    method: MethodKind,
    /// Sample count (monte-carlo only).
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Random seed (monte-carlo only).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Discarded tail probability mass (quadrature only).
    #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
    tail_eps: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodKind {
    MonteCarlo,
    Quadrature,
}

impl MethodArgs {
    fn to_method(&self) -> EnsuranceMethod {
        match self.method {
            MethodKind::MonteCarlo => {
                EnsuranceMethod::MonteCarlo { samples: self.samples, seed: self.seed }
            }
            MethodKind::Quadrature => EnsuranceMethod::Quadrature { tail_eps: self.tail_eps },
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Override the scenario's evaluation year.
    #[arg(long)]
    year: Option<i32>,
    #[command(flatten)]
    method: MethodArgs,
    /// Write the report here (atomic replace) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario TOML files.
    #[arg(required = true, num_args = 1..)]
    scenarios: Vec<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
    /// Write PREFIX.json, PREFIX.csv and PREFIX.long.csv.
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HistoryArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// First year (default: first recorded year plus the delay).
    #[arg(long)]
    from: Option<i32>,
    /// Last year (default: last recorded year).
    #[arg(long)]
    to: Option<i32>,
    /// Skip years the research record cannot cover instead of failing.
    #[arg(long)]
    lenient: bool,
    #[command(flatten)]
    method: MethodArgs,
    /// Write the CSV here (atomic replace) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Greedy,
    Ascent,
    Grid,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Scenario TOML file with an [allocation] section.
    scenario: PathBuf,
    /// Override the scenario's budget, millions of currency units.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, value_enum, default_value_t = SolverArg::Greedy)]
    solver: SolverArg,
    /// Greedy chunk size (default: budget / 300).
    #[arg(long)]
    step: Option<f64>,
    /// Ascent iteration cap.
    #[arg(long, default_value_t = 500)]
    max_iters: u64,
    /// Ascent stationarity tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Grid search category indices (0..=8), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    grid_dims: Vec<usize>,
    /// Grid chunks along the budget.
    #[arg(long, default_value_t = 24)]
    chunks: u32,
    /// Write the result here (atomic replace) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("{}", err.to_json());
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::History(args) => cmd_history(args),
        Command::Optimize(args) => cmd_optimize(args),
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let year = args.year.unwrap_or(scenario.year);
    let report = evaluate_at_year(&scenario, year, &args.method.to_method())?;
    emit(args.out.as_deref(), &canonical_json(&report))
}

#[derive(Serialize)]
struct RankedReport {
    rank: usize,
    report: MetricReport,
}

#[derive(Serialize)]
struct CompareRow<'a> {
    rank: usize,
    country: &'a str,
    year: i32,
    l_index: f64,
    q_life: f64,
    e_life: f64,
    p_mr: f64,
    p_ei: f64,
    p_tech: f64,
    p_hc: f64,
    matching_degree: f64,
    fairness_degree: f64,
    luxury_index: f64,
}

#[derive(Serialize)]
struct LongRow<'a> {
    country: &'a str,
    metric: &'static str,
    value: f64,
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let method = args.method.to_method();
    let mut reports = Vec::new();
    for path in &args.scenarios {
        let scenario = load_scenario(path)?;
        reports.push(evaluate_at_year(&scenario, scenario.year, &method)?);
    }
    // Highest life index first; ties resolved by name for a stable order.
    reports.sort_by(|a, b| {
        b.l_index
            .partial_cmp(&a.l_index)
            .expect("life index is never NaN")
            .then_with(|| a.country.cmp(&b.country))
    });

    println!(
        "{:<4} {:<24} {:>5} {:>11} {:>9} {:>9} {:>7}",
        "rank", "country", "year", "life index", "matching", "fairness", "luxury"
    );
    for (i, r) in reports.iter().enumerate() {
        println!(
            "{:<4} {:<24} {:>5} {:>11.4} {:>9.4} {:>9.4} {:>7.4}",
            i + 1,
            r.country,
            r.year,
            r.l_index,
            r.matching_degree,
            r.fairness_degree,
            r.luxury_index
        );
    }

    if let Some(prefix) = &args.out {
        write_compare_files(prefix, &reports)?;
    }
    Ok(())
}

fn write_compare_files(prefix: &Path, reports: &[MetricReport]) -> Result<(), CliError> {
    let ranked: Vec<RankedReport> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| RankedReport { rank: i + 1, report: r.clone() })
        .collect();
    let json_path = prefix.with_extension("json");
    output::write_atomic(&json_path, canonical_json(&ranked).as_bytes())?;

    let mut wide = csv::Writer::from_writer(Vec::new());
    for (i, r) in reports.iter().enumerate() {
        wide.serialize(CompareRow {
            rank: i + 1,
            country: &r.country,
            year: r.year,
            l_index: r.l_index,
            q_life: r.q_life,
            e_life: r.e_life,
            p_mr: r.p_mr,
            p_ei: r.p_ei,
            p_tech: r.p_tech,
            p_hc: r.p_hc,
            matching_degree: r.matching_degree,
            fairness_degree: r.fairness_degree,
            luxury_index: r.luxury_index,
        })
        .expect("csv rows serialize into memory");
    }
    let csv_path = prefix.with_extension("csv");
    output::write_atomic(&csv_path, &wide.into_inner().expect("csv buffer"))?;

    let mut long = csv::Writer::from_writer(Vec::new());
    for r in reports {
        let mut rows: Vec<(&'static str, f64)> = vec![
            ("l_index", r.l_index),
            ("q_life", r.q_life),
            ("e_life", r.e_life),
            ("p_mr", r.p_mr),
            ("p_ei", r.p_ei),
            ("p_tech", r.p_tech),
            ("p_hc", r.p_hc),
            ("matching_degree", r.matching_degree),
            ("fairness_degree", r.fairness_degree),
            ("luxury_index", r.luxury_index),
        ];
        if let Some(se) = r.p_ei_std_error {
            rows.push(("p_ei_std_error", se));
        }
        for (metric, value) in rows {
            long.serialize(LongRow { country: &r.country, metric, value })
                .expect("csv rows serialize into memory");
        }
    }
    let long_path = {
        let mut s = prefix.as_os_str().to_os_string();
        s.push(".long.csv");
        PathBuf::from(s)
    };
    output::write_atomic(&long_path, &long.into_inner().expect("csv buffer"))?;
    Ok(())
}

#[derive(Serialize)]
struct HistoryRow {
    year: i32,
    l_index: f64,
    p_mr: f64,
    p_ei: f64,
    p_tech: f64,
}

fn cmd_history(args: HistoryArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let method = args.method.to_method();
    let research = &scenario.profile.research;
    let from = args
        .from
        .unwrap_or_else(|| research.first_year() + scenario.coeffs.tau as i32);
    let to = args.to.unwrap_or_else(|| research.last_year());
    if from > to {
        return Err(ModelError::domain(format!("history range {from}..={to} is empty")).into());
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for year in from..=to {
        match evaluate_at_year(&scenario, year, &method) {
            Ok(r) => wtr
                .serialize(HistoryRow {
                    year,
                    l_index: r.l_index,
                    p_mr: r.p_mr,
                    p_ei: r.p_ei,
                    p_tech: r.p_tech,
                })
                .expect("csv rows serialize into memory"),
            Err(e @ ModelError::MissingYear { .. }) if args.lenient => {
                eprintln!("warning: skipping {year}: {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    let bytes = wtr.into_inner().expect("csv buffer");
    emit(args.out.as_deref(), &String::from_utf8(bytes).expect("csv is utf8"))
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    country: &'a str,
    budget: f64,
    /// Objective with the whole budget unspent (increments all zero).
    baseline_objective: f64,
    /// Objective of the even nine-way split.
    uniform_objective: f64,
    /// Category label to allocated amount, same data as `plan.x`.
    allocation: BTreeMap<&'static str, f64>,
    plan: &'a AllocationPlan,
}

fn cmd_optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let prob = scenario.allocation_problem(args.budget)?;
    let step = args.step.unwrap_or(prob.f_total / 300.0);
    let plan = match args.solver {
        SolverArg::Greedy => greedy_allocate(&prob, step)?,
        SolverArg::Ascent => {
            let start = greedy_allocate(&prob, step)?;
            projected_ascent(&prob, &start.x, args.max_iters, args.tol)?
        }
        SolverArg::Grid => grid_oracle(&prob, &args.grid_dims, args.chunks)?,
    };
    let baseline_objective = prob.objective(&ExpenditureVector::zeros())?;
    let uniform_objective = prob.objective(&uniform_allocation(&prob)?)?;
    let allocation: BTreeMap<&'static str, f64> =
        CATEGORY_LABELS.iter().copied().zip(plan.x.0).collect();
    let report = OptimizeReport {
        country: &scenario.profile.name,
        budget: prob.f_total,
        baseline_objective,
        uniform_objective,
        allocation,
        plan: &plan,
    };
    emit(args.out.as_deref(), &canonical_json(&report))
}
