//! Command-line front end: line-oriented `key=value` reports with a stable
//! key order, exact decimals, and a fixed exit-code contract.
//!
//! Exit codes: 0 success; 1 infeasible input or failed validation; 2 format
//! or argument error; 3 a size guard or iteration budget was exceeded;
//! 4 an internal invariant failed (the diagnostic dump goes to stderr).

use clap::{Parser, Subcommand, ValueEnum};
use mfas::covering::{mwu_fractional_cover, CoverError};
use mfas::gen::{
    bundled_instance, bundled_solution, gen_hemimetric, gen_interval_kgonal, gen_poset,
    gen_probability_like, search_cycle_witness, GenError, GenMode, GenSpec,
};
use mfas::instance::{
    parse_instance, serialize_instance, validate_hemimetric, validate_kgonal, Instance,
    ParseError, ValidateError, Weight, WEIGHT_SCALE,
};
use mfas::oracle::{exact_min_cover, exact_min_extension, OracleError};
use mfas::repair::{
    contradicting_pairs, repair, solve_pipeline, RepairError, RepairTrace, SolveReport,
};
use mfas::solution::{
    check_alternating_cycles, check_cover_feasible, check_fas_feasible, cost,
    delta_from_permutation, parse_solution, permutation_from_delta, serialize_solution,
    CostValue, SolutionError, SolutionParseError, Violation,
};
use num::BigRational;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const ENGINE: &str = concat!("mfas-", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(name = "mfas", version, about = "Minimum feedback arc set with fixed pairs: covering, repair, bounds, oracles, and generators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an instance and check its weight class
    Validate {
        file: PathBuf,
        /// Also check the k-gonal inequalities for this k
        #[arg(long)]
        k: Option<u32>,
    },
    /// Covering + repair pipeline: an order with exact costs
    Solve {
        file: PathBuf,
        /// Also certify a fractional lower bound
        #[arg(long)]
        bound: bool,
        /// Accuracy for the lower bound (with --bound)
        #[arg(long, default_value = "0.05")]
        eps: String,
        /// Write the repair trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustive optimum (small instances only)
    Exact {
        file: PathBuf,
        /// Optimize over coverings instead of orders
        #[arg(long)]
        cover: bool,
        /// Write the optimal covering to this file (with --cover)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified fractional lower bound only
    Bound {
        file: PathBuf,
        #[arg(long, default_value = "0.05")]
        eps: String,
    },
    /// Repair a covering from a solution file into an order
    Repair {
        file: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Write the repair trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a solution file against a constraint system
    Check {
        file: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, value_enum, default_value_t = Formulation::Fas)]
        formulation: Formulation,
        /// Cycle-length cap for --formulation cycles
        #[arg(long, default_value_t = 3)]
        max_cycle: usize,
    },
    /// Generate instances: seeded random draws, bundled ones, or a witness search
    Gen {
        /// Dump a bundled input instead of drawing one
        /// (appendix_a, k3_demo, fig5_cover)
        #[arg(long, conflicts_with = "witness")]
        name: Option<String>,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Probability of keeping a forward pair, as `num/den` or a decimal
        #[arg(long, default_value = "1/3")]
        density: String,
        /// Smallest weight (natural units)
        #[arg(long, default_value = "0")]
        lo: String,
        /// Largest weight (natural units)
        #[arg(long, default_value = "5")]
        hi: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Hemimetric)]
        mode: ModeArg,
        /// k for --mode kgonal
        #[arg(long, default_value_t = 4)]
        k: u32,
        /// Search for an instance plus a solution that satisfies the
        /// pairwise constraints yet beats every order
        #[arg(long)]
        witness: bool,
        /// Attempt budget for --witness
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Instance output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solution output file for --witness or --name fig5_cover
        #[arg(long)]
        solution_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Formulation {
    Fas,
    Cover,
    Cycles,
}

impl Formulation {
    fn name(self) -> &'static str {
        match self {
            Formulation::Fas => "fas",
            Formulation::Cover => "cover",
            Formulation::Cycles => "cycles",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Hemimetric,
    Kgonal,
    Probability,
}

struct Failure {
    code: u8,
    msg: String,
    dump: Option<String>,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Failure {
        Failure {
            code,
            msg: msg.into(),
            dump: None,
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        Failure::new(2, e.to_string())
    }
}

impl From<SolutionParseError> for Failure {
    fn from(e: SolutionParseError) -> Failure {
        Failure::new(2, e.to_string())
    }
}

impl From<ValidateError> for Failure {
    fn from(e: ValidateError) -> Failure {
        let code = match e {
            ValidateError::CapExceeded { .. } => 3,
            ValidateError::BadK { .. } => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Failure {
        let code = match e {
            CoverError::CapExceeded { .. } | CoverError::BudgetExhausted { .. } => 3,
            CoverError::BadEps => 2,
            CoverError::NotIntegral | CoverError::NotFeasibleInput { .. } => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        match e {
            OracleError::GuardExceeded { .. } => Failure::new(3, e.to_string()),
            OracleError::Cover(c) => c.into(),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Failure {
        let code = match e {
            GenError::GuardExceeded { .. } => 3,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<RepairError> for Failure {
    fn from(e: RepairError) -> Failure {
        match e {
            RepairError::LemmaViolated { ref dump, .. }
            | RepairError::NonTermination { ref dump, .. } => {
                let d = dump.clone();
                Failure {
                    code: 4,
                    msg: e.to_string(),
                    dump: Some(d),
                }
            }
            RepairError::NotHemimetric { .. } | RepairError::NotIntegral => {
                Failure::new(1, e.to_string())
            }
            RepairError::DimensionMismatch { .. } => Failure::new(2, e.to_string()),
            RepairError::Cover(c) => c.into(),
        }
    }
}

impl From<SolutionError> for Failure {
    fn from(e: SolutionError) -> Failure {
        match e {
            SolutionError::NotIntegral | SolutionError::NotFeasible { .. } => {
                Failure::new(1, e.to_string())
            }
            SolutionError::CycleCap { .. } => Failure::new(3, e.to_string()),
            SolutionError::Cover(c) => c.into(),
            _ => Failure::new(2, e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    // Rust ignores SIGPIPE by default, turning `mfas ... | head` into a
    // panic on the first write after the reader hangs up. Restore the
    // conventional behavior: die quietly like any other filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            if let Some(dump) = f.dump {
                eprintln!("{dump}");
            }
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Ok(parse_instance(&read_file(path)?)?)
}

fn load_solution(path: &Path, inst: &Instance) -> Result<mfas::solution::Solution, Failure> {
    Ok(parse_solution(&read_file(path)?, inst)?)
}

/// `num/den`, a bare integer, or a decimal with up to nine digits.
fn parse_density(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::new(2, format!("density {text:?} is not a rational in [0, 1]"));
    if let Some((num, den)) = text.split_once('/') {
        let num: u32 = num.trim().parse().map_err(|_| bad())?;
        let den: u32 = den.trim().parse().map_err(|_| bad())?;
        return Ok((num, den));
    }
    let w = Weight::parse_decimal(text).map_err(|_| bad())?;
    let units = w.units();
    let g = gcd(units, WEIGHT_SCALE);
    Ok(((units / g) as u32, (WEIGHT_SCALE / g) as u32))
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Exact rational from a decimal accuracy argument like `0.05`.
fn parse_eps(text: &str) -> Result<BigRational, Failure> {
    let w = Weight::parse_decimal(text)
        .map_err(|e| Failure::new(2, format!("eps {text:?}: {e}")))?;
    Ok(BigRational::new(w.units().into(), WEIGHT_SCALE.into()))
}

fn parse_weight(text: &str, what: &str) -> Result<Weight, Failure> {
    Weight::parse_decimal(text).map_err(|e| Failure::new(2, format!("{what} {text:?}: {e}")))
}

fn join_perm(perm: &[u32]) -> String {
    perm.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Costs print with 12 fractional digits, rounded down — exact whenever the
/// value is a fixed-point number, which covers every integral solution.
fn dec(v: &CostValue) -> String {
    v.decimal_floor(12)
}

fn print_order_report(perm: &[u32], report: &SolveReport) {
    println!("instance_digest={}", report.instance_digest);
    println!("order={}", join_perm(perm));
    println!("total_cost={}", dec(&report.total_cost));
    println!("variable_cost={}", dec(&report.variable_cost));
    println!("fixed_cost={}", report.fixed_cost);
    if let Some(lb) = &report.lower_bound {
        // Rounded down: the printed number is still a valid lower bound.
        println!("lower_bound={}", lb.decimal_floor(12));
    }
    if let Some(ratio) = &report.ratio_vs_bound {
        // Rounded up: the printed ratio is never better than the true one.
        let as_value = CostValue::Rational(ratio.clone());
        println!("ratio_vs_bound={}", as_value.decimal_ceil(6));
    }
    println!("iterations={}", report.iterations);
    println!("contradicting_initial={}", report.contradicting_initial);
    println!("alpha_guarantee={}", report.alpha_guarantee);
    println!("engine={ENGINE}");
}

fn write_trace(path: Option<&PathBuf>, trace: &RepairTrace) -> Result<(), Failure> {
    if let Some(path) = path {
        write_file(path, &trace.render())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Validate { file, k } => {
            let inst = load_instance(&file)?;
            let report = validate_hemimetric(&inst);
            println!("instance_digest={}", inst.digest());
            println!("n={}", inst.n());
            println!("hemimetric={}", report.is_hemimetric);
            println!("triangle_violations={}", report.violations.len());
            let mut ok = report.is_hemimetric;
            if let Some(k) = k {
                let kreport = validate_kgonal(&inst, k)?;
                println!("kgonal_k={k}");
                println!("kgonal={}", kreport.is_hemimetric);
                println!("kgonal_violations={}", kreport.violations.len());
                println!("kgonal_sampled={}", kreport.sampled);
                ok &= kreport.is_hemimetric;
            }
            println!("engine={ENGINE}");
            Ok(if ok { 0 } else { 1 })
        }

        Cmd::Solve {
            file,
            bound,
            eps,
            trace,
        } => {
            let inst = load_instance(&file)?;
            let eps = if bound { Some(parse_eps(&eps)?) } else { None };
            let (perm, report) = solve_pipeline(&inst, eps.as_ref())?;
            write_trace(trace.as_ref(), &report.trace)?;
            print_order_report(&perm, &report);
            Ok(0)
        }

        Cmd::Exact { file, cover, out } => {
            let inst = load_instance(&file)?;
            if cover {
                let (sol, variable) = exact_min_cover(&inst)?;
                if let Some(out) = out {
                    let text = serialize_solution(&sol).expect("integral solutions serialize");
                    write_file(&out, &text)?;
                }
                println!("instance_digest={}", inst.digest());
                println!("variable_cost={variable}");
                println!("support_size={}", sol.support_len());
                println!("engine={ENGINE}");
            } else {
                let result = exact_min_extension(&inst)?;
                let delta = delta_from_permutation(&result.best_perm, &inst)
                    .expect("oracle permutations extend the fixed pairs");
                let breakdown = cost(&delta, &inst).expect("oracle output matches the instance");
                println!("instance_digest={}", inst.digest());
                println!("order={}", join_perm(&result.best_perm));
                println!("total_cost={}", result.best_total_cost);
                println!("variable_cost={}", dec(&breakdown.variable_cost));
                println!("fixed_cost={}", breakdown.fixed_cost);
                println!("explored={}", result.explored);
                println!("engine={ENGINE}");
            }
            Ok(0)
        }

        Cmd::Bound { file, eps } => {
            let inst = load_instance(&file)?;
            let eps_text = eps.clone();
            let eps = parse_eps(&eps)?;
            let bound = mwu_fractional_cover(&inst, &eps)?;
            println!("instance_digest={}", inst.digest());
            println!("eps={eps_text}");
            // Primal rounds up, bound rounds down: both stay on the safe side.
            println!("primal_value={}", bound.primal_value.decimal_ceil(12));
            println!("lower_bound={}", bound.lower_bound.decimal_floor(12));
            println!("iterations={}", bound.iterations);
            println!("engine={ENGINE}");
            Ok(0)
        }

        Cmd::Repair {
            file,
            solution,
            trace,
        } => {
            let inst = load_instance(&file)?;
            let delta = load_solution(&solution, &inst)?;
            let contradicting_initial = contradicting_pairs(&delta)?.len();
            let (order, rtrace) = repair(&delta, &inst)?;
            let perm = permutation_from_delta(&order, &inst)
                .expect("repair output passes the order check");
            let breakdown = cost(&order, &inst).expect("repair output matches the instance");
            let report = SolveReport {
                instance_digest: inst.digest(),
                total_cost: breakdown.total_cost,
                variable_cost: breakdown.variable_cost,
                fixed_cost: breakdown.fixed_cost,
                lower_bound: None,
                ratio_vs_bound: None,
                iterations: rtrace.iterations.len() as u64,
                contradicting_initial,
                alpha_guarantee: 3,
                trace: rtrace,
            };
            write_trace(trace.as_ref(), &report.trace)?;
            print_order_report(&perm, &report);
            Ok(0)
        }

        Cmd::Check {
            file,
            solution,
            formulation,
            max_cycle,
        } => {
            let inst = load_instance(&file)?;
            let delta = load_solution(&solution, &inst)?;
            let violations: Vec<Violation> = match formulation {
                Formulation::Fas => check_fas_feasible(&delta, &inst)?,
                Formulation::Cover => check_cover_feasible(&delta, &inst)?,
                Formulation::Cycles => check_alternating_cycles(&delta, &inst, max_cycle)?,
            };
            let breakdown = cost(&delta, &inst)?;
            println!("instance_digest={}", inst.digest());
            println!("formulation={}", formulation.name());
            if formulation == Formulation::Cycles {
                println!("max_cycle={max_cycle}");
            }
            println!("feasible={}", violations.is_empty());
            println!("violations={}", violations.len());
            println!("total_cost={}", dec(&breakdown.total_cost));
            println!("variable_cost={}", dec(&breakdown.variable_cost));
            println!("fixed_cost={}", breakdown.fixed_cost);
            println!("engine={ENGINE}");
            for v in &violations {
                println!("violation={v}");
            }
            Ok(if violations.is_empty() { 0 } else { 1 })
        }

        Cmd::Gen {
            name,
            n,
            seed,
            density,
            lo,
            hi,
            mode,
            k,
            witness,
            budget,
            out,
            solution_out,
        } => {
            if let Some(name) = name {
                return run_gen_bundled(&name, out.as_ref(), solution_out.as_ref());
            }
            let density = parse_density(&density)?;
            let lo = parse_weight(&lo, "lo")?;
            let hi = parse_weight(&hi, "hi")?;
            let gen_mode = match mode {
                ModeArg::Hemimetric => GenMode::HemimetricClosure,
                ModeArg::Kgonal => GenMode::IntervalKgonal,
                ModeArg::Probability => GenMode::ProbabilityLike,
            };
            let spec = GenSpec::new(n, seed, density, (lo, hi), gen_mode)?;
            if witness {
                return run_gen_witness(&spec, budget, out.as_ref(), solution_out.as_ref());
            }
            let inst = match gen_mode {
                GenMode::HemimetricClosure => gen_hemimetric(&spec),
                GenMode::IntervalKgonal => gen_interval_kgonal(&spec, k)?,
                GenMode::ProbabilityLike => gen_probability_like(&spec),
            };
            // Sanity anchor: the instance's poset is the spec's poset.
            debug_assert_eq!(
                gen_poset(&spec).strict_pairs(),
                inst.poset().strict_pairs()
            );
            emit_instance(&inst, out.as_ref())
        }
    }
}

fn emit_instance(inst: &Instance, out: Option<&PathBuf>) -> Result<u8, Failure> {
    let text = serialize_instance(inst);
    match out {
        Some(path) => {
            write_file(path, &text)?;
            println!("instance_digest={}", inst.digest());
            println!("n={}", inst.n());
            println!("out={}", path.display());
            println!("engine={ENGINE}");
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn run_gen_bundled(
    name: &str,
    out: Option<&PathBuf>,
    solution_out: Option<&PathBuf>,
) -> Result<u8, Failure> {
    if name == "fig5_cover" {
        let (inst, delta) = bundled_solution(name)?;
        let text = serialize_solution(&delta).expect("bundled solutions serialize");
        match solution_out.or(out) {
            Some(path) => {
                write_file(path, &text)?;
                println!("instance_digest={}", inst.digest());
                println!("name={name}");
                println!("out={}", path.display());
                println!("engine={ENGINE}");
            }
            None => print!("{text}"),
        }
        return Ok(0);
    }
    let inst = bundled_instance(name)?;
    emit_instance(&inst, out)
}

fn run_gen_witness(
    spec: &GenSpec,
    budget: u64,
    out: Option<&PathBuf>,
    solution_out: Option<&PathBuf>,
) -> Result<u8, Failure> {
    match search_cycle_witness(spec, budget)? {
        None => {
            println!("found=false");
            println!("budget={budget}");
            println!("engine={ENGINE}");
            Ok(0)
        }
        Some((inst, delta)) => {
            let breakdown = cost(&delta, &inst).expect("witness matches its instance");
            let best = exact_min_extension(&inst).expect("witness instances stay tiny");
            if let Some(path) = out {
                write_file(path, &serialize_instance(&inst))?;
            }
            if let Some(path) = solution_out {
                let text = serialize_solution(&delta).expect("integral witnesses serialize");
                write_file(path, &text)?;
            }
            println!("found=true");
            println!("instance_digest={}", inst.digest());
            println!("witness_cost={}", dec(&breakdown.total_cost));
            println!("best_order_cost={}", best.best_total_cost);
            println!("engine={ENGINE}");
            Ok(0)
        }
    }
}
