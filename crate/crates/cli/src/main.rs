//! Command-line harness for the mpsat toolkit.
//!
//! Exit codes follow the SAT-competition convention where a solve outcome is
//! reported: 10 satisfiable, 20 unsatisfiable, 0 unknown. Usage and parse
//! errors exit 1. `equiv` exits 0 on a matched run and 1 on divergence.
//! Every command is deterministic given its flags; seeds never fall back to
//! an entropy source.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result, bail};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mpsat::equivalence::{ReferenceFault, run_coupled, run_coupled_with_fault};
use mpsat::formula::generate::generate_random_ksat;
use mpsat::mp::{MpRunConfig, MpTrace, mp_run};
use mpsat::solvers::{
    DpllTrace, FlipTrace, count_graph_reconfigurations, dpll, gsat, walksat_classic,
    walksat_uniform_literal,
};
use mpsat::{CnfFormula, SolveOutcome, SolveResult, brute_force_sat, emit_dimacs, parse_dimacs};

/// Ground truth in batch experiments comes from complete search up to this
/// many variables.
const GROUND_TRUTH_MAX_VARS: u32 = 60;

#[derive(Parser)]
#[command(
    name = "mpsat",
    version,
    about = "SAT toolkit: solvers, a message-passing machine over the literal-clause graph, and differential checks between them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random k-SAT instances as DIMACS files.
    Gen(GenArgs),
    /// Solve a DIMACS instance with a chosen solver.
    Solve(SolveArgs),
    /// Run the message-passing machine and report its trajectory.
    Simulate(SimulateArgs),
    /// Check step equivalence between the machine and the uniform-literal search.
    Equiv(EquivArgs),
    /// Compare graph reconfiguration counts: complete search vs the machine.
    DemoObs1(DemoArgs),
    /// Batch experiments over a generator sweep, with CSV and JSON reports.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    /// Classic WalkSAT (clause-first, noise/greedy split).
    Walksat,
    /// Uniform pick over all literals of unsatisfied clauses.
    WalksatUniform,
    Gsat,
    Dpll,
    /// Exhaustive enumeration (25-variable cap).
    Brute,
    /// The message-passing machine.
    Mp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    #[arg(short = 'n', long)]
    num_vars: u32,
    #[arg(short = 'm', long)]
    num_clauses: usize,
    #[arg(short = 'k', long, default_value_t = 3)]
    clause_width: u32,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// DIMACS file, or "-" for standard input.
    input: String,
    #[arg(long, value_enum)]
    solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flip budget for the local searches.
    #[arg(long, default_value_t = 100_000)]
    max_flips: u64,
    /// Noise probability for classic WalkSAT.
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// Restart budget for GSAT.
    #[arg(long, default_value_t = 10)]
    max_tries: u64,
    /// Iteration budget for the machine.
    #[arg(short = 'K', long, default_value_t = 100_000)]
    max_steps: u64,
    /// Embedding dimension for the machine.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the run trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Omit wall-time fields so output is byte-identical across runs.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// DIMACS file, or "-" for standard input.
    input: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'K', long, default_value_t = 100_000)]
    max_steps: u64,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct EquivArgs {
    /// DIMACS file, or "-" for standard input. Mutually exclusive with the
    /// generator flags.
    input: Option<String>,
    #[arg(long, requires = "gen_clauses", conflicts_with = "input")]
    gen_vars: Option<u32>,
    #[arg(long, requires = "gen_vars")]
    gen_clauses: Option<usize>,
    #[arg(long, default_value_t = 3)]
    gen_width: u32,
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'K', long, default_value_t = 1_000)]
    max_steps: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Flip the reference's selection rule; the checker must report a
    /// divergence. Mutation-testing hook.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct DemoArgs {
    /// DIMACS file, or "-" for standard input.
    input: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'K', long, default_value_t = 1_000)]
    max_steps: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(short = 'n', long)]
    num_vars: u32,
    /// Comma-separated clause counts to sweep.
    #[arg(short = 'm', long, value_delimiter = ',')]
    num_clauses: Vec<usize>,
    #[arg(short = 'k', long, default_value_t = 3)]
    clause_width: u32,
    /// Instances per parameter point.
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_flips: u64,
    #[arg(short = 'K', long, default_value_t = 10_000)]
    max_steps: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    no_timing: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Equiv(args) => cmd_equiv(args),
        Command::DemoObs1(args) => cmd_demo_obs1(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn read_formula(input: &str) -> Result<CnfFormula> {
    let text = if input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading standard input")?;
        buf
    } else {
        fs::read_to_string(input).with_context(|| format!("reading {input}"))?
    };
    parse_dimacs(&text).with_context(|| format!("parsing {input}"))
}

fn wall_ms(duration: Duration) -> f64 {
    duration.as_secs_f64() * 1e3
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let GenArgs {
        num_vars,
        num_clauses,
        clause_width,
        count,
        seed,
        out,
    } = args;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    for index in 0..count {
        let instance_seed = seed.wrapping_add(index);
        let formula = generate_random_ksat(num_vars, num_clauses, clause_width, instance_seed)?;
        let name = format!("n{num_vars}_m{num_clauses}_k{clause_width}_seed{instance_seed}_{index:04}.cnf");
        let mut text = format!(
            "c random {clause_width}-sat n={num_vars} m={num_clauses} seed={instance_seed}\n"
        );
        text.push_str(&emit_dimacs(&formula));
        fs::write(out.join(&name), text).with_context(|| format!("writing {name}"))?;
    }
    println!("wrote {count} instances to {}", out.display());
    Ok(0)
}

fn print_result(
    result: &SolveResult,
    format: Format,
    no_timing: bool,
    extra: Option<(&str, serde_json::Value)>,
) {
    let stats = result.stats();
    match format {
        Format::Human => {
            match result.outcome() {
                SolveOutcome::Sat(a) => {
                    println!("s SATISFIABLE");
                    println!("v {} 0", a.dimacs_line());
                }
                SolveOutcome::Unsat => println!("s UNSATISFIABLE"),
                SolveOutcome::Unknown => println!("s UNKNOWN"),
            }
            println!(
                "c flips={} decisions={} iterations={}",
                stats.flips, stats.decisions, stats.iterations
            );
            if !no_timing {
                println!("c wall_ms={:.3}", wall_ms(stats.wall_time));
            }
        }
        Format::Json => {
            let mut obj = json!({
                "outcome": result.outcome().label(),
                "assignment": result.assignment().map(|a| a.bit_string()),
                "flips": stats.flips,
                "decisions": stats.decisions,
                "iterations": stats.iterations,
            });
            if !no_timing {
                obj["wall_ms"] = json!(wall_ms(stats.wall_time));
            }
            if let Some((key, value)) = extra {
                obj[key] = value;
            }
            println!("{obj}");
        }
        Format::Csv => {
            let mut header = "outcome,assignment,flips,decisions,iterations".to_string();
            let mut row = format!(
                "{},{},{},{},{}",
                result.outcome().label(),
                result.assignment().map(|a| a.bit_string()).unwrap_or_default(),
                stats.flips,
                stats.decisions,
                stats.iterations
            );
            if !no_timing {
                header.push_str(",wall_ms");
                row.push_str(&format!(",{:.3}", wall_ms(stats.wall_time)));
            }
            println!("{header}");
            println!("{row}");
        }
    }
}

fn flip_trace_jsonl(trace: &FlipTrace) -> String {
    let mut out = String::new();
    for step in &trace.steps {
        let record = json!({
            "step": step.iteration,
            "flipped_var": step.flipped_var,
            "candidates": step.candidates.iter().map(|l| l.to_dimacs()).collect::<Vec<_>>(),
            "assignment": step.assignment_after.bit_string(),
        });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}

fn dpll_trace_jsonl(trace: &DpllTrace) -> String {
    let mut out = String::new();
    let initial = json!({
        "kind": "initial",
        "fingerprint": trace.initial_fingerprint.to_hex(),
    });
    out.push_str(&initial.to_string());
    out.push('\n');
    for event in &trace.events {
        let record = json!({
            "kind": event.kind.label(),
            "fingerprint": event.fingerprint.to_hex(),
        });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}

fn write_trace(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing trace {}", path.display()))
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let formula = read_formula(&args.input)?;
    let mut mp_trace: Option<MpTrace> = None;
    let result = match args.solver {
        SolverKind::Walksat => {
            let (result, trace) = walksat_classic(&formula, args.seed, args.noise, args.max_flips);
            if let Some(path) = &args.trace {
                write_trace(path, &flip_trace_jsonl(&trace))?;
            }
            result
        }
        SolverKind::WalksatUniform => {
            let (result, trace) = walksat_uniform_literal(&formula, args.seed, args.max_flips);
            if let Some(path) = &args.trace {
                write_trace(path, &flip_trace_jsonl(&trace))?;
            }
            result
        }
        SolverKind::Gsat => {
            if args.trace.is_some() {
                eprintln!("note: gsat records no trace");
            }
            gsat(&formula, args.seed, args.max_flips, args.max_tries)
        }
        SolverKind::Dpll => {
            let (result, trace) = dpll(&formula);
            if let Some(path) = &args.trace {
                write_trace(path, &dpll_trace_jsonl(&trace))?;
            }
            result
        }
        SolverKind::Brute => {
            if args.trace.is_some() {
                eprintln!("note: brute force records no trace");
            }
            brute_force_sat(&formula)?
        }
        SolverKind::Mp => {
            let config = MpRunConfig {
                seed: args.seed,
                dim: args.dim,
                max_iterations: args.max_steps,
                epsilon_scale: 1.0,
            };
            let (result, trace) = mp_run(&formula, &config);
            if let Some(path) = &args.trace {
                write_trace(path, &trace.to_jsonl())?;
            }
            mp_trace = Some(trace);
            result
        }
    };
    let extra = mp_trace
        .as_ref()
        .map(|t| ("graph_reconfigurations", json!(t.graph_reconfigurations())));
    print_result(&result, args.format, args.no_timing, extra);
    Ok(result.exit_code())
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let formula = read_formula(&args.input)?;
    let config = MpRunConfig {
        seed: args.seed,
        dim: args.dim,
        max_iterations: args.max_steps,
        epsilon_scale: 1.0,
    };
    let (result, trace) = mp_run(&formula, &config);
    if let Some(path) = &args.trace {
        write_trace(path, &trace.to_jsonl())?;
    }
    print_result(
        &result,
        args.format,
        args.no_timing,
        Some((
            "graph_reconfigurations",
            json!(trace.graph_reconfigurations()),
        )),
    );
    Ok(result.exit_code())
}

fn cmd_equiv(args: EquivArgs) -> Result<i32> {
    let formula = match (&args.input, args.gen_vars) {
        (Some(input), None) => read_formula(input)?,
        (None, Some(n)) => {
            let m = args.gen_clauses.expect("clap enforces the pairing");
            generate_random_ksat(n, m, args.gen_width, args.gen_seed)?
        }
        (None, None) => bail!("provide a DIMACS file (or \"-\") or --gen-vars/--gen-clauses"),
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting inputs"),
    };
    let report = if args.inject_fault {
        run_coupled_with_fault(
            &formula,
            args.seed,
            args.max_steps,
            ReferenceFault::SelectArgmin,
        )
    } else {
        run_coupled(&formula, args.seed, args.max_steps)
    };
    match args.format {
        Format::Human => {
            if report.matched {
                println!(
                    "matched: machine and reference identical for {} compared iterations",
                    report.steps_compared
                );
            } else {
                let d = report.first_divergence.expect("unmatched implies divergence");
                println!(
                    "diverged at iteration {} on {:?} (after {} compared iterations)",
                    d.step, d.field, report.steps_compared
                );
            }
        }
        Format::Json | Format::Csv => println!("{}", report.to_json()),
    }
    Ok(if report.matched { 0 } else { 1 })
}

fn cmd_demo_obs1(args: DemoArgs) -> Result<i32> {
    let formula = read_formula(&args.input)?;
    let (dpll_result, dpll_trace) = dpll(&formula);
    let dpll_reconfigurations = count_graph_reconfigurations(&dpll_trace);
    let config = MpRunConfig {
        seed: args.seed,
        dim: 8,
        max_iterations: args.max_steps,
        epsilon_scale: 1.0,
    };
    let (mp_result, mp_trace) = mp_run(&formula, &config);
    let mp_reconfigurations = mp_trace.graph_reconfigurations();
    match args.format {
        Format::Human => {
            println!(
                "dpll: outcome={} events={} graph_reconfigurations={dpll_reconfigurations}",
                dpll_result.outcome().label(),
                dpll_trace.events.len(),
            );
            println!(
                "machine: outcome={} iterations={} graph_reconfigurations={mp_reconfigurations}",
                mp_result.outcome().label(),
                mp_result.stats().iterations,
            );
        }
        Format::Json | Format::Csv => {
            let obj = json!({
                "dpll_outcome": dpll_result.outcome().label(),
                "dpll_events": dpll_trace.events.len(),
                "dpll_reconfigurations": dpll_reconfigurations,
                "mp_outcome": mp_result.outcome().label(),
                "mp_iterations": mp_result.stats().iterations,
                "mp_reconfigurations": mp_reconfigurations,
            });
            println!("{obj}");
        }
    }
    Ok(0)
}

struct BenchRow {
    instance: String,
    n: u32,
    m: usize,
    k: u32,
    gen_seed: u64,
    run_seed: u64,
    ground_truth: &'static str,
    uniform: SolveResult,
    mp: SolveResult,
    classic: SolveResult,
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut global_index = 0u64;
    for &m in &args.num_clauses {
        for i in 0..args.count {
            let gen_seed = args.seed.wrapping_add(global_index);
            let run_seed = args.seed.wrapping_add(1_000_000 + global_index);
            let formula = generate_random_ksat(args.num_vars, m, args.clause_width, gen_seed)?;
            let ground_truth = if args.num_vars <= GROUND_TRUTH_MAX_VARS {
                let (result, _) = dpll(&formula);
                if result.is_sat() { "sat" } else { "unsat" }
            } else {
                "unknown"
            };
            let (uniform, _) = walksat_uniform_literal(&formula, run_seed, args.max_flips);
            let config = MpRunConfig {
                seed: run_seed,
                dim: 8,
                max_iterations: args.max_steps,
                epsilon_scale: 1.0,
            };
            let (mp, _) = mp_run(&formula, &config);
            let (classic, _) = walksat_classic(&formula, run_seed, 0.5, args.max_flips);
            rows.push(BenchRow {
                instance: format!("n{}_m{m}_k{}_{i:04}", args.num_vars, args.clause_width),
                n: args.num_vars,
                m,
                k: args.clause_width,
                gen_seed,
                run_seed,
                ground_truth,
                uniform,
                mp,
                classic,
            });
            global_index += 1;
        }
    }

    let csv = bench_csv(&rows, args.no_timing);
    fs::write(args.out.join("bench.csv"), &csv).context("writing bench.csv")?;
    let report = bench_json(&args, &rows);
    fs::write(
        args.out.join("bench.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )
    .context("writing bench.json")?;

    for point in report["aggregates"].as_array().into_iter().flatten() {
        println!(
            "n={} m={}: {} instances, truth sat={} unsat={}, uniform rate on sat={}, machine rate on sat={}, machine sat-claims on unsat={}",
            point["n"], point["m"], point["instances"], point["sat"], point["unsat"],
            point["uniform_solve_rate_on_sat"], point["mp_solve_rate_on_sat"],
            point["mp_sat_claims_on_unsat"],
        );
    }
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(0)
}

fn bench_csv(rows: &[BenchRow], no_timing: bool) -> String {
    let mut out = String::from(
        "instance,n,m,k,gen_seed,run_seed,ground_truth,uniform_outcome,uniform_flips,mp_outcome,mp_iterations,classic_outcome,classic_flips",
    );
    if !no_timing {
        out.push_str(",uniform_wall_ms,mp_wall_ms,classic_wall_ms");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.instance,
            row.n,
            row.m,
            row.k,
            row.gen_seed,
            row.run_seed,
            row.ground_truth,
            row.uniform.outcome().label(),
            row.uniform.stats().flips,
            row.mp.outcome().label(),
            row.mp.stats().iterations,
            row.classic.outcome().label(),
            row.classic.stats().flips,
        ));
        if !no_timing {
            out.push_str(&format!(
                ",{:.3},{:.3},{:.3}",
                wall_ms(row.uniform.stats().wall_time),
                wall_ms(row.mp.stats().wall_time),
                wall_ms(row.classic.stats().wall_time),
            ));
        }
        out.push('\n');
    }
    out
}

fn median(mut values: Vec<u64>) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    Some(values[(values.len() - 1) / 2])
}

fn bench_json(args: &BenchArgs, rows: &[BenchRow]) -> serde_json::Value {
    let instances: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            json!({
                "instance": row.instance,
                "n": row.n,
                "m": row.m,
                "k": row.k,
                "gen_seed": row.gen_seed,
                "run_seed": row.run_seed,
                "ground_truth": row.ground_truth,
                "uniform_outcome": row.uniform.outcome().label(),
                "uniform_flips": row.uniform.stats().flips,
                "mp_outcome": row.mp.outcome().label(),
                "mp_iterations": row.mp.stats().iterations,
                "classic_outcome": row.classic.outcome().label(),
                "classic_flips": row.classic.stats().flips,
            })
        })
        .collect();

    let mut aggregates = Vec::new();
    for &m in &args.num_clauses {
        let point: Vec<&BenchRow> = rows.iter().filter(|r| r.m == m).collect();
        let sat: Vec<&&BenchRow> = point.iter().filter(|r| r.ground_truth == "sat").collect();
        let unsat: Vec<&&BenchRow> = point.iter().filter(|r| r.ground_truth == "unsat").collect();
        let rate = |solved: usize, total: usize| {
            if total == 0 {
                serde_json::Value::Null
            } else {
                json!(solved as f64 / total as f64)
            }
        };
        let uniform_solved = sat.iter().filter(|r| r.uniform.is_sat()).count();
        let mp_solved = sat.iter().filter(|r| r.mp.is_sat()).count();
        let mp_sat_claims_on_unsat = unsat.iter().filter(|r| r.mp.is_sat()).count();
        aggregates.push(json!({
            "n": args.num_vars,
            "m": m,
            "instances": point.len(),
            "sat": sat.len(),
            "unsat": unsat.len(),
            "uniform_solve_rate_on_sat": rate(uniform_solved, sat.len()),
            "mp_solve_rate_on_sat": rate(mp_solved, sat.len()),
            "mp_sat_claims_on_unsat": mp_sat_claims_on_unsat,
            "median_uniform_flips_on_solved": median(
                sat.iter().filter(|r| r.uniform.is_sat()).map(|r| r.uniform.stats().flips).collect()
            ),
            "median_mp_iterations_on_solved": median(
                sat.iter().filter(|r| r.mp.is_sat()).map(|r| r.mp.stats().iterations).collect()
            ),
        }));
    }

    json!({
        "params": {
            "n": args.num_vars,
            "m_sweep": args.num_clauses,
            "k": args.clause_width,
            "count": args.count,
            "seed": args.seed,
            "max_flips": args.max_flips,
            "max_steps": args.max_steps,
        },
        "instances": instances,
        "aggregates": aggregates,
    })
}
