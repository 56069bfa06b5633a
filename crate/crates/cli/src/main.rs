//! `arctic`: generate, solve, verify and benchmark arctic auction instances.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 for usage and
//! input errors, 3 when the solver trips one of its own internal checks.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use arctic_core::cost::{serialize_cost_solution, CostMarketInstance, CostSolution};
use arctic_core::market::{generate_random_costs, parse_equilibrium, serialize_instance};
use arctic_core::oracle::oracle_solve_detailed;
use arctic_core::{
    generate_random_instance, parse_instance, serialize_equilibrium, solve_cost_market, solve_with, verify_arctic_kkt,
    verify_cost_kkt, verify_market_clearing, Error, MarketInstance, SolverOptions,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arctic", version, about = "Exact equilibria for arctic auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input file; `-` or absent reads stdin.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output file; absent writes stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Size {
    #[arg(long, default_value_t = 3)]
    buyers: usize,
    #[arg(long, default_value_t = 3)]
    goods: usize,
    #[arg(long, default_value_t = 10)]
    max_value: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        size: Size,
        /// Also draw unit production costs.
        #[arg(long)]
        costs: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the equilibrium.
    Solve {
        #[command(flatten)]
        io: Io,
        /// Also write the event trace CSV here.
        #[arg(long)]
        trace_file: Option<PathBuf>,
    },
    /// Check a solution against the optimality conditions.
    Verify {
        #[command(flatten)]
        io: Io,
        /// Solution produced by `solve`, `oracle` or `cost`.
        #[arg(long)]
        solution: PathBuf,
    },
    /// Brute-force equilibrium by support enumeration (small instances).
    Oracle {
        #[command(flatten)]
        io: Io,
    },
    /// Solve the market with unit production costs.
    Cost {
        #[command(flatten)]
        io: Io,
    },
    /// Solve seeded instances and report counts and timings as CSV.
    Bench {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[command(flatten)]
        size: Size,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Event trace of a run as CSV, from a file or a seeded instance.
    Trace {
        #[command(flatten)]
        io: Io,
        /// Generate the instance from this seed instead of reading one.
        #[arg(long, conflicts_with = "input")]
        seed: Option<u64>,
        #[command(flatten)]
        size: Size,
        /// Write the CSV here (same as `--output`).
        #[arg(long, conflicts_with = "output")]
        trace_file: Option<PathBuf>,
        /// Print one line per phase to stderr.
        #[arg(short, long)]
        verbose: bool,
    },
}

/// Failures that map to a specific exit status.
#[derive(Debug)]
enum Exit {
    Verification,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for Exit {}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => io::read_to_string(io::stdin()).context("reading stdin"),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn check_size(size: &Size) -> Result<()> {
    if size.buyers == 0 || size.goods == 0 || size.max_value < 1 {
        bail!("--buyers, --goods and --max-value must all be at least 1");
    }
    Ok(())
}

fn load_instance(io: &Io) -> Result<MarketInstance> {
    Ok(parse_instance(&read_input(io.input.as_deref())?)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { seed, size, costs, output } => {
            check_size(&size)?;
            let text = if costs {
                let (base, d) = generate_random_costs(seed, size.buyers, size.goods, size.max_value);
                CostMarketInstance::new(base, d)?.to_json()
            } else {
                serialize_instance(&generate_random_instance(seed, size.buyers, size.goods, size.max_value))
            };
            write_output(output.as_deref(), &text)
        }
        Command::Solve { io, trace_file } => {
            let inst = load_instance(&io)?;
            let opts = SolverOptions { record_trace: trace_file.is_some(), ..SolverOptions::default() };
            let out = solve_with(&inst, &opts)?;
            if let (Some(path), Some(trace)) = (&trace_file, &out.trace) {
                write_output(Some(path), &trace.to_csv())?;
            }
            write_output(io.output.as_deref(), &serialize_equilibrium(&out.equilibrium, &out.stats))
        }
        Command::Verify { io, solution } => {
            let inst_text = read_input(io.input.as_deref())?;
            let sol_text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let sol_json: serde_json::Value = serde_json::from_str(&sol_text).context("solution is not JSON")?;
            let (report, clearing) = if sol_json.get("produced").is_some() {
                let inst = CostMarketInstance::parse(&inst_text)?;
                let sol: CostSolution = serde_json::from_value(sol_json).context("reading cost solution")?;
                (verify_cost_kkt(&inst, &sol)?, None)
            } else {
                let inst = parse_instance(&inst_text)?;
                let eq = parse_equilibrium(&sol_text)?;
                (verify_arctic_kkt(&inst, &eq)?, Some(verify_market_clearing(&inst, &eq)))
            };
            let mut doc = serde_json::to_value(&report)?;
            if let Some(c) = clearing {
                doc["market_clearing"] = serde_json::to_value(c)?;
            }
            write_output(io.output.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
            if report.overall {
                Ok(())
            } else {
                Err(Exit::Verification.into())
            }
        }
        Command::Oracle { io } => {
            let inst = load_instance(&io)?;
            let sol = oracle_solve_detailed(&inst)?;
            let mut doc = serde_json::to_value(&sol.equilibrium)?;
            doc["support"] = serde_json::to_value(&sol.support)?;
            write_output(io.output.as_deref(), &serde_json::to_string_pretty(&doc)?)
        }
        Command::Cost { io } => {
            let inst = CostMarketInstance::parse(&read_input(io.input.as_deref())?)?;
            write_output(io.output.as_deref(), &serialize_cost_solution(&solve_cost_market(&inst)?))
        }
        Command::Bench { seed, count, size, output } => {
            check_size(&size)?;
            let mut csv = String::from("n,m,seed,phases,type1,type2,type3,maxflow_calls,micros\n");
            for s in seed..seed + count {
                let inst = generate_random_instance(s, size.buyers, size.goods, size.max_value);
                let start = Instant::now();
                let out = solve_with(&inst, &SolverOptions::default())?;
                let micros = start.elapsed().as_micros();
                let st = &out.stats;
                csv.push_str(&format!(
                    "{},{},{s},{},{},{},{},{},{micros}\n",
                    size.buyers,
                    size.goods,
                    st.phase_count,
                    st.phase_types.type1,
                    st.phase_types.type2,
                    st.phase_types.type3,
                    st.maxflow_calls
                ));
            }
            write_output(output.as_deref(), &csv)
        }
        Command::Trace { io, seed, size, trace_file, verbose } => {
            let inst = match seed {
                Some(s) => {
                    check_size(&size)?;
                    generate_random_instance(s, size.buyers, size.goods, size.max_value)
                }
                None => load_instance(&io)?,
            };
            let out = solve_with(&inst, &SolverOptions { record_trace: true, ..SolverOptions::default() })?;
            if verbose {
                for r in &out.stats.potential_trace {
                    eprintln!(
                        "phase {} {:?}: phi {} -> {}, {} live buyers",
                        r.phase, r.phase_type, r.phi_before, r.phi_after, r.live_buyers
                    );
                }
            }
            let csv = out.trace.expect("trace requested").to_csv();
            write_output(trace_file.as_deref().or(io.output.as_deref()), &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Exit>().is_some() {
                ExitCode::from(1)
            } else if matches!(e.downcast_ref::<Error>(), Some(Error::Contract(_))) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
