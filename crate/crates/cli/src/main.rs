//! `cogrelay`: baseline, optimize, simulate and sweep from a flat config file.
//!
//! Exit codes: 0 on success, 1 for invalid configuration or parameters,
//! 2 for I/O failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cogrelay::config::{parse_config, RunConfig};
use cogrelay::optimizer::{optimize, OptimumReport};
use cogrelay::{baseline, sim, sweep, Error, RunConfig64};

#[derive(Debug, Parser)]
#[command(name = "cogrelay", version, about = "Cooperative cognitive relaying toolkit")]
struct Cli {
    /// Configuration file (`key = value` per line). Defaults apply without one.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Write results here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid points per optimization variable.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Simulated slots after warm-up.
    #[arg(long, global = true)]
    slots: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Non-cooperative benchmark.
    Baseline,
    /// Grid-search the cooperative allocation.
    Optimize,
    /// Simulate at the configured allocation, or at the optimum.
    Simulate,
    /// Sweep one parameter and write CSV.
    Sweep,
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            e => Failure::Invalid(e.to_string()),
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig64, Failure> {
    let mut cfg: RunConfig64 = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| match e {
                Error::Io(e) => Failure::Io(e.to_string()),
                e => Failure::Invalid(format!("{}: {e}", path.display())),
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sim.run.seed = seed;
    }
    if let Some(n) = cli.grid {
        cfg.optimizer.grid_wp = n;
        cfg.optimizer.grid_tpf = n;
        cfg.optimizer.grid_tpr = n;
    }
    if let Some(slots) = cli.slots {
        cfg.sim.run.slots = slots;
    }
    if cli.output.is_some() {
        cfg.output = cli.output.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key} = {value}").expect("write to string");
}

/// Floats print with ten significant digits.
fn kvf(out: &mut String, key: &str, value: f64) {
    kv(out, key, format_args!("{value:.9e}"));
}

fn render_baseline(cfg: &RunConfig64) -> String {
    let p = &cfg.params;
    let r = baseline::noncoop_optimize(p);
    let mut s = String::new();
    kvf(&mut s, "lambda_p", p.lambda_p);
    kv(&mut s, "feasible", r.feasible);
    kvf(&mut s, "W_opt", r.w_opt);
    kvf(&mut s, "mu_p_nc", r.mu_p_nc);
    kvf(&mut s, "mu_max", r.mu_max);
    kvf(&mut s, "B_nc_max", r.b_max);
    kvf(&mut s, "B_ref", r.reference_packets_per_joule(p));
    s
}

fn render_optimum(s: &mut String, o: &OptimumReport<f64>) {
    kv(s, "feasible", o.feasible);
    kvf(s, "B_ref", o.reference_b);
    kv(s, "extended_baseline", o.extended_baseline);
    kvf(s, "E_min", o.min_product);
    kvf(s, "mu_s", o.mu_s);
    if let Some(a) = o.alloc {
        kvf(s, "Wp", a.wp);
        kvf(s, "TpF", a.tpf);
        kvf(s, "TpR", a.tpr);
    }
    if let Some(r) = o.report {
        kvf(s, "B_pc", r.b_pc);
        kvf(s, "pi0", r.chain.pi0);
        kvf(s, "sum_pi", r.chain.sum_pi);
        kvf(s, "sum_eps", r.chain.sum_eps);
        kvf(s, "alpha", r.chain.alpha);
        kvf(s, "gamma", r.chain.gamma);
        kvf(s, "eta", r.chain.eta);
    }
    if let Some(c) = o.constraint_slacks {
        kvf(s, "slack_stability", c.stability);
        kvf(s, "slack_energy", c.energy);
        kvf(s, "slack_decoding", c.decoding);
    }
}

fn render_simulate(cfg: &RunConfig64) -> Result<String, Failure> {
    let p = &cfg.params;
    let mut s = String::new();
    let alloc = match cfg.alloc {
        Some(a) => a,
        None => {
            let o = optimize(p, &cfg.optimizer)?;
            o.alloc.ok_or_else(|| Failure::Invalid("no feasible allocation to simulate".into()))?
        }
    };
    kvf(&mut s, "Wp", alloc.wp);
    kvf(&mut s, "TpF", alloc.tpf);
    kvf(&mut s, "TpR", alloc.tpr);
    let reference = baseline::noncoop_optimize(p).reference_packets_per_joule(p);
    if let Ok(r) = cogrelay::coop::evaluate(p, &alloc, reference) {
        kvf(&mut s, "mu_s", r.mu_s);
        kvf(&mut s, "B_pc", r.b_pc);
        kvf(&mut s, "pi0", r.chain.pi0);
        kvf(&mut s, "sum_pi", r.chain.sum_pi);
        kvf(&mut s, "sum_eps", r.chain.sum_eps);
    }
    let st = sim::run(p, &alloc, &cfg.sim.run)?;
    kv(&mut s, "seed", st.rng_seed());
    kv(&mut s, "slots", st.slots);
    kvf(&mut s, "pi0_hat", st.pi0_hat());
    kvf(&mut s, "sum_pi_hat", st.sum_pi_hat());
    kvf(&mut s, "sum_eps_hat", st.sum_eps_hat());
    kvf(&mut s, "mu_s_hat", st.mu_s_hat());
    kvf(&mut s, "mu_p_hat", st.mu_p_hat());
    kvf(&mut s, "B_pc_hat", st.b_pc_hat());
    kvf(&mut s, "B_pc_statewise_hat", st.b_pc_statewise_hat());
    kvf(&mut s, "qp_drift", st.qp_drift());
    kv(&mut s, "final_qp", st.final_queues.qp);
    Ok(s)
}

fn emit(cfg: &RunConfig64, bytes: &[u8]) -> Result<(), Failure> {
    let res = match &cfg.output {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout().lock().write_all(bytes).map_err(|e| e.to_string()),
    };
    res.map_err(Failure::Io)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let text = match cli.command {
        Command::Baseline => render_baseline(&cfg),
        Command::Optimize => {
            let mut s = String::new();
            render_optimum(&mut s, &optimize(&cfg.params, &cfg.optimizer)?);
            s
        }
        Command::Simulate => render_simulate(&cfg)?,
        Command::Sweep => {
            let rows = sweep::run_sweep(&cfg)?;
            let mut buf = Vec::new();
            sweep::write_csv(&rows, &mut buf).map_err(|e| Failure::Io(e.to_string()))?;
            return emit(&cfg, &buf);
        }
    };
    emit(&cfg, text.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
