//! Parameter sweeps and their CSV output.

use std::io::Write;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::model::ResourceAllocation;
use crate::optimizer::{optimize, OptimumReport};
use crate::sim::{self, SimConfig, SimStats};
use crate::{Result, Scalar};

pub const CSV_HEADER: &str = "sweep_value,B_nc_max,W_opt,feasible,Wp,TpF,TpR,mu_s,B_pc,mu_s_hat,B_pc_hat,seed";

/// One sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<F> {
    pub value: f64,
    pub optimum: OptimumReport<F>,
    /// Simulation at the optimum, when enabled and feasible.
    pub sim: Option<SimStats<F>>,
    /// Seed of this row's simulation (`seed + row index`).
    pub seed: u64,
}

impl<F: Scalar> SweepRow<F> {
    /// CSV line without the trailing newline. Undefined fields are empty.
    pub fn to_csv(&self) -> String {
        let o = &self.optimum;
        let num = |x: F| format!("{:.9e}", x.to_f64_lossy());
        let opt = |x: Option<F>| x.map(num).unwrap_or_default();
        let a: Option<ResourceAllocation<F>> = o.alloc;
        [
            format!("{:.9e}", self.value),
            num(o.reference_b),
            num(o.baseline.w_opt),
            o.feasible.to_string(),
            opt(a.map(|a| a.wp)),
            opt(a.map(|a| a.tpf)),
            opt(a.map(|a| a.tpr)),
            num(o.mu_s),
            opt(o.report.map(|r| r.b_pc)),
            opt(self.sim.as_ref().map(SimStats::mu_s_hat)),
            opt(self.sim.as_ref().map(SimStats::b_pc_hat)),
            self.seed.to_string(),
        ]
        .join(",")
    }
}

/// Evaluate one sweep point.
pub fn sweep_point<F: Scalar>(cfg: &RunConfig<F>, index: usize, value: f64) -> Result<SweepRow<F>> {
    let p = cfg.params_at(value)?;
    let optimum = optimize(&p, &cfg.optimizer)?;
    let seed = cfg.sim.run.seed.wrapping_add(index as u64);
    let sim = match (cfg.sim.enabled, optimum.alloc) {
        (true, Some(alloc)) => Some(sim::run(&p, &alloc, &SimConfig { seed, ..cfg.sim.run })?),
        _ => None,
    };
    Ok(SweepRow { value, optimum, sim, seed })
}

/// Evaluate every sweep point in parallel; rows come back in sweep order.
pub fn run_sweep<F: Scalar>(cfg: &RunConfig<F>) -> Result<Vec<SweepRow<F>>> {
    cfg.validate()?;
    cfg.sweep.values().into_par_iter().enumerate().map(|(i, v)| sweep_point(cfg, i, v)).collect()
}

/// Header plus one newline-terminated line per row.
pub fn write_csv<F: Scalar, W: Write>(rows: &[SweepRow<F>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    out.flush()
}
