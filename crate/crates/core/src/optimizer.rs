//! Grid search for the allocation `(Wp, TpF, TpR)` that maximizes the
//! secondary service rate subject to
//!
//! * PU queue stability, `lambda_p < eta`;
//! * energy benefit, `B_pc >= B_ref (1 + eps)`;
//! * SU decodability, `Wp TpF >= E`.
//!
//! Ties in `mu_s` go to the smallest `Wp`, then `TpF`, then `TpR`, so the
//! result does not depend on the order the parallel search visits points.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::baseline::{noncoop_optimize, BaselineReport};
use crate::channel::{min_bandwidth_time_product, outage_probability, LinkSpec};
use crate::coop::{self, slot_success, solve_chain, ChainSolution, CoopReport, OwnDataOutages};
use crate::model::{ResourceAllocation, SystemParams};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<F> {
    pub grid_wp: usize,
    pub grid_tpf: usize,
    pub grid_tpr: usize,
    /// Relative margin turning `B_pc > B_ref` into `B_pc >= B_ref (1 + eps)`.
    pub strictness_eps: F,
}

impl<F: Scalar> Default for OptimizerConfig<F> {
    fn default() -> Self {
        Self { grid_wp: 200, grid_tpf: 200, grid_tpr: 200, strictness_eps: F::lit(1e-9) }
    }
}

impl<F: Scalar> OptimizerConfig<F> {
    pub fn uniform(points: usize) -> Self {
        Self { grid_wp: points, grid_tpf: points, grid_tpr: points, ..Self::default() }
    }

    /// Next nested grid: `n -> 2n - 1` points, so every old point is kept.
    pub fn refined(&self) -> Self {
        Self {
            grid_wp: 2 * self.grid_wp - 1,
            grid_tpf: 2 * self.grid_tpf - 1,
            grid_tpr: 2 * self.grid_tpr - 1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_wp < 2 || self.grid_tpf < 2 || self.grid_tpr < 2 {
            return Err(Error::domain("grid counts must be at least 2"));
        }
        if !(self.strictness_eps >= F::zero()) {
            return Err(Error::domain("strictness_eps must be >= 0"));
        }
        Ok(())
    }
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
///
/// Point `i` is `lo + (hi - lo) * (i / (n - 1))`; the fraction is rounded once,
/// so grids with `n` and `2n - 1` points share their common points bit for bit.
pub fn linspace<F: Scalar>(lo: F, hi: F, n: usize) -> Vec<F> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = F::from_count((n - 1) as u64);
            (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * (F::from_count(i as u64) / last) }).collect()
        }
    }
}

/// Explicit candidate values per decision variable, each ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid<F> {
    pub wp: Vec<F>,
    pub tpf: Vec<F>,
    pub tpr: Vec<F>,
}

impl<F: Scalar> SearchGrid<F> {
    /// `Wp in [0, W]`, `TpF in [tau, T]`, `TpR in [0, T]`.
    pub fn uniform(p: &SystemParams<F>, cfg: &OptimizerConfig<F>) -> Self {
        Self {
            wp: linspace(F::zero(), p.bandwidth, cfg.grid_wp),
            tpf: linspace(p.sensing, p.slot, cfg.grid_tpf),
            tpr: linspace(F::zero(), p.slot, cfg.grid_tpr),
        }
    }

    pub fn len(&self) -> usize {
        self.wp.len() * self.tpf.len() * self.tpr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Margins of each constraint at the returned allocation; all nonnegative when
/// feasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSlacks<F> {
    /// `eta - lambda_p`.
    pub stability: F,
    /// `B_pc - B_ref (1 + eps)`.
    pub energy: F,
    /// `Wp TpF - E`.
    pub decoding: F,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumReport<F> {
    /// Best allocation, `None` when no grid point is feasible.
    pub alloc: Option<ResourceAllocation<F>>,
    /// Achieved `mu_s`; zero when infeasible (the SU gets no access).
    pub mu_s: F,
    pub report: Option<CoopReport<F>>,
    pub feasible: bool,
    pub constraint_slacks: Option<ConstraintSlacks<F>>,
    pub baseline: BaselineReport<F>,
    /// Packets per joule the cooperative scheme had to beat.
    pub reference_b: F,
    /// The baseline was unstable and `reference_b` is the saturated
    /// full-band value.
    pub extended_baseline: bool,
    /// Minimum bandwidth-time product `E`.
    pub min_product: F,
}

#[derive(Debug, Clone, Copy)]
struct Best<F> {
    mu: F,
    idx: (usize, usize, usize),
}

fn better<F: Scalar>(a: Best<F>, b: Best<F>) -> Best<F> {
    match a.mu.partial_cmp(&b.mu) {
        Some(Ordering::Greater) => a,
        Some(Ordering::Less) => b,
        _ if a.idx <= b.idx => a,
        _ => b,
    }
}

/// Context shared by every grid point.
struct Problem<'a, F> {
    p: &'a SystemParams<F>,
    min_product: F,
    /// `B_ref (1 + eps)`.
    energy_floor: F,
}

impl<F: Scalar> Problem<'_, F> {
    fn new<'a>(p: &'a SystemParams<F>, eps: F) -> (Problem<'a, F>, BaselineReport<F>, F) {
        let baseline = noncoop_optimize(p);
        let reference_b = baseline.reference_packets_per_joule(p);
        let problem =
            Problem { p, min_product: min_bandwidth_time_product(p), energy_floor: reference_b * (F::one() + eps) };
        (problem, baseline, reference_b)
    }

    /// `mu_s` at a point that already satisfies the decoding constraint, or
    /// `None` if stability or the energy benefit fails.
    fn objective(&self, alloc: &ResourceAllocation<F>, chain: &ChainSolution<F>, own: &OwnDataOutages<F>) -> Option<F> {
        if !chain.stable {
            return None;
        }
        let b_pc = coop::primary_packets_per_joule(self.p, alloc, chain).ok()?;
        if !(b_pc >= self.energy_floor) {
            return None;
        }
        chain.secondary_throughput(own).ok()
    }

    fn finish(
        &self,
        alloc: Option<ResourceAllocation<F>>,
        chain: Option<ChainSolution<F>>,
        baseline: BaselineReport<F>,
        reference_b: F,
    ) -> OptimumReport<F> {
        let report = alloc.zip(chain).and_then(|(a, c)| coop::assemble(self.p, &a, c, reference_b).ok());
        let slacks = alloc.zip(report).map(|(a, r)| ConstraintSlacks {
            stability: r.chain.eta - self.p.lambda_p,
            energy: r.b_pc - self.energy_floor,
            decoding: a.forward_footprint() - self.min_product,
        });
        OptimumReport {
            alloc: report.and(alloc),
            mu_s: report.map_or(F::zero(), |r| r.mu_s),
            report,
            feasible: report.is_some(),
            constraint_slacks: slacks,
            baseline,
            reference_b,
            extended_baseline: baseline.is_extended(),
            min_product: self.min_product,
        }
    }
}

/// Exhaustive search over the uniform grid of `cfg`.
pub fn optimize<F: Scalar>(p: &SystemParams<F>, cfg: &OptimizerConfig<F>) -> Result<OptimumReport<F>> {
    cfg.validate()?;
    p.validate()?;
    Ok(optimize_on(p, &SearchGrid::uniform(p, cfg), cfg.strictness_eps))
}

/// Exhaustive search over an explicit grid.
pub fn optimize_on<F: Scalar>(p: &SystemParams<F>, grid: &SearchGrid<F>, eps: F) -> OptimumReport<F> {
    let (problem, baseline, reference_b) = Problem::new(p, eps);

    let best = (0..grid.wp.len())
        .into_par_iter()
        .filter_map(|iw| {
            let wp = grid.wp[iw];
            if !(wp * p.slot >= problem.min_product) {
                return None;
            }
            let own = OwnDataOutages::for_secondary_band(p, (p.bandwidth - wp).max(F::zero()));
            let gammas: Vec<F> = grid.tpr.iter().map(|&t| slot_success(p, wp, t)).collect();
            let mut best: Option<Best<F>> = None;
            for (jf, &tpf) in grid.tpf.iter().enumerate() {
                if !(wp * tpf >= problem.min_product) {
                    continue;
                }
                let alpha = slot_success(p, wp, tpf);
                for (jr, &tpr) in grid.tpr.iter().enumerate() {
                    let Ok(chain) = solve_chain(p.lambda_p, alpha, gammas[jr]) else {
                        continue;
                    };
                    let alloc = ResourceAllocation::new(wp, tpf, tpr);
                    if let Some(mu) = problem.objective(&alloc, &chain, &own) {
                        let cand = Best { mu, idx: (iw, jf, jr) };
                        best = Some(best.map_or(cand, |b| better(b, cand)));
                    }
                }
            }
            best
        })
        .reduce_with(better);

    let alloc = best.map(|b| ResourceAllocation::new(grid.wp[b.idx.0], grid.tpf[b.idx.1], grid.tpr[b.idx.2]));
    let chain = alloc.and_then(|a| {
        let s = coop::success_probabilities(p, &a);
        solve_chain(p.lambda_p, s.alpha, s.gamma).ok()
    });
    problem.finish(alloc, chain, baseline, reference_b)
}

/// Relay-only delivery probabilities used when the direct PU link is
/// disconnected: `(alpha, gamma)` with the SU relaying for `T - TpF` and `T`.
pub fn relay_only_success<F: Scalar>(p: &SystemParams<F>, wp: F, tpf: F) -> (F, F) {
    let relay = |duration| {
        let l = LinkSpec::packet(p, duration, wp, p.snr_secondary(), p.sigma_s_pd);
        F::one() - outage_probability(&l)
    };
    (relay(p.slot - tpf), relay(p.slot))
}

/// Single-variable search for a disconnected direct link.
///
/// `TpF = max(E / Wp, tau)` and `TpR = 0`; only stability constrains `Wp`.
pub fn optimize_disconnected<F: Scalar>(p: &SystemParams<F>, cfg: &OptimizerConfig<F>) -> Result<OptimumReport<F>> {
    cfg.validate()?;
    p.validate()?;
    let (problem, baseline, reference_b) = Problem::new(p, cfg.strictness_eps);
    let grid = linspace(F::zero(), p.bandwidth, cfg.grid_wp);

    let mut best: Option<(F, ResourceAllocation<F>, ChainSolution<F>)> = None;
    for &wp in grid.iter().filter(|&&w| w > F::zero()) {
        let mut tpf = (problem.min_product / wp).max(p.sensing);
        if wp * tpf < problem.min_product {
            tpf *= F::one() + F::lit(4.0) * F::epsilon();
        }
        if tpf > p.slot {
            continue;
        }
        let (alpha, gamma) = relay_only_success(p, wp, tpf);
        let Ok(chain) = solve_chain(p.lambda_p, alpha, gamma) else {
            continue;
        };
        if !chain.stable {
            continue;
        }
        let alloc = ResourceAllocation::new(wp, tpf, F::zero());
        let Ok(mu) = chain.secondary_throughput(&OwnDataOutages::new(p, &alloc)) else {
            continue;
        };
        if best.as_ref().is_none_or(|(m, _, _)| mu > *m) {
            best = Some((mu, alloc, chain));
        }
    }
    let (alloc, chain) = best.map(|(_, a, c)| (a, c)).unzip();
    Ok(problem.finish(alloc, chain, baseline, reference_b))
}
