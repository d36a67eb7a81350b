//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use cogrelay::baseline::{max_service_rate, noncoop_optimize, noncoop_service_rate};
use cogrelay::channel::{min_bandwidth_time_product, mrc_decode_failure, outage_probability, LinkSpec};
use cogrelay::coop::{secondary_throughput, solve_chain, success_probabilities};
use cogrelay::optimizer::{optimize, OptimizerConfig};
use cogrelay::sim::{self, SimConfig};
use cogrelay::{PrimaryState, ResourceAllocation, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type P = SystemParams<f64>;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn common(m: u32, ps: f64, lambda_p: f64) -> P {
    SystemParams { antennas: m, secondary_psd: ps, lambda_p, ..SystemParams::default() }
}

fn chain_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut triples = Vec::new();
    while triples.len() < 1000 {
        let (l, a, g) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        if l < l * a + (1.0 - l) * g {
            triples.push((l, a, g));
        }
    }
    let start = Instant::now();
    let mut worst_norm = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut truncated = 0;
    for &(l, a, g) in &triples {
        let c = solve_chain(l, a, g).expect("stable triple");
        worst_norm = worst_norm.max((c.pi0 + c.sum_pi + c.sum_eps - 1.0).abs());
        // a truncated sum can only match when the tail beyond k = 1e4 is negligible
        if c.tail_ratio().powi(10_000) > 1e-13 {
            truncated += 1;
            continue;
        }
        let (mut sf, mut sr) = (0.0, 0.0);
        for k in 1..=10_000u64 {
            sf += c.state_probability(PrimaryState::Forward, k).unwrap();
            sr += c.state_probability(PrimaryState::Retransmission, k).unwrap();
        }
        worst_sum = worst_sum.max((sf - c.sum_pi).abs()).max((sr - c.sum_eps).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_norm < 1e-12 && worst_sum < 1e-10 && secs < 1.0,
        format!(
            "max |sum - 1| = {worst_norm:.2e}, max per-k gap = {worst_sum:.2e} ({} of 1000 triples, {truncated} with tails beyond 1e4 skipped), {secs:.2} s",
            1000 - truncated
        ),
    )
}

fn simulator_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let base = common(7, 1e-10, 0.5);
    let e = min_bandwidth_time_product(&base);
    let mut cases = Vec::new();
    while cases.len() < 10 {
        let lambda = 0.05 + 0.75 * rng.random::<f64>();
        let wp = e / base.slot + (base.bandwidth - e / base.slot) * rng.random::<f64>();
        let tpf_lo = base.sensing.max(e / wp);
        let tpf = tpf_lo + (base.slot - tpf_lo) * rng.random::<f64>();
        let tpr = base.slot * rng.random::<f64>();
        let p = SystemParams { lambda_p: lambda, ..base };
        let a = ResourceAllocation::new(wp, tpf, tpr);
        let s = success_probabilities(&p, &a);
        match solve_chain(lambda, s.alpha, s.gamma) {
            Ok(c) if c.stable => cases.push((p, a, c)),
            _ => {}
        }
    }
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, (p, a, c)) in cases.iter().enumerate() {
        let start = Instant::now();
        let cfg = SimConfig { slots: 1_000_000, warmup: 10_000, seed: 100 + i as u64, ..SimConfig::default() };
        let st = sim::run(p, a, &cfg).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let mu = secondary_throughput(p, a, c).unwrap();
        let z = |hat: f64, want: f64| (hat - want).abs() / st.binomial_se(want).max(1e-300);
        let z0 = z(st.pi0_hat(), c.pi0);
        let zf = z(st.sum_pi_hat(), c.sum_pi);
        let zr = z(st.sum_eps_hat(), c.sum_eps);
        let rel = (st.mu_s_hat() - mu).abs() / mu;
        let ok = z0 <= 3.0 && zf <= 3.0 && zr <= 3.0 && rel <= 0.01 && secs < 30.0;
        pass &= ok;
        lines.push(format!(
            "[{i}: lambda={:.3} eta={:.3} z=({z0:.2},{zf:.2},{zr:.2}) mu_s rel={rel:.4} {secs:.1}s{}]",
            p.lambda_p,
            c.eta,
            if ok { "" } else { " FAIL" }
        ));
    }
    outcome(pass, lines.join(" "))
}

fn baseline_closed_form() -> Outcome {
    let p = common(7, 1e-10, 0.5);
    let mu_max = max_service_rate(&p);
    let r = noncoop_optimize(&p);
    let tight = (noncoop_service_rate(&p, r.w_opt) - 0.5).abs();
    outcome(
        (mu_max - 0.81292).abs() <= 1e-4 && tight <= 1e-9,
        format!("mu_max = {mu_max:.9}, |mu(W_opt) - 0.5| = {tight:.2e}"),
    )
}

fn lambda_sweep() -> Vec<f64> {
    (0..=200).map(|i| i as f64 * 0.005).collect()
}

fn crossover() -> Outcome {
    let start = Instant::now();
    let cfg = OptimizerConfig::uniform(200);
    let feasible: Vec<(f64, bool)> =
        lambda_sweep().into_par_iter().map(|l| (l, optimize(&common(6, 5e-11, l), &cfg).unwrap().feasible)).collect();
    let last = feasible.iter().filter(|(l, f)| *f && *l > 0.0).map(|(l, _)| *l).fold(f64::NAN, f64::max);
    outcome(
        (last - 0.475).abs() <= 0.02,
        format!("largest feasible lambda_p = {last:.3} (target 0.475 +- 0.02), {:.1} s", start.elapsed().as_secs_f64()),
    )
}

fn energy_gain() -> Outcome {
    let p = common(7, 1e-10, 0.7);
    let o = optimize(&p, &OptimizerConfig::uniform(200)).unwrap();
    let b_max = noncoop_optimize(&p).b_max;
    let Some(r) = o.report else {
        return outcome(false, "no feasible allocation".into());
    };
    let gain = r.b_pc / b_max;
    let a = o.alloc.unwrap();
    outcome(
        (gain - 8.65).abs() <= 0.865,
        format!(
            "B_pc / B_nc_max = {gain:.4} (target 8.65 +- 10%), alloc Wp={:.4e} TpF={:.4e} TpR={:.4e}",
            a.wp, a.tpf, a.tpr
        ),
    )
}

fn antenna_threshold() -> Outcome {
    let wt = 1e7 * 4e-4;
    let e5 = min_bandwidth_time_product(&common(5, 1e-10, 0.5));
    let e6 = min_bandwidth_time_product(&common(6, 1e-10, 0.5));
    let cfg = OptimizerConfig::uniform(50);
    let loads: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let none_below = (1..6).all(|m| loads.iter().all(|&l| !optimize(&common(m, 1e-10, l), &cfg).unwrap().feasible));
    let some_at_six = lambda_sweep()
        .into_iter()
        .filter(|&l| l > 0.0)
        .find(|&l| optimize(&common(6, 1e-10, l), &OptimizerConfig::uniform(200)).unwrap().feasible);
    outcome(
        e5 > wt && e6 <= wt && none_below && some_at_six.is_some(),
        format!(
            "E(5) = {e5:.1}, E(6) = {e6:.1}, WT = {wt}, M<6 infeasible: {none_below}, first feasible lambda_p at M=6: {some_at_six:?}"
        ),
    )
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coarse = OptimizerConfig::uniform(21);
    let grids = [coarse, coarse.refined()];
    let mut checked = 0;
    let mut failures = Vec::new();
    for case in 0..48 {
        let lambda = 0.05 + 0.55 * rng.random::<f64>();
        let base = common(7, 1e-10, lambda);
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let (lo, hi) = (u.min(v), u.max(v));
        let (name, low, high) = match case % 4 {
            0 => {
                let m = 6 + (lo * 5.0) as u32;
                ("M", SystemParams { antennas: m, ..base }, SystemParams { antennas: m + 1, ..base })
            }
            1 => (
                "sigma_s_sd",
                SystemParams { sigma_s_sd: 0.05 + 0.5 * lo, ..base },
                SystemParams { sigma_s_sd: 0.05 + 0.5 * hi, ..base },
            ),
            2 => (
                "sigma_s_pd",
                SystemParams { sigma_s_pd: 0.1 + lo, ..base },
                SystemParams { sigma_s_pd: 0.1 + hi, ..base },
            ),
            _ => (
                "Ps",
                SystemParams { secondary_psd: 5e-11 + 1.5e-10 * lo, ..base },
                SystemParams { secondary_psd: 5e-11 + 1.5e-10 * hi, ..base },
            ),
        };
        for g in &grids {
            let a = optimize(&low, g).unwrap().mu_s;
            let b = optimize(&high, g).unwrap().mu_s;
            checked += 1;
            if b < a - 1e-12 {
                failures.push(format!("{name} lambda={lambda:.3} grid={}: {a:.6} -> {b:.6}", g.grid_wp));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{checked} comparisons nondecreasing")
    } else {
        format!(
            "{} of {checked} comparisons decrease, e.g. {}",
            failures.len(),
            failures[..failures.len().min(4)].join("; ")
        )
    };
    outcome(failures.is_empty(), detail)
}

fn mrc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base = common(1, 1e-10, 0.5);
    let mean = base.sigma_p_s * base.snr_primary().get();
    let mut worst_z = 0.0f64;
    for _ in 0..20 {
        let m = 1 + rng.random_range(0..8u32);
        // normalized threshold x / (sigma gamma) around the bulk of the Erlang law
        let t = m as f64 * (0.3 + 1.4 * rng.random::<f64>());
        let p = SystemParams { antennas: m, ..base };
        let wp = p.packet_bits / (p.slot * (1.0 + t * mean).log2());
        let a = ResourceAllocation::new(wp, p.slot, 0.0);
        let want = mrc_decode_failure(&p, &a).unwrap();
        let x = (2f64.powf(p.packet_bits / (a.tpf * a.wp))) - 1.0;
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                let snr: f64 =
                    (0..m).map(|_| -p.sigma_p_s * (1.0 - rng.random::<f64>()).ln()).sum::<f64>() * mean / p.sigma_p_s;
                snr < x
            })
            .count();
        let hat = hits as f64 / n as f64;
        let se = (want * (1.0 - want) / n as f64).sqrt();
        worst_z = worst_z.max((hat - want).abs() / se);
    }
    let mut worst_single = 0.0f64;
    for i in 1..50 {
        let wp = 2e5 * i as f64;
        let p = common(1, 1e-10, 0.5);
        let a = ResourceAllocation::new(wp, 3e-4, 0.0);
        let link = LinkSpec::packet(&p, a.tpf, a.wp, p.snr_primary(), p.sigma_p_s);
        worst_single = worst_single.max((mrc_decode_failure(&p, &a).unwrap() - outage_probability(&link)).abs());
    }
    outcome(
        worst_z <= 3.0 && worst_single <= 1e-12,
        format!("max MC z-score = {worst_z:.2} over 20 points, M=1 max gap = {worst_single:.2e}"),
    )
}

fn instability() -> Outcome {
    let p = common(7, 1e-10, 0.95);
    // full-slot PU bursts leave no relay time, so both states are direct-only
    let a = ResourceAllocation::new(4e6, p.slot, p.slot);
    let s = success_probabilities(&p, &a);
    let c = solve_chain(p.lambda_p, s.alpha, s.gamma).unwrap();
    let want = p.lambda_p - c.eta;
    let st =
        sim::run(&p, &a, &SimConfig { slots: 1_000_000, warmup: 10_000, seed: 9, ..SimConfig::default() }).unwrap();
    let drift = st.qp_drift();
    let rel = (drift - want).abs() / want;
    outcome(
        !c.stable && rel <= 0.1,
        format!("eta = {:.4}, lambda_p - eta = {want:.4}, simulated drift = {drift:.4} (rel err {rel:.4})", c.eta),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("chain normalization", chain_normalization),
        ("simulator vs analysis", simulator_oracle),
        ("baseline closed form", baseline_closed_form),
        ("crossover load", crossover),
        ("energy gain", energy_gain),
        ("antenna threshold", antenna_threshold),
        ("monotonicity", monotonicity),
        ("MRC CDF oracle", mrc_oracle),
        ("instability detection", instability),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} ({name}): {} - {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
