//! Flat `key = value` run configuration.
//!
//! One key per line; `#` starts a comment; blank lines are ignored. Unknown or
//! repeated keys are errors. Missing keys take the defaults of
//! [`SystemParams::default`], [`OptimizerConfig::default`] and
//! [`SimSettings::default`].

use std::path::PathBuf;

use crate::channel::DecodeModel;
use crate::model::{ResourceAllocation, SystemParams};
use crate::optimizer::OptimizerConfig;
use crate::sim::SimConfig;
use crate::{Error, Result, Scalar};

/// Keys naming a [`SystemParams`] field, in file order.
pub const PARAM_KEYS: [&str; 15] = [
    "b",
    "W",
    "T",
    "tau",
    "N0",
    "Pp",
    "Ps",
    "M",
    "Q_target",
    "sigma_p_pd",
    "sigma_s_sd",
    "sigma_s_pd",
    "sigma_p_s",
    "lambda_p",
    "lambda_s",
];

/// Overwrite the parameter named `key`. `M` must be a positive integer.
pub fn set_param<F: Scalar>(p: &mut SystemParams<F>, key: &str, value: f64) -> Result<()> {
    let v = F::lit(value);
    match key {
        "b" => p.packet_bits = v,
        "W" => p.bandwidth = v,
        "T" => p.slot = v,
        "tau" => p.sensing = v,
        "N0" => p.noise_psd = v,
        "Pp" => p.primary_psd = v,
        "Ps" => p.secondary_psd = v,
        "M" => {
            if value.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&value) {
                return Err(Error::domain(format!("M must be a positive integer, got {value}")));
            }
            p.antennas = value as u32;
        }
        "Q_target" => p.decode_target = v,
        "sigma_p_pd" => p.sigma_p_pd = v,
        "sigma_s_sd" => p.sigma_s_sd = v,
        "sigma_s_pd" => p.sigma_s_pd = v,
        "sigma_p_s" => p.sigma_p_s = v,
        "lambda_p" => p.lambda_p = v,
        "lambda_s" => p.lambda_s = v,
        _ => return Err(Error::domain(format!("`{key}` is not a system parameter"))),
    }
    Ok(())
}

/// One-dimensional sweep `from, from + step, ..., <= to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    /// One of [`PARAM_KEYS`].
    pub var: &'static str,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { var: "lambda_p", from: 0.0, to: 1.0, step: 0.005 }
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if !(self.step > 0.0) || self.to < self.from {
            return vec![self.from];
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.from + i as f64 * self.step).collect()
    }
}

/// Simulation settings for `simulate` and for sweeps with `simulate = true`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimSettings {
    /// Run the simulator at each sweep optimum.
    pub enabled: bool,
    pub run: SimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<F> {
    pub params: SystemParams<F>,
    pub optimizer: OptimizerConfig<F>,
    pub sweep: SweepSpec,
    pub sim: SimSettings,
    /// Fixed allocation for `simulate`; the optimizer's choice when `None`.
    pub alloc: Option<ResourceAllocation<F>>,
    pub output: Option<PathBuf>,
}

impl<F: Scalar> Default for RunConfig<F> {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            optimizer: OptimizerConfig::default(),
            sweep: SweepSpec::default(),
            sim: SimSettings::default(),
            alloc: None,
            output: None,
        }
    }
}

impl<F: Scalar> RunConfig<F> {
    /// Parameters with the sweep variable set to `value`.
    pub fn params_at(&self, value: f64) -> Result<SystemParams<F>> {
        let mut p = self.params;
        set_param(&mut p, self.sweep.var, value)?;
        Ok(p)
    }

    /// Check parameters, optimizer settings, the allocation and every sweep
    /// point.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.optimizer.validate().map_err(|_| {
            Error::Validation(vec![crate::Violation { field: "grid", rule: "grid >= 2, strictness_eps >= 0" }])
        })?;
        if let Some(a) = &self.alloc {
            a.validate(&self.params)?;
        }
        if !(self.sweep.step > 0.0) || self.sweep.to < self.sweep.from {
            return Err(Error::Validation(vec![crate::Violation {
                field: "sweep_step",
                rule: "sweep_step > 0 and sweep_from <= sweep_to",
            }]));
        }
        for v in self.sweep.values() {
            self.params_at(v)
                .map_err(|_| Error::Validation(vec![crate::Violation { field: "sweep", rule: "M must be integral" }]))?
                .validate()?;
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("`{key}`: `{raw}` is not a number") })
}

fn parse_count(line: usize, key: &str, raw: &str) -> Result<u64> {
    // accept scientific notation such as 1e6 for counts
    let v = parse_f64(line, key, raw)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::Parse { line, message: format!("`{key}` must be a nonnegative integer") });
    }
    Ok(v as u64)
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse { line, message: format!("`{key}` must be true or false") }),
    }
}

/// Parse a configuration file. Validation runs after parsing.
pub fn parse_config<F: Scalar>(text: &str) -> Result<RunConfig<F>> {
    let mut cfg = RunConfig::<F>::default();
    let mut seen: Vec<String> = Vec::new();
    let (mut wp, mut tpf, mut tpr) = (None, None, None);

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
        seen.push(key.to_string());

        match key {
            k if PARAM_KEYS.contains(&k) => {
                let v = parse_f64(line, k, value)?;
                set_param(&mut cfg.params, k, v).map_err(|e| Error::Parse { line, message: e.to_string() })?;
            }
            "sigma_s_sd_list" | "sigma_s_pd_list" => {
                let gains = value.split(',').map(|s| parse_f64(line, key, s.trim())).collect::<Result<Vec<_>>>()?;
                let best = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if gains.is_empty() || !best.is_finite() {
                    return Err(Error::Parse { line, message: format!("`{key}` needs at least one gain") });
                }
                let field = key.trim_end_matches("_list");
                set_param(&mut cfg.params, field, best).expect("known field");
            }
            "grid_wp" => cfg.optimizer.grid_wp = parse_count(line, key, value)? as usize,
            "grid_tpf" => cfg.optimizer.grid_tpf = parse_count(line, key, value)? as usize,
            "grid_tpr" => cfg.optimizer.grid_tpr = parse_count(line, key, value)? as usize,
            "grid" => {
                let n = parse_count(line, key, value)? as usize;
                cfg.optimizer = OptimizerConfig { grid_wp: n, grid_tpf: n, grid_tpr: n, ..cfg.optimizer };
            }
            "strictness_eps" => cfg.optimizer.strictness_eps = F::lit(parse_f64(line, key, value)?),
            "sweep_var" => {
                cfg.sweep.var = PARAM_KEYS
                    .iter()
                    .find(|&&k| k == value)
                    .ok_or_else(|| Error::Parse { line, message: format!("unknown sweep variable `{value}`") })?;
            }
            "sweep_from" => cfg.sweep.from = parse_f64(line, key, value)?,
            "sweep_to" => cfg.sweep.to = parse_f64(line, key, value)?,
            "sweep_step" => cfg.sweep.step = parse_f64(line, key, value)?,
            "simulate" => cfg.sim.enabled = parse_bool(line, key, value)?,
            "slots" => cfg.sim.run.slots = parse_count(line, key, value)?,
            "warmup" => cfg.sim.run.warmup = parse_count(line, key, value)?,
            "seed" => cfg.sim.run.seed = parse_count(line, key, value)?,
            "trace_stride" => cfg.sim.run.trace_stride = parse_count(line, key, value)?,
            "decode" => {
                cfg.sim.run.decode = match value {
                    "mrc" => DecodeModel::Mrc,
                    "bound" => DecodeModel::SeparateBound,
                    "ideal" => DecodeModel::Ideal,
                    _ => return Err(Error::Parse { line, message: "decode must be mrc, bound or ideal".into() }),
                }
            }
            "Wp" => wp = Some(parse_f64(line, key, value)?),
            "TpF" => tpf = Some(parse_f64(line, key, value)?),
            "TpR" => tpr = Some(parse_f64(line, key, value)?),
            "output" => cfg.output = Some(PathBuf::from(value)),
            _ => return Err(Error::Parse { line, message: format!("unknown key `{key}`") }),
        }
    }

    cfg.alloc = match (wp, tpf, tpr) {
        (None, None, None) => None,
        (Some(w), Some(f), Some(r)) => Some(ResourceAllocation::new(F::lit(w), F::lit(f), F::lit(r))),
        _ => {
            return Err(Error::Parse { line: 0, message: "Wp, TpF and TpR must be given together".into() });
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
