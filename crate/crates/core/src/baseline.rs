//! Non-cooperative benchmark: the PU transmits alone over the whole slot on a
//! bandwidth it picks to maximize delivered packets per joule.

use crate::channel::{LinkSpec, MAX_SPECTRAL_EFFICIENCY};
use crate::model::SystemParams;
use crate::Scalar;

/// Outcome of the bandwidth-minimizing program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineReport<F> {
    /// Optimal transmission bandwidth in Hz.
    pub w_opt: F,
    /// Service rate at `w_opt`, packets/slot.
    pub mu_p_nc: F,
    /// Service rate at the full band `W`.
    pub mu_max: F,
    /// Maximum packets per joule; zero when infeasible.
    pub b_max: F,
    /// `lambda_p <= mu_max`.
    pub feasible: bool,
}

impl<F: Scalar> BaselineReport<F> {
    /// Packets per joule the cooperative scheme must beat.
    ///
    /// For an infeasible baseline this is the saturated-queue value at the full
    /// band, `mu_max / (Pp T W)` (the "extended" baseline).
    pub fn reference_packets_per_joule(&self, p: &SystemParams<F>) -> F {
        if self.feasible {
            self.b_max
        } else {
            self.mu_max / (p.primary_psd * p.slot * p.bandwidth)
        }
    }

    pub fn is_extended(&self) -> bool {
        !self.feasible
    }
}

/// Success probability of a lone PU transmission over `wb` Hz for `T` s.
pub fn noncoop_service_rate<F: Scalar>(p: &SystemParams<F>, wb: F) -> F {
    let link = LinkSpec::packet(p, p.slot, wb, p.snr_primary(), p.sigma_p_pd);
    let mean = link.snr.get() * link.gain;
    if !(wb > F::zero()) || !(mean > F::zero()) {
        return F::zero();
    }
    let se = link.rate / wb;
    if se > F::lit(MAX_SPECTRAL_EFFICIENCY) {
        return F::zero();
    }
    (-(se * F::LN_2()).exp_m1() / mean).exp().clamp_unit()
}

/// `mu_max`: service rate at the full band.
pub fn max_service_rate<F: Scalar>(p: &SystemParams<F>) -> F {
    noncoop_service_rate(p, p.bandwidth)
}

/// Smallest bandwidth whose service rate reaches `lambda`,
/// `b / (T log2(1 - gamma sigma ln lambda))`. Zero for `lambda = 0`.
pub fn min_stable_bandwidth<F: Scalar>(p: &SystemParams<F>, lambda: F) -> F {
    if lambda <= F::zero() {
        return F::zero();
    }
    let mean = p.snr_primary().get() * p.sigma_p_pd;
    let se = (F::one() - mean * lambda.ln()).log2();
    p.packet_bits / (p.slot * se)
}

/// Solve the non-cooperative packets-per-joule problem.
///
/// Maximizing `lambda / (Pp T W)` under `lambda <= mu(W)` reduces to the
/// smallest stable bandwidth.
pub fn noncoop_optimize<F: Scalar>(p: &SystemParams<F>) -> BaselineReport<F> {
    let mu_max = max_service_rate(p);
    let lambda = p.lambda_p;
    if lambda > mu_max {
        return BaselineReport { w_opt: p.bandwidth, mu_p_nc: mu_max, mu_max, b_max: F::zero(), feasible: false };
    }
    if lambda <= F::zero() {
        return BaselineReport { w_opt: F::zero(), mu_p_nc: F::zero(), mu_max, b_max: F::zero(), feasible: true };
    }
    let w_opt = min_stable_bandwidth(p, lambda).min(p.bandwidth);
    BaselineReport {
        w_opt,
        mu_p_nc: noncoop_service_rate(p, w_opt),
        mu_max,
        b_max: lambda / (p.primary_psd * p.slot * w_opt),
        feasible: true,
    }
}
