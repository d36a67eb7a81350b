//! Cooperative-mode analytics.
//!
//! The PU queue is a Markov chain over `Idle`, `(Forward, k)` and
//! `(Retransmission, k)` where `k >= 1` is the queue length. In forward slots
//! the packet is delivered with probability `alpha`; in retransmission slots
//! with probability `gamma`. The primary destination decodes the PU copy and
//! the SU relay copy separately, so a slot fails only if both legs are in
//! outage.

use crate::channel::{outage_probability, secondary_rate, LinkSpec};
use crate::model::{PrimaryState, ResourceAllocation, SystemParams};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProbabilities<F> {
    /// Delivery probability of a forward slot.
    pub alpha: F,
    /// Delivery probability of a retransmission slot.
    pub gamma: F,
}

/// Delivery probability of a slot where the PU sends for `tp` seconds and the
/// SU relays for the remaining `T - tp`, both on `wp` Hz.
pub fn slot_success<F: Scalar>(p: &SystemParams<F>, wp: F, tp: F) -> F {
    let direct = LinkSpec::packet(p, tp, wp, p.snr_primary(), p.sigma_p_pd);
    let relay = LinkSpec::packet(p, p.slot - tp, wp, p.snr_secondary(), p.sigma_s_pd);
    (F::one() - outage_probability(&direct) * outage_probability(&relay)).clamp_unit()
}

pub fn success_probabilities<F: Scalar>(p: &SystemParams<F>, alloc: &ResourceAllocation<F>) -> SuccessProbabilities<F> {
    SuccessProbabilities { alpha: slot_success(p, alloc.wp, alloc.tpf), gamma: slot_success(p, alloc.wp, alloc.tpr) }
}

/// Stationary aggregates of the PU chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSolution<F> {
    pub lambda_p: F,
    pub alpha: F,
    pub gamma: F,
    /// `lambda alpha + (1 - lambda) gamma`; the chain is stable iff `lambda < eta`.
    pub eta: F,
    /// `(1 - lambda) eta`.
    pub psi: F,
    /// Idle probability.
    pub pi0: F,
    /// Total forward-state probability.
    pub sum_pi: F,
    /// Total retransmission-state probability.
    pub sum_eps: F,
    pub stable: bool,
}

/// Solve the PU chain in closed form.
///
/// When unstable the queue never empties; `pi0` is then 0 and the forward and
/// retransmission shares are those of the saturated two-state chain,
/// `gamma / (gamma + 1 - alpha)` and `(1 - alpha) / (gamma + 1 - alpha)`.
pub fn solve_chain<F: Scalar>(lambda_p: F, alpha: F, gamma: F) -> Result<ChainSolution<F>> {
    let zero = F::zero();
    let one = F::one();
    let in_unit = |x: F| x >= zero && x <= one;
    if !in_unit(lambda_p) || !in_unit(alpha) || !in_unit(gamma) {
        return Err(Error::domain("chain inputs must lie in [0,1]"));
    }
    let eta = lambda_p * alpha + (one - lambda_p) * gamma;
    let psi = (one - lambda_p) * eta;
    let base = ChainSolution { lambda_p, alpha, gamma, eta, psi, pi0: one, sum_pi: zero, sum_eps: zero, stable: true };
    if lambda_p == zero {
        return Ok(base);
    }
    if gamma == zero {
        return Err(Error::domain("gamma = 0 with traffic: the chain absorbs in retransmission"));
    }
    let miss = one - alpha;
    if lambda_p < eta {
        Ok(ChainSolution {
            pi0: ((eta - lambda_p) / gamma).clamp_unit(),
            sum_pi: lambda_p,
            sum_eps: lambda_p * miss / gamma,
            ..base
        })
    } else {
        let denom = gamma + miss;
        Ok(ChainSolution { pi0: zero, sum_pi: gamma / denom, sum_eps: miss / denom, stable: false, ..base })
    }
}

impl<F: Scalar> ChainSolution<F> {
    /// Long-run delivery rate of a PU whose queue never empties,
    /// `gamma / (gamma + 1 - alpha)`.
    pub fn saturated_service_rate(&self) -> F {
        self.gamma / (self.gamma + F::one() - self.alpha)
    }

    /// Ratio of the geometric tail, `lambda (1 - eta) / psi`.
    pub fn tail_ratio(&self) -> F {
        self.lambda_p * (F::one() - self.eta) / self.psi
    }

    /// Probability of `(state, k)`; `Idle` only with `k = 0`.
    pub fn state_probability(&self, state: PrimaryState, k: u64) -> Result<F> {
        if !self.stable {
            return Err(Error::domain("per-state probabilities need a stable chain"));
        }
        let one = F::one();
        let lambda = self.lambda_p;
        let miss = one - self.alpha;
        match (state, k) {
            (PrimaryState::Idle, 0) => Ok(self.pi0),
            (PrimaryState::Idle, _) | (_, 0) => Err(Error::domain("Idle pairs with k = 0, busy states with k >= 1")),
            _ if lambda == F::zero() => Ok(F::zero()),
            (PrimaryState::Forward, 1) => Ok(self.pi0 * lambda / self.psi * (lambda + (one - lambda) * self.gamma)),
            (PrimaryState::Retransmission, 1) => Ok(self.pi0 * lambda * miss / self.eta),
            _ if miss == F::zero() => Ok(F::zero()),
            (state, k) => {
                let idle_gap = one - self.eta;
                let weight = match state {
                    PrimaryState::Forward => lambda,
                    _ => one - lambda,
                };
                Ok(self.pi0 * weight * miss / (idle_gap * idle_gap) * self.tail_ratio().powf(F::from_count(k)))
            }
        }
    }
}

/// Outage of the SU own-data link in each PU state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwnDataOutages<F> {
    pub idle: F,
    pub forward: F,
    pub retransmission: F,
}

impl<F: Scalar> OwnDataOutages<F> {
    /// Full band `W` while idle, `Ws = W - Wp` while the PU is active.
    pub fn new(p: &SystemParams<F>, alloc: &ResourceAllocation<F>) -> Self {
        Self::for_secondary_band(p, alloc.ws(p))
    }

    pub fn for_secondary_band(p: &SystemParams<F>, ws: F) -> Self {
        let link = |state, bw| {
            let l = LinkSpec::new(secondary_rate(state, p), bw, p.snr_secondary(), p.sigma_s_sd);
            outage_probability(&l)
        };
        Self {
            idle: link(PrimaryState::Idle, p.bandwidth),
            forward: link(PrimaryState::Forward, ws),
            retransmission: link(PrimaryState::Retransmission, ws),
        }
    }
}

impl<F: Scalar> ChainSolution<F> {
    /// Secondary service rate with a backlogged SU queue.
    pub fn secondary_throughput(&self, own: &OwnDataOutages<F>) -> Result<F> {
        if !self.stable {
            return Err(Error::domain("secondary throughput needs a stable PU chain"));
        }
        let one = F::one();
        let mu =
            self.pi0 * (one - own.idle) + self.sum_pi * (one - own.forward) + self.sum_eps * (one - own.retransmission);
        Ok(mu.clamp_unit())
    }
}

/// `mu_s` for an allocation and its chain.
pub fn secondary_throughput<F: Scalar>(
    p: &SystemParams<F>,
    alloc: &ResourceAllocation<F>,
    chain: &ChainSolution<F>,
) -> Result<F> {
    chain.secondary_throughput(&OwnDataOutages::new(p, alloc))
}

/// Delivered primary packets per joule of primary transmit energy.
///
/// Forward and retransmission slots are charged `Pp Wp TpF` and `Pp Wp TpR`;
/// the per-state ratios are summed. With `TpR = 0` the retransmission term
/// vanishes because the PU spends nothing there.
pub fn primary_packets_per_joule<F: Scalar>(
    p: &SystemParams<F>,
    alloc: &ResourceAllocation<F>,
    chain: &ChainSolution<F>,
) -> Result<F> {
    if !(alloc.wp > F::zero()) {
        return Err(Error::domain("packets per joule undefined for Wp = 0"));
    }
    if !(alloc.tpf > F::zero()) {
        return Err(Error::domain("packets per joule undefined for TpF = 0"));
    }
    if !chain.stable {
        return Err(Error::domain("packets per joule needs a stable PU chain"));
    }
    let unit = p.primary_psd * alloc.wp;
    let forward = chain.alpha * chain.sum_pi / (unit * alloc.tpf);
    if alloc.tpr > F::zero() {
        Ok(forward + chain.gamma * chain.sum_eps / (unit * alloc.tpr))
    } else {
        Ok(forward)
    }
}

/// Everything the optimizer needs to know about one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopReport<F> {
    pub chain: ChainSolution<F>,
    pub mu_s: F,
    pub b_pc: F,
    /// `b_pc` strictly exceeds the non-cooperative reference.
    pub coop_beneficial: bool,
    /// `Wp TpF >= min_bandwidth_time_product`.
    pub decode_ok: bool,
}

/// Evaluate an allocation against the non-cooperative reference packets per
/// joule. Fails if the PU chain is unstable or `Wp = 0`.
pub fn evaluate<F: Scalar>(
    p: &SystemParams<F>,
    alloc: &ResourceAllocation<F>,
    reference_b: F,
) -> Result<CoopReport<F>> {
    let s = success_probabilities(p, alloc);
    let chain = solve_chain(p.lambda_p, s.alpha, s.gamma)?;
    assemble(p, alloc, chain, reference_b)
}

pub(crate) fn assemble<F: Scalar>(
    p: &SystemParams<F>,
    alloc: &ResourceAllocation<F>,
    chain: ChainSolution<F>,
    reference_b: F,
) -> Result<CoopReport<F>> {
    let mu_s = secondary_throughput(p, alloc, &chain)?;
    let b_pc = primary_packets_per_joule(p, alloc, &chain)?;
    Ok(CoopReport {
        chain,
        mu_s,
        b_pc,
        coop_beneficial: b_pc > reference_b,
        decode_ok: alloc.forward_footprint() >= crate::channel::min_bandwidth_time_product(p),
    })
}
