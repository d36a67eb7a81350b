//! PHY-layer closed forms under Rayleigh block fading.
//!
//! A link `j -> rho` carrying rate `r` over bandwidth `W` is in outage when
//! `W log2(1 + gamma g) < r`, with `g ~ Exp(mean sigma)`. Hence
//! `P_out = 1 - exp(-(2^{r/W} - 1) / (sigma gamma))`.

use crate::model::{PrimaryState, ReceivedSnr, ResourceAllocation, SystemParams};
use crate::special::regularized_gamma_p;
use crate::{Error, Result, Scalar};

/// Spectral efficiencies above this are treated as certain outage (`2^x`
/// overflows `f64` at 1024).
pub const MAX_SPECTRAL_EFFICIENCY: f64 = 1024.0;

/// One point-to-point link in a given PU state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec<F> {
    /// Transmission rate in bit/s. May be `+inf` for a zero-length burst.
    pub rate: F,
    /// Transmission bandwidth in Hz.
    pub bandwidth: F,
    pub snr: ReceivedSnr<F>,
    /// Expected channel gain `sigma`.
    pub gain: F,
}

impl<F: Scalar> LinkSpec<F> {
    pub fn new(rate: F, bandwidth: F, snr: ReceivedSnr<F>, gain: F) -> Self {
        Self { rate, bandwidth, snr, gain }
    }

    /// Link carrying one `b`-bit packet in `duration` seconds. A zero duration
    /// gives an infinite rate.
    pub fn packet(p: &SystemParams<F>, duration: F, bandwidth: F, snr: ReceivedSnr<F>, gain: F) -> Self {
        let rate = if duration > F::zero() { p.packet_bits / duration } else { F::infinity() };
        Self::new(rate, bandwidth, snr, gain)
    }

    /// Smallest channel gain `g` for which the link is not in outage,
    /// `(2^{r/W} - 1) / gamma`. Infinite when the link can never succeed.
    pub fn gain_threshold(&self) -> F {
        let snr = self.snr.get();
        if !(self.bandwidth > F::zero()) || !(snr > F::zero()) {
            return F::infinity();
        }
        let se = self.rate / self.bandwidth;
        if !se.is_finite() || se > F::lit(MAX_SPECTRAL_EFFICIENCY) {
            return F::infinity();
        }
        (se * F::LN_2()).exp_m1() / snr
    }
}

/// Outage probability of a Rayleigh link.
///
/// Exactly 1 when the bandwidth, gain or SNR is zero or the rate is not
/// finite.
pub fn outage_probability<F: Scalar>(link: &LinkSpec<F>) -> F {
    if !(link.gain > F::zero()) {
        return F::one();
    }
    let threshold = link.gain_threshold();
    if threshold.is_infinite() {
        return F::one();
    }
    (-(-threshold / link.gain).exp_m1()).clamp_unit()
}

/// Rate the SU uses for its own packets in a given PU state.
///
/// Idle and forward slots lose `tau` to sensing; retransmission slots skip
/// sensing because the NACK already announced PU activity.
pub fn secondary_rate<F: Scalar>(state: PrimaryState, p: &SystemParams<F>) -> F {
    match state {
        PrimaryState::Idle | PrimaryState::Forward => p.packet_bits / (p.slot - p.sensing),
        PrimaryState::Retransmission => p.packet_bits / p.slot,
    }
}

/// Per-antenna `p -> s` SNR threshold `x = 2^{b / (TpF Wp)} - 1`, infinite
/// when unreachable.
fn mrc_threshold<F: Scalar>(p: &SystemParams<F>, alloc: &ResourceAllocation<F>) -> Result<F> {
    if !(alloc.wp > F::zero()) || !(alloc.tpf > F::zero()) {
        return Err(Error::domain("MRC decoding needs Wp > 0 and TpF > 0"));
    }
    let se = p.packet_bits / (alloc.tpf * alloc.wp);
    if !se.is_finite() || se > F::lit(MAX_SPECTRAL_EFFICIENCY) {
        return Ok(F::infinity());
    }
    Ok((se * F::LN_2()).exp_m1())
}

/// Probability the SU fails to decode a forward-slot primary packet after
/// maximum ratio combining over its `M` antennas.
///
/// With i.i.d. `Exp(sigma_p_s)` per-antenna gains the combined gain is
/// Erlang-`M`, so the failure probability is `P(M, x / (sigma_p_s gamma_p))`.
pub fn mrc_decode_failure<F: Scalar>(p: &SystemParams<F>, alloc: &ResourceAllocation<F>) -> Result<F> {
    let x = mrc_threshold(p, alloc)?;
    let mean = p.sigma_p_s * p.snr_primary().get();
    if x.is_infinite() || !(mean > F::zero()) {
        return Ok(F::one());
    }
    regularized_gamma_p(F::lit(p.antennas as f64), x / mean)
}

/// Failure probability when each antenna decodes on its own:
/// `[1 - exp(-x / (sigma gamma))]^M`. Upper-bounds [`mrc_decode_failure`].
pub fn separate_decoding_failure<F: Scalar>(p: &SystemParams<F>, alloc: &ResourceAllocation<F>) -> Result<F> {
    let x = mrc_threshold(p, alloc)?;
    let mean = p.sigma_p_s * p.snr_primary().get();
    if x.is_infinite() || !(mean > F::zero()) {
        return Ok(F::one());
    }
    let single = -(-x / mean).exp_m1();
    Ok(single.powi(p.antennas as i32).clamp_unit())
}

/// Which expression is used as the operative SU decoding-failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeModel {
    /// Exact Erlang CDF of the MRC-combined gain.
    #[default]
    Mrc,
    /// Per-antenna separate decoding bound.
    SeparateBound,
    /// The SU always decodes.
    Ideal,
}

impl DecodeModel {
    pub fn failure_probability<F: Scalar>(self, p: &SystemParams<F>, alloc: &ResourceAllocation<F>) -> F {
        let r = match self {
            DecodeModel::Mrc => mrc_decode_failure(p, alloc),
            DecodeModel::SeparateBound => separate_decoding_failure(p, alloc),
            DecodeModel::Ideal => return F::zero(),
        };
        // Wp = 0 or TpF = 0: nothing was sent, decoding certainly fails.
        r.unwrap_or(F::one())
    }
}

/// Minimum forward-slot bandwidth-time product `Wp * TpF` (Hz s) that keeps
/// the separate-decoding failure bound at `Q_target`:
/// `b / log2(1 - sigma_p_s gamma_p ln(1 - Q^{1/M}))`.
pub fn min_bandwidth_time_product<F: Scalar>(p: &SystemParams<F>) -> F {
    let m = F::lit(p.antennas as f64);
    let per_antenna = (p.decode_target.ln() / m).exp();
    let mean = p.sigma_p_s * p.snr_primary().get();
    let arg = F::one() - mean * (-per_antenna).ln_1p();
    p.packet_bits / arg.log2()
}
