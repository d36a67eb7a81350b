//! Domain types shared by every module.
//!
//! Units are fixed: bits, Hz, seconds, W/Hz. Arrival rates are Bernoulli
//! parameters in packets/slot.

use std::fmt;

use crate::{Error, Result, Scalar};

/// Physical and traffic constants of one PU/SU band.
///
/// Only the two best SU antenna gains enter any formula: `sigma_s_sd` (best
/// antenna towards the secondary destination) and `sigma_s_pd` (best antenna
/// towards the primary destination). The `p -> s` gain is common to all
/// receive antennas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<F> {
    /// Packet size `b` in bits.
    pub packet_bits: F,
    /// Total bandwidth `W` in Hz.
    pub bandwidth: F,
    /// Slot duration `T` in seconds.
    pub slot: F,
    /// Sensing time `tau` in seconds.
    pub sensing: F,
    /// Noise power spectral density `N0` in W/Hz.
    pub noise_psd: F,
    /// Primary transmit power density in W/Hz.
    pub primary_psd: F,
    /// Secondary transmit power density in W/Hz.
    pub secondary_psd: F,
    /// Number of SU antennas `M`.
    pub antennas: u32,
    /// Maximum tolerated `p -> s` decoding-failure probability.
    pub decode_target: F,
    pub sigma_p_pd: F,
    pub sigma_s_sd: F,
    pub sigma_s_pd: F,
    pub sigma_p_s: F,
    /// Primary arrival rate, packets/slot.
    pub lambda_p: F,
    /// Secondary arrival rate, packets/slot.
    pub lambda_s: F,
}

impl<F: Scalar> Default for SystemParams<F> {
    /// Common numerical-evaluation parameters with `M = 7`,
    /// `Ps = 1e-10` W/Hz, `lambda_p = 0.5` and a saturated secondary queue.
    fn default() -> Self {
        let slot = F::lit(4e-4);
        Self {
            packet_bits: F::lit(2000.0),
            bandwidth: F::lit(10e6),
            slot,
            sensing: F::lit(0.2) * slot,
            noise_psd: F::lit(1e-11),
            primary_psd: F::lit(1e-10),
            secondary_psd: F::lit(1e-10),
            antennas: 7,
            decode_target: F::lit(1e-8),
            sigma_p_pd: F::lit(0.2),
            sigma_s_sd: F::lit(0.1),
            sigma_s_pd: F::lit(0.5),
            sigma_p_s: F::lit(1.0),
            lambda_p: F::lit(0.5),
            lambda_s: F::one(),
        }
    }
}

/// A violated parameter invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

impl<F: Scalar> SystemParams<F> {
    /// Received SNR of primary transmissions at unit gain, `Pp / N0`.
    pub fn snr_primary(&self) -> ReceivedSnr<F> {
        ReceivedSnr::from_psd(self.primary_psd, self.noise_psd)
    }

    /// Received SNR of secondary transmissions at unit gain, `Ps / N0`.
    pub fn snr_secondary(&self) -> ReceivedSnr<F> {
        ReceivedSnr::from_psd(self.secondary_psd, self.noise_psd)
    }

    /// Total bandwidth-time resource `W * T` of one slot.
    pub fn slot_resource(&self) -> F {
        self.bandwidth * self.slot
    }

    /// Every violated invariant, in field order. Empty when valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut need = |ok: bool, field, rule| {
            if !ok {
                out.push(Violation { field, rule });
            }
        };
        let zero = F::zero();
        let one = F::one();
        let unit = |x: F| x >= zero && x <= one;
        let finite_pos = |x: F| x > zero && x.is_finite();

        need(finite_pos(self.packet_bits), "b", "b > 0");
        need(finite_pos(self.bandwidth), "W", "W > 0");
        need(finite_pos(self.slot), "T", "T > 0");
        need(self.sensing >= zero, "tau", "tau >= 0");
        need(self.sensing < self.slot, "tau", "tau < T");
        need(finite_pos(self.noise_psd), "N0", "N0 > 0");
        need(finite_pos(self.primary_psd), "Pp", "Pp > 0");
        need(finite_pos(self.secondary_psd), "Ps", "Ps > 0");
        need(self.antennas >= 1, "M", "M >= 1");
        need(self.decode_target > zero && self.decode_target < one, "Q_target", "Q_target in (0,1)");
        for (field, v) in [
            ("sigma_p_pd", self.sigma_p_pd),
            ("sigma_s_sd", self.sigma_s_sd),
            ("sigma_s_pd", self.sigma_s_pd),
            ("sigma_p_s", self.sigma_p_s),
        ] {
            need(v >= zero && v.is_finite(), field, "sigma >= 0");
        }
        need(unit(self.lambda_p), "lambda_p", "lambda_p in [0,1]");
        need(unit(self.lambda_s), "lambda_s", "lambda_s in [0,1]");
        out
    }

    /// Ok when every invariant holds, otherwise the full list of violations.
    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// The decision triple released by the PU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceAllocation<F> {
    /// Primary sub-band `Wp` in Hz; the SU owns `W - Wp` while the PU is active.
    pub wp: F,
    /// PU transmit time in forward slots, seconds.
    pub tpf: F,
    /// PU transmit time in retransmission slots, seconds.
    pub tpr: F,
}

impl<F: Scalar> ResourceAllocation<F> {
    pub fn new(wp: F, tpf: F, tpr: F) -> Self {
        Self { wp, tpf, tpr }
    }

    /// Secondary own-data bandwidth `Ws = W - Wp`.
    pub fn ws(&self, p: &SystemParams<F>) -> F {
        (p.bandwidth - self.wp).max(F::zero())
    }

    /// SU relay time in forward slots, `T - TpF`.
    pub fn tsf(&self, p: &SystemParams<F>) -> F {
        (p.slot - self.tpf).max(F::zero())
    }

    /// SU relay time in retransmission slots, `T - TpR`.
    pub fn tsr(&self, p: &SystemParams<F>) -> F {
        (p.slot - self.tpr).max(F::zero())
    }

    /// Bandwidth-time product the PU uses in a forward slot.
    pub fn forward_footprint(&self) -> F {
        self.wp * self.tpf
    }

    pub fn violations(&self, p: &SystemParams<F>) -> Vec<Violation> {
        let mut out = Vec::new();
        let zero = F::zero();
        if !(self.wp >= zero && self.wp <= p.bandwidth) {
            out.push(Violation { field: "Wp", rule: "0 <= Wp <= W" });
        }
        if !(self.tpf >= p.sensing && self.tpf <= p.slot) {
            out.push(Violation { field: "TpF", rule: "tau <= TpF <= T" });
        }
        if !(self.tpr >= zero && self.tpr <= p.slot) {
            out.push(Violation { field: "TpR", rule: "0 <= TpR <= T" });
        }
        out
    }

    pub fn validate(&self, p: &SystemParams<F>) -> Result<()> {
        let v = self.violations(p);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Activity state of the PU in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimaryState {
    Idle,
    /// First transmission of the head-of-line packet.
    Forward,
    /// Retransmission after a NACK.
    Retransmission,
}

/// Received SNR at unit channel gain, `P / N0` (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ReceivedSnr<F>(pub F);

impl<F: Scalar> ReceivedSnr<F> {
    pub fn from_psd(power_psd: F, noise_psd: F) -> Self {
        Self(power_psd / noise_psd)
    }

    pub fn get(self) -> F {
        self.0
    }
}
