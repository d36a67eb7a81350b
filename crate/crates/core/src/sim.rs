//! Slot-level Monte Carlo of the cooperative protocol.
//!
//! Each slot:
//! 1. The PU state is `Idle` when `Qp = 0`, `Retransmission` after a NACK and
//!    `Forward` otherwise (sensing and feedback are error free).
//! 2. Independent Rayleigh gains are drawn for every link.
//! 3. In a forward slot the SU tries to decode the primary packet into its
//!    one-packet relay buffer, then relays it on `Wp` for `T - TpF`. The PU
//!    transmits on `Wp` for `TpF`. The destination decodes the two copies
//!    separately.
//! 4. A retransmission slot reuses the buffered copy with the `TpR` split.
//! 5. The SU sends its own head-of-line packet on `W` (idle) or `W - Wp`.
//! 6. Departures are applied first, then Bernoulli arrivals (late arrivals).
//!
//! # Random stream
//!
//! The generator is ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`.
//! Every slot consumes exactly six `f64` uniforms in this order: SU decode,
//! `p -> pd` gain, `s -> pd` gain, `s -> sd` gain, primary arrival, secondary
//! arrival. Gains are inverse-CDF exponentials `-sigma ln(1 - U)`. Draws are
//! made even when unused so that the stream layout is independent of state.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{secondary_rate, DecodeModel, LinkSpec};
use crate::model::{PrimaryState, ResourceAllocation, SystemParams};
use crate::{Result, Scalar};

pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Queue contents at the start of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeQueues {
    /// Primary queue length, head-of-line packet included.
    pub qp: u64,
    /// Secondary own-data queue length.
    pub qs: u64,
    /// Relay buffer, at most one packet.
    pub qps: u8,
}

/// Primary feedback broadcast at the end of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Feedback {
    Ack,
    Nack,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome<F> {
    pub state: PrimaryState,
    pub primary_success: bool,
    /// The SU had an own packet to send.
    pub secondary_attempt: bool,
    pub secondary_success: bool,
    /// The SU decoded the primary packet this slot (forward slots only).
    pub relay_decode: bool,
    /// The SU relayed a buffered primary packet this slot.
    pub relayed: bool,
    /// Primary transmit energy this slot, joules.
    pub energy_p: F,
    /// Secondary transmit energy this slot (own data plus relaying), joules.
    pub energy_s: F,
    pub feedback: Feedback,
}

/// Per-run knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Slots counted in the statistics (after warm-up).
    pub slots: u64,
    /// Leading slots excluded from the statistics.
    pub warmup: u64,
    pub seed: u64,
    pub decode: DecodeModel,
    /// Record `Qp` every this many counted slots.
    pub trace_stride: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { slots: 1_000_000, warmup: 10_000, seed: 1, decode: DecodeModel::Mrc, trace_stride: 1000 }
    }
}

/// Precomputed per-allocation thresholds; `step` only compares draws.
#[derive(Debug, Clone)]
pub struct Simulator<F> {
    params: SystemParams<F>,
    alloc: ResourceAllocation<F>,
    decode_failure: f64,
    // gain thresholds (infinite when the link cannot succeed)
    pu_forward: f64,
    pu_retx: f64,
    relay_forward: f64,
    relay_retx: f64,
    own_idle: f64,
    own_forward: f64,
    own_retx: f64,
    sigma_p_pd: f64,
    sigma_s_pd: f64,
    sigma_s_sd: f64,
    lambda_p: f64,
    lambda_s: f64,
}

fn threshold<F: Scalar>(l: LinkSpec<F>) -> f64 {
    l.gain_threshold().to_f64_lossy()
}

impl<F: Scalar> Simulator<F> {
    pub fn new(params: &SystemParams<F>, alloc: &ResourceAllocation<F>, decode: DecodeModel) -> Result<Self> {
        params.validate()?;
        alloc.validate(params)?;
        let p = params;
        let gp = p.snr_primary();
        let gs = p.snr_secondary();
        let ws = alloc.ws(p);
        let own = |state, bw| threshold(LinkSpec::new(secondary_rate(state, p), bw, gs, p.sigma_s_sd));
        Ok(Self {
            params: *params,
            alloc: *alloc,
            decode_failure: decode.failure_probability(p, alloc).to_f64_lossy(),
            pu_forward: threshold(LinkSpec::packet(p, alloc.tpf, alloc.wp, gp, p.sigma_p_pd)),
            pu_retx: threshold(LinkSpec::packet(p, alloc.tpr, alloc.wp, gp, p.sigma_p_pd)),
            relay_forward: threshold(LinkSpec::packet(p, alloc.tsf(p), alloc.wp, gs, p.sigma_s_pd)),
            relay_retx: threshold(LinkSpec::packet(p, alloc.tsr(p), alloc.wp, gs, p.sigma_s_pd)),
            own_idle: own(PrimaryState::Idle, p.bandwidth),
            own_forward: own(PrimaryState::Forward, ws),
            own_retx: own(PrimaryState::Retransmission, ws),
            sigma_p_pd: p.sigma_p_pd.to_f64_lossy(),
            sigma_s_pd: p.sigma_s_pd.to_f64_lossy(),
            sigma_s_sd: p.sigma_s_sd.to_f64_lossy(),
            lambda_p: p.lambda_p.to_f64_lossy(),
            lambda_s: p.lambda_s.to_f64_lossy(),
        })
    }

    pub fn params(&self) -> &SystemParams<F> {
        &self.params
    }

    pub fn alloc(&self) -> &ResourceAllocation<F> {
        &self.alloc
    }

    /// Advance one slot.
    pub fn step<R: Rng + ?Sized>(&self, q: NodeQueues, prev: Feedback, rng: &mut R) -> (NodeQueues, SlotOutcome<F>) {
        let u_decode: f64 = rng.random();
        let g_ppd = -self.sigma_p_pd * (1.0 - rng.random::<f64>()).ln();
        let g_spd = -self.sigma_s_pd * (1.0 - rng.random::<f64>()).ln();
        let g_ssd = -self.sigma_s_sd * (1.0 - rng.random::<f64>()).ln();
        let arrival_p = rng.random::<f64>() < self.lambda_p;
        let arrival_s = rng.random::<f64>() < self.lambda_s;

        let p = &self.params;
        let a = &self.alloc;
        let state = if q.qp == 0 {
            PrimaryState::Idle
        } else if prev == Feedback::Nack {
            PrimaryState::Retransmission
        } else {
            PrimaryState::Forward
        };

        let mut next = q;
        let mut relay_decode = false;
        let mut relayed = false;
        let mut primary_success = false;
        let mut energy_p = F::zero();
        let mut energy_s = F::zero();
        let ws = a.ws(p);

        let (own_threshold, own_band, own_time) = match state {
            PrimaryState::Idle => (self.own_idle, p.bandwidth, p.slot - p.sensing),
            PrimaryState::Forward => (self.own_forward, ws, p.slot - p.sensing),
            PrimaryState::Retransmission => (self.own_retx, ws, p.slot),
        };

        if state != PrimaryState::Idle {
            let (pu_thr, relay_thr, tp, relay_time) = if state == PrimaryState::Forward {
                // the relay buffer is empty at the start of every forward slot
                relay_decode = u_decode >= self.decode_failure;
                next.qps = u8::from(relay_decode);
                (self.pu_forward, self.relay_forward, a.tpf, a.tsf(p))
            } else {
                (self.pu_retx, self.relay_retx, a.tpr, a.tsr(p))
            };
            energy_p = p.primary_psd * a.wp * tp;
            let direct = g_ppd >= pu_thr;
            let relay = next.qps == 1 && g_spd >= relay_thr;
            if next.qps == 1 && relay_time > F::zero() && a.wp > F::zero() {
                relayed = true;
                energy_s += p.secondary_psd * a.wp * relay_time;
            }
            primary_success = direct || relay;
        }

        let secondary_attempt = q.qs > 0;
        let mut secondary_success = false;
        if secondary_attempt && own_band > F::zero() {
            energy_s += p.secondary_psd * own_band * own_time;
            secondary_success = g_ssd >= own_threshold;
        }

        let feedback = match (state, primary_success) {
            (PrimaryState::Idle, _) => Feedback::None,
            (_, true) => Feedback::Ack,
            (_, false) => Feedback::Nack,
        };
        if primary_success {
            next.qp -= 1;
            next.qps = 0;
        }
        if secondary_success {
            next.qs -= 1;
        }
        next.qp += u64::from(arrival_p);
        next.qs += u64::from(arrival_s);

        let outcome = SlotOutcome {
            state,
            primary_success,
            secondary_attempt,
            secondary_success,
            relay_decode,
            relayed,
            energy_p,
            energy_s,
            feedback,
        };
        (next, outcome)
    }

    /// Run `warmup + slots` slots from empty queues.
    pub fn run(&self, cfg: &SimConfig) -> SimStats<F> {
        let mut rng = seeded_rng(cfg.seed);
        let mut q = NodeQueues::default();
        let mut fb = Feedback::None;
        for _ in 0..cfg.warmup {
            (q, fb) = {
                let (n, o) = self.step(q, fb, &mut rng);
                (n, o.feedback)
            };
        }
        let mut stats = SimStats::empty(cfg.seed, cfg.warmup);
        let stride = cfg.trace_stride.max(1);
        for t in 0..cfg.slots {
            let k = q.qp;
            let (n, o) = self.step(q, fb, &mut rng);
            stats.record(k, &o);
            if t % stride == 0 {
                stats.qp_trace.push((t, k));
            }
            let next_key = StateKey::of(n.qp, o.feedback);
            stats.record_transition(StateKey { state: o.state, k }, next_key);
            q = n;
            fb = o.feedback;
        }
        stats.final_queues = q;
        stats
    }
}

/// One simulation run with fresh state.
pub fn run<F: Scalar>(params: &SystemParams<F>, alloc: &ResourceAllocation<F>, cfg: &SimConfig) -> Result<SimStats<F>> {
    Ok(Simulator::new(params, alloc, cfg.decode)?.run(cfg))
}

/// Independent runs with the given seeds, in parallel, merged in seed order.
pub fn run_replicated<F: Scalar>(
    params: &SystemParams<F>,
    alloc: &ResourceAllocation<F>,
    cfg: &SimConfig,
    seeds: &[u64],
) -> Result<SimStats<F>> {
    let sim = Simulator::new(params, alloc, cfg.decode)?;
    let runs: Vec<SimStats<F>> = seeds.par_iter().map(|&seed| sim.run(&SimConfig { seed, ..*cfg })).collect();
    let mut it = runs.into_iter();
    let mut acc = it.next().unwrap_or_else(|| SimStats::empty(cfg.seed, cfg.warmup));
    for s in it {
        acc.merge(&s);
    }
    Ok(acc)
}

/// PU chain state observed at the start of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub state: PrimaryState,
    pub k: u64,
}

impl StateKey {
    fn of(qp: u64, fb: Feedback) -> Self {
        let state = if qp == 0 {
            PrimaryState::Idle
        } else if fb == Feedback::Nack {
            PrimaryState::Retransmission
        } else {
            PrimaryState::Forward
        };
        Self { state, k: qp }
    }
}

/// Transitions are recorded only out of states with `k` up to this value.
pub const TRANSITION_K_MAX: u64 = 4;

/// Aggregated counts of one or more runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats<F> {
    pub slots: u64,
    pub warmup: u64,
    pub seeds: Vec<u64>,
    pub idle_slots: u64,
    /// `forward_slots[k - 1]`: forward slots that started with `Qp = k`.
    pub forward_slots: Vec<u64>,
    pub retx_slots: Vec<u64>,
    pub forward_acks: u64,
    pub retx_acks: u64,
    pub secondary_acks: u64,
    pub secondary_attempts: u64,
    pub relay_decode_failures: u64,
    pub energy_p_forward: F,
    pub energy_p_retx: F,
    pub energy_s: F,
    /// `(counted slot index, Qp)` samples; from the first run only after a merge.
    pub qp_trace: Vec<(u64, u64)>,
    pub transitions: BTreeMap<(StateKey, StateKey), u64>,
    /// Queues at the end of the (last merged) run.
    pub final_queues: NodeQueues,
}

fn bump(v: &mut Vec<u64>, k: u64) {
    let i = (k - 1) as usize;
    if v.len() <= i {
        v.resize(i + 1, 0);
    }
    v[i] += 1;
}

impl<F: Scalar> SimStats<F> {
    pub fn empty(seed: u64, warmup: u64) -> Self {
        Self {
            slots: 0,
            warmup,
            seeds: vec![seed],
            idle_slots: 0,
            forward_slots: Vec::new(),
            retx_slots: Vec::new(),
            forward_acks: 0,
            retx_acks: 0,
            secondary_acks: 0,
            secondary_attempts: 0,
            relay_decode_failures: 0,
            energy_p_forward: F::zero(),
            energy_p_retx: F::zero(),
            energy_s: F::zero(),
            qp_trace: Vec::new(),
            transitions: BTreeMap::new(),
            final_queues: NodeQueues::default(),
        }
    }

    /// Fold one slot that started with `Qp = k`.
    pub fn record(&mut self, k: u64, o: &SlotOutcome<F>) {
        self.slots += 1;
        match o.state {
            PrimaryState::Idle => self.idle_slots += 1,
            PrimaryState::Forward => {
                bump(&mut self.forward_slots, k);
                self.forward_acks += u64::from(o.primary_success);
                self.relay_decode_failures += u64::from(!o.relay_decode);
                self.energy_p_forward += o.energy_p;
            }
            PrimaryState::Retransmission => {
                bump(&mut self.retx_slots, k);
                self.retx_acks += u64::from(o.primary_success);
                self.energy_p_retx += o.energy_p;
            }
        }
        self.secondary_acks += u64::from(o.secondary_success);
        self.secondary_attempts += u64::from(o.secondary_attempt);
        self.energy_s += o.energy_s;
    }

    fn record_transition(&mut self, from: StateKey, to: StateKey) {
        if from.k <= TRANSITION_K_MAX {
            *self.transitions.entry((from, to)).or_insert(0) += 1;
        }
    }

    /// Count-weighted combination of two runs.
    pub fn merge(&mut self, other: &Self) {
        fn add(a: &mut Vec<u64>, b: &[u64]) {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.slots += other.slots;
        self.seeds.extend_from_slice(&other.seeds);
        self.idle_slots += other.idle_slots;
        add(&mut self.forward_slots, &other.forward_slots);
        add(&mut self.retx_slots, &other.retx_slots);
        self.forward_acks += other.forward_acks;
        self.retx_acks += other.retx_acks;
        self.secondary_acks += other.secondary_acks;
        self.secondary_attempts += other.secondary_attempts;
        self.relay_decode_failures += other.relay_decode_failures;
        self.energy_p_forward += other.energy_p_forward;
        self.energy_p_retx += other.energy_p_retx;
        self.energy_s += other.energy_s;
        for (key, n) in &other.transitions {
            *self.transitions.entry(*key).or_insert(0) += n;
        }
        self.final_queues = other.final_queues;
    }

    fn frac(&self, n: u64) -> F {
        if self.slots == 0 {
            return F::zero();
        }
        F::from_count(n) / F::from_count(self.slots)
    }

    pub fn rng_seed(&self) -> u64 {
        self.seeds[0]
    }

    /// Empirical probability of `(state, k)`; `Idle` with `k = 0`.
    pub fn occupancy(&self, state: PrimaryState, k: u64) -> F {
        let at = |v: &Vec<u64>| if k == 0 { 0 } else { v.get((k - 1) as usize).copied().unwrap_or(0) };
        match state {
            PrimaryState::Idle if k == 0 => self.frac(self.idle_slots),
            PrimaryState::Idle => F::zero(),
            PrimaryState::Forward => self.frac(at(&self.forward_slots)),
            PrimaryState::Retransmission => self.frac(at(&self.retx_slots)),
        }
    }

    pub fn forward_total(&self) -> u64 {
        self.forward_slots.iter().sum()
    }

    pub fn retx_total(&self) -> u64 {
        self.retx_slots.iter().sum()
    }

    pub fn pi0_hat(&self) -> F {
        self.frac(self.idle_slots)
    }

    pub fn sum_pi_hat(&self) -> F {
        self.frac(self.forward_total())
    }

    pub fn sum_eps_hat(&self) -> F {
        self.frac(self.retx_total())
    }

    /// Secondary ACKs per slot.
    pub fn mu_s_hat(&self) -> F {
        self.frac(self.secondary_acks)
    }

    /// Primary ACKs per slot.
    pub fn mu_p_hat(&self) -> F {
        self.frac(self.forward_acks + self.retx_acks)
    }

    pub fn energy_p(&self) -> F {
        self.energy_p_forward + self.energy_p_retx
    }

    /// Primary ACKs per joule of primary energy.
    pub fn b_pc_hat(&self) -> F {
        let e = self.energy_p();
        if e > F::zero() {
            F::from_count(self.forward_acks + self.retx_acks) / e
        } else {
            F::zero()
        }
    }

    /// Per-state estimate of the analytical packets-per-joule: for each busy
    /// state, ACKs per slot divided by the energy of one such slot.
    pub fn b_pc_statewise_hat(&self) -> F {
        let term = |acks: u64, slots: u64, energy: F| {
            if slots == 0 || !(energy > F::zero()) {
                F::zero()
            } else {
                self.frac(acks) / (energy / F::from_count(slots))
            }
        };
        term(self.forward_acks, self.forward_total(), self.energy_p_forward)
            + term(self.retx_acks, self.retx_total(), self.energy_p_retx)
    }

    /// Empirical `Pr{Qp > y}` over counted slots.
    pub fn queue_tail(&self, y: u64) -> F {
        let mut n = 0u64;
        let len = self.forward_slots.len().max(self.retx_slots.len());
        for i in (y as usize)..len {
            n += self.forward_slots.get(i).copied().unwrap_or(0) + self.retx_slots.get(i).copied().unwrap_or(0);
        }
        self.frac(n)
    }

    /// Least-squares slope of `Qp` against slot index over the trace,
    /// packets per slot.
    pub fn qp_drift(&self) -> f64 {
        let n = self.qp_trace.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mx = self.qp_trace.iter().map(|&(t, _)| t as f64).sum::<f64>() / n;
        let my = self.qp_trace.iter().map(|&(_, q)| q as f64).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(t, q) in &self.qp_trace {
            let dx = t as f64 - mx;
            sxy += dx * (q as f64 - my);
            sxx += dx * dx;
        }
        sxy / sxx
    }

    /// Binomial standard error of a frequency `p` over the counted slots.
    pub fn binomial_se(&self, p: F) -> F {
        (p * (F::one() - p) / F::from_count(self.slots.max(1))).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams<f64> {
        SystemParams { lambda_p: 0.3, lambda_s: 0.5, ..SystemParams::default() }
    }

    fn alloc() -> ResourceAllocation<f64> {
        ResourceAllocation::new(6e6, 3e-4, 1e-4)
    }

    /// Replays a fixed list of uniforms.
    struct Scripted(Vec<f64>, usize);

    impl rand::RngCore for Scripted {
        fn next_u32(&mut self) -> u32 {
            (self.next_u64() >> 32) as u32
        }
        fn next_u64(&mut self) -> u64 {
            let u = self.0[self.1 % self.0.len()];
            self.1 += 1;
            // rand maps u64 to f64 via the top 53 bits
            ((u * (1u64 << 53) as f64) as u64) << 11
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            rand::rand_core::impls::fill_bytes_via_next(self, dst)
        }
    }

    #[test]
    fn empty_system_idles() {
        let p = SystemParams { lambda_p: 0.0, lambda_s: 0.0, ..params() };
        let sim = Simulator::new(&p, &alloc(), DecodeModel::Mrc).unwrap();
        let mut rng = seeded_rng(3);
        let (q, o) = sim.step(NodeQueues::default(), Feedback::None, &mut rng);
        assert_eq!(o.state, PrimaryState::Idle);
        assert_eq!(o.feedback, Feedback::None);
        assert_eq!((o.energy_p, o.energy_s), (0.0, 0.0));
        assert!(!o.secondary_attempt);
        assert_eq!(q, NodeQueues::default());
    }

    #[test]
    fn forward_slot_with_good_channels_acks() {
        let p = params();
        let sim = Simulator::new(&p, &alloc(), DecodeModel::Mrc).unwrap();
        // decode ok, huge gains, no arrivals
        let mut rng = Scripted(vec![0.9, 0.999_999, 0.999_999, 0.999_999, 0.99, 0.99], 0);
        let q0 = NodeQueues { qp: 2, qs: 1, qps: 0 };
        let (q, o) = sim.step(q0, Feedback::Ack, &mut rng);
        assert_eq!(o.state, PrimaryState::Forward);
        assert!(o.relay_decode && o.primary_success && o.secondary_success);
        assert_eq!(o.feedback, Feedback::Ack);
        assert_eq!(q, NodeQueues { qp: 1, qs: 0, qps: 0 });
        let a = alloc();
        assert!((o.energy_p - p.primary_psd * a.wp * a.tpf).abs() < 1e-20);
    }

    #[test]
    fn nack_leads_to_retransmission_with_buffered_copy() {
        let p = params();
        let sim = Simulator::new(&p, &alloc(), DecodeModel::Mrc).unwrap();
        // decode ok, both legs in deep fade, one primary arrival
        let mut rng = Scripted(vec![0.9, 1e-12, 1e-12, 1e-12, 0.0, 0.99], 0);
        let (q, o) = sim.step(NodeQueues { qp: 1, qs: 0, qps: 0 }, Feedback::None, &mut rng);
        assert_eq!(o.feedback, Feedback::Nack);
        assert_eq!(q, NodeQueues { qp: 2, qs: 0, qps: 1 });
        let mut rng = Scripted(vec![0.9, 1e-12, 0.999_999, 1e-12, 0.99, 0.99], 0);
        let (q2, o2) = sim.step(q, o.feedback, &mut rng);
        assert_eq!(o2.state, PrimaryState::Retransmission);
        assert!(o2.primary_success && o2.relayed);
        assert_eq!(q2, NodeQueues { qp: 1, qs: 0, qps: 0 });
        let a = alloc();
        assert!((o2.energy_p - p.primary_psd * a.wp * a.tpr).abs() < 1e-20);
    }

    #[test]
    fn failed_su_decode_leaves_relay_empty() {
        let p = params();
        let sim = Simulator::new(&p, &alloc(), DecodeModel::Mrc).unwrap();
        // u_decode = 0 is below any positive failure probability
        assert!(sim.decode_failure > 0.0);
        let mut rng = Scripted(vec![0.0, 1e-12, 0.999_999, 0.5, 0.99, 0.99], 0);
        let (q, o) = sim.step(NodeQueues { qp: 1, qs: 0, qps: 0 }, Feedback::None, &mut rng);
        assert!(!o.relay_decode && !o.relayed && !o.primary_success);
        assert_eq!(q.qps, 0);
    }

    #[test]
    fn same_seed_same_stats() {
        let p = params();
        let cfg = SimConfig { slots: 50_000, warmup: 1000, seed: 99, ..Default::default() };
        let a = run(&p, &alloc(), &cfg).unwrap();
        let b = run(&p, &alloc(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = run(&p, &alloc(), &SimConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invariants_hold_along_a_run() {
        let p = params();
        let a = alloc();
        let sim = Simulator::new(&p, &a, DecodeModel::Mrc).unwrap();
        let mut rng = seeded_rng(5);
        let mut q = NodeQueues::default();
        let mut fb = Feedback::None;
        let mut stats = SimStats::empty(5, 0);
        let mut energy_p = 0.0;
        let mut energy_s = 0.0;
        for _ in 0..100_000 {
            let k = q.qp;
            let (n, o) = sim.step(q, fb, &mut rng);
            assert!(n.qps <= 1);
            if n.qps == 1 {
                assert!(n.qp >= 1);
            }
            assert_eq!(o.feedback == Feedback::None, o.state == PrimaryState::Idle);
            let want = match o.state {
                PrimaryState::Idle => 0.0,
                PrimaryState::Forward => p.primary_psd * a.wp * a.tpf,
                PrimaryState::Retransmission => p.primary_psd * a.wp * a.tpr,
            };
            assert_eq!(o.energy_p, want);
            energy_p += o.energy_p;
            energy_s += o.energy_s;
            stats.record(k, &o);
            q = n;
            fb = o.feedback;
        }
        assert!((stats.energy_p() - energy_p).abs() <= 1e-12 * energy_p);
        assert!((stats.energy_s - energy_s).abs() <= 1e-12 * energy_s);
        let total = stats.pi0_hat() + stats.sum_pi_hat() + stats.sum_eps_hat();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_is_count_weighted() {
        let p = params();
        let cfg = SimConfig { slots: 20_000, warmup: 100, ..Default::default() };
        let s1 = run(&p, &alloc(), &SimConfig { seed: 1, ..cfg }).unwrap();
        let s2 = run(&p, &alloc(), &SimConfig { seed: 2, slots: 30_000, ..cfg }).unwrap();
        let mut m = s1.clone();
        m.merge(&s2);
        assert_eq!(m.slots, 50_000);
        let want = (s1.mu_s_hat() * 20_000.0 + s2.mu_s_hat() * 30_000.0) / 50_000.0;
        assert!((m.mu_s_hat() - want).abs() < 1e-12);
        assert_eq!(m.seeds, vec![1, 2]);
        let rep = run_replicated(&p, &alloc(), &SimConfig { slots: 20_000, ..cfg }, &[1, 2]).unwrap();
        let mut m2 = s1.clone();
        m2.merge(&run(&p, &alloc(), &SimConfig { seed: 2, slots: 20_000, ..cfg }).unwrap());
        assert_eq!(rep, m2);
    }

    #[test]
    fn queue_tail_is_a_survival_function() {
        let s = run(&params(), &alloc(), &SimConfig { slots: 100_000, ..Default::default() }).unwrap();
        assert!((s.queue_tail(0) - (1.0 - s.pi0_hat())).abs() < 1e-12);
        let mut prev = 1.0;
        for y in 0..10 {
            let t = s.queue_tail(y);
            assert!(t <= prev);
            prev = t;
        }
    }
}
