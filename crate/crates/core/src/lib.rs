//! Analysis, optimization and simulation of a cooperative cognitive relaying
//! protocol between an energy-aware primary user (PU) and a multi-antenna
//! secondary user (SU).
//!
//! The PU releases part of its band and part of its slot to the SU. In return
//! the SU relays undelivered primary packets. This crate provides:
//!
//! * [`channel`]: Rayleigh outage, MRC decoding failure and the minimum
//!   bandwidth-time product the PU must keep for the SU to decode.
//! * [`baseline`]: the non-cooperative benchmark (packets per joule).
//! * [`coop`]: the PU Markov chain, secondary service rate and cooperative
//!   packets per joule.
//! * [`optimizer`]: grid search over `(Wp, TpF, TpR)`.
//! * [`sim`]: a seeded slot-level Monte Carlo of the full protocol.
//! * [`config`] / [`sweep`]: flat key-value configuration and CSV sweeps.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases at the crate root fix the scalar to `f64`, which is what the CLI
//! uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod channel;
pub mod config;
pub mod coop;
mod error;
pub mod model;
pub mod optimizer;
mod scalar;
pub mod sim;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{PrimaryState, ReceivedSnr, ResourceAllocation, SystemParams, Violation};
pub use scalar::Scalar;

pub type SystemParams64 = model::SystemParams<f64>;
pub type SystemParams32 = model::SystemParams<f32>;
pub type ResourceAllocation64 = model::ResourceAllocation<f64>;
pub type ResourceAllocation32 = model::ResourceAllocation<f32>;
pub type LinkSpec64 = channel::LinkSpec<f64>;
pub type BaselineReport64 = baseline::BaselineReport<f64>;
pub type ChainSolution64 = coop::ChainSolution<f64>;
pub type CoopReport64 = coop::CoopReport<f64>;
pub type OptimizerConfig64 = optimizer::OptimizerConfig<f64>;
pub type OptimumReport64 = optimizer::OptimumReport<f64>;
pub type SimStats64 = sim::SimStats<f64>;
pub type RunConfig64 = config::RunConfig<f64>;
