//! Clairvoyant multiplicative-weights dynamics for finite normal-form games.
//!
//! The crate has four layers, each usable on its own:
//!
//! * [`game`]: dense normal-form games, mixed strategies, expected utilities
//!   and deviation-payoff vectors, plus a seeded game generator.
//! * [`learning`]: the multiplicative-weights step, the anchored profile map
//!   whose fixed points are the clairvoyant update, a contraction-map solver
//!   for that fixed point, and the anchored z-update used by the uncoupled
//!   protocol.
//! * [`dynamics`]: round-synchronous trajectories: the uncoupled block
//!   protocol in which agents approximate the clairvoyant update using only
//!   their own payoff feedback, a classic MWU baseline, and a centralized
//!   exact-update reference.
//! * [`metrics`]: external regret over full trajectories and anchor
//!   subsequences, coarse-correlated-equilibrium gaps of averaged play, and
//!   convergence-rate summaries.
//!
//! All floating-point transcendentals go through `libm`, so results are
//! bit-identical across platforms and build profiles; every randomized code
//! path takes an explicit seed. The crate is `no_std` (it allocates, so it
//! needs `alloc`).

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod game;
pub mod learning;
pub mod metrics;

pub use error::{Error, Result};
pub use game::{MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};
