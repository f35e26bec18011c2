//! Exact state-vector simulation of a hybrid quantum optimizer for
//! single-machine total weighted tardiness.
//!
//! The algorithm prepares a uniform superposition over an `N = M·log₂M`
//! qubit register that encodes one task index per time slot, amplifies the
//! feasible (permutation) states with Grover rounds, then applies a single
//! cost-dependent phase round controlled by an auxiliary qubit. Post-selecting
//! the control on `|0⟩` leaves every basis state weighted by `cos Δᵢ`, where
//! `Δᵢ = (π/2)·Fₙ(xᵢ)` grows with the normalized schedule cost.
//!
//! Layout:
//!
//! * [`sched`]: tasks, schedules, the compact register encoding, costs,
//!   normalization and the brute-force oracle.
//! * [`state`]: dense state vectors and the handful of transforms the
//!   algorithm needs.
//! * [`amplify`]: Grover round planning, iteration and closed forms.
//! * [`phase`]: the cost-phase layer, including the generic `c`-qubit
//!   control register.
//! * [`pipeline`]: the end-to-end run plus sweeps and validation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amplify;
mod error;
pub mod phase;
pub mod pipeline;
pub mod rng;
pub mod sched;
pub mod state;

pub use error::{Error, Result};
pub use sched::Rational;
