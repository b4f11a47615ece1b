//! Density-matrix simulation of recurrence entanglement purification with
//! noisy CNOT gates.
//!
//! Two copies of a two-qubit state go through a bilateral CNOT, each gate
//! followed by a two-qubit depolarizing channel, and the kept pair survives
//! when the measured pair gives equal outcomes. Iterating the round on
//! copies of its own output yields fidelity trajectories; [`analysis`]
//! extracts the minimum purifiable fidelity, the asymptotic fidelity, and
//! the gate error rate at which purification stops working.
//!
//! Modules, bottom-up:
//!
//! * [`qlinalg`]: dense matrices, gate embedding, partial trace, post-selection.
//! * [`states`]: Bell states, Werner inputs, the random input ensemble.
//! * [`channels`]: CNOT and the two-qubit depolarizing channel.
//! * [`protocol`]: one round and its iteration.
//! * [`analysis`]: `F_min`, `F_∞`, sweeps and threshold bisection.
//! * [`oracle`]: matrix-free Bell-label enumeration of the noiseless round.
//! * [`cli`]: the `purify` command-line front end.

pub mod analysis;
pub mod channels;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod protocol;
pub mod qlinalg;
pub mod states;

pub use error::{Error, Result};
