//! Simulation of p-Rabin oblivious transfer of a qubit built on probabilistic
//! teleportation over a partially entangled pair `a|00> + b|11>`.
//!
//! * [`statevec`]: dense state vectors, gates, measurements and partial traces.
//! * [`teleport`]: the teleportation protocol, its correction unitaries and
//!   their operator algebra.
//! * [`ot`]: qubit and bit oblivious transfer on top of teleportation.
//! * [`attacks`]: cheating strategies available to the sender.
//! * [`channel`]: decoy-checked sharing of the entangled channel.
//! * [`cli`]: the `qubit-ot` command-line front end.

pub mod attacks;
pub mod channel;
pub mod cli;
pub mod error;
pub mod ot;
pub mod rng;
pub mod statevec;
pub mod stats;
pub mod teleport;

pub use error::{Error, Result};
