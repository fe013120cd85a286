//! Simulation core for LOCC verifier/prover experiments.
//!
//! - [`qmath`]: dense complex matrices, density matrices, partial traces and
//!   entropies (in nats).
//! - [`channels`]: Kraus channels, the dephasing model of the verifier's
//!   decohering switch, Werner states.
//! - [`games`]: dichotomic observables, Born-rule sampling, CHSH estimation
//!   and the classical-strategy bound.
//! - [`protocol`]: machines under test, the verifier loop, transcripts and
//!   transcript discrimination.
//! - [`ctc`]: Deutsch closed-timelike-curve fixed points.
//!
//! All randomness flows from a [`SeedStream`]; runs are reproducible bit for
//! bit, sequentially or in parallel.

pub mod channels;
pub mod ctc;
pub mod error;
pub mod games;
pub mod protocol;
pub mod qmath;
pub mod rng;

pub use error::{Error, Result};
pub use rng::{Execution, SeedStream};
