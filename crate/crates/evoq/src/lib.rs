//! Derivative-free optimization toolkit: adaptive differential evolution
//! (success-history and success-rate variants, knowledge sharing, Q-learning
//! operator selection), shifted/rotated benchmark landscapes with composition
//! functions, an exact 10-qubit Ising VQE objective with optional finite-shot
//! noise, and sublevel-set H0 persistence analysis of 2D landscape slices.

pub mod bench;
pub mod error;
pub mod exp;
pub mod linalg;
pub mod objective;
pub mod optim;
pub mod rng;
pub mod sha;
pub mod topo;
pub mod vqa;

pub use error::{Error, Result};
pub use rng::{rng_from_seed, RunRng};
