//! Hand-rolled local optimizers and the Latin-hypercube initializer.

mod lbfgs;
mod lhs;
mod nelder_mead;

pub use lbfgs::{lbfgs, LbfgsOptions};
pub use lhs::latin_hypercube;
pub use nelder_mead::{nelder_mead, NmOptions};

use serde::{Deserialize, Serialize};

/// Outcome of a local search. `trace` holds the best value after every accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}
