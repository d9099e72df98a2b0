//! Catalytic quantum error correction: state kernel, mode analysis, noise channels,
//! energy-conserving recovery circuits, purification pipelines and analytic baselines.

// negated float comparisons below also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench_states;
pub mod catalyst;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod measures;
pub mod modes;
pub mod noise;
pub mod optim;
pub mod purification;
pub mod recovery;
pub mod seeds;
pub mod state;
pub mod tolerances;

pub use error::{CqecError, Result};
pub use state::{Convention, DensityMatrix, HamiltonianSpec, PureEnsemble, StateVector};
