//! Relaxation and state-selective reaction kinetics for small open quantum
//! systems: Bloch-Redfield relaxation supermatrices, radical-pair reaction
//! superoperators, diffusion-assisted reaction radii and a stochastic
//! Monte Carlo cross-check of the relaxation rates.
// `!(x >= 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod bloch_redfield;
pub mod liouville;
pub mod radical_pair;
pub mod stochastic;
pub mod three_state;

pub use error::{Error, Result};
