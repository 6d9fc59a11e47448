//! Operators, density matrices and superoperators on a labeled basis,
//! together with time propagation and infinite-time integrals.

mod expm;
mod operator;
mod propagate;
pub mod rk;
mod superop;

pub use expm::expm;
pub use operator::{BasisLabel, DensityMatrix, OperatorMatrix, DENSITY_TOL, HERMITIAN_TOL};
pub use propagate::{
    evolve_operator, infinite_time_integral, propagate, propagate_with, Propagation, PropagationMethod,
    AUTO_EXPM_MAX_DIM,
};
pub use rk::RkOptions;
pub(crate) use propagate::validate_times;
pub use superop::{
    anticommutator_super, assemble_generator, commutator_super, left_super, right_super, sandwich_super,
    two_sided_super, Superoperator,
};

