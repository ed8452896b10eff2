//! Lattice Monte-Carlo for the linear stochastic heat equation and exact
//! Gaussian moments, used as oracles for the contraction engine.

mod evaluate;
mod isserlis;
mod lattice;
mod validate;

pub use evaluate::{eval_diagram, eval_diagram_sum, eval_sum, eval_term, Labels};
pub use isserlis::isserlis_moment;
pub use lattice::{Field, Lattice, LatticeConfig};
pub use validate::{
    diagonal_discretization_gap, run_samples, validate_covariance, validate_first_order, validate_two_point, Comparison,
    McReport,
};
