//! Symbolic and numeric engine for the algebraic renormalization of the
//! stochastic cubic heat equation `(∂_t − Δ)ψ = −λψ³ + ξ`.
//!
//! The crate is organised by concern:
//!
//! * [`term`]: decorated rooted trees for the functional algebra, grading and
//!   the perturbative recursion.
//! * [`contraction`]: Wick contractions (`Γ_·Q`, `Γ_•Q`), evaluation at zero,
//!   two-point correlations, the renormalized equation and renormalization shifts.
//! * [`scaling`]: integer scaling-degree calculus plus numerical Taylor-subtracted
//!   extensions and a scaling-degree estimator.
//! * [`graphs`]: admissible graph enumeration, canonical labelling and power counting.
//! * [`kernels`]: heat kernels, Källén–Lehmann representation and extended powers.
//! * [`mc`]: lattice Monte-Carlo and Isserlis moment oracles.
//! * [`quad`]: the quadrature rules shared by the numerical modules.

pub mod contraction;
pub mod error;
pub mod graphs;
pub mod kernels;
pub mod linear;
pub mod mc;
pub mod quad;
pub mod rational;
pub mod scaling;
pub mod term;

pub use contraction::{ContractedTerm, Contractor, Diagram, DiagramSum, RenormSymbol, TensorWord};
pub use error::{Error, Result};
pub use graphs::{DivergenceReport, GraphRecord};
pub use kernels::KernelSpec;
pub use linear::LinComb;
pub use mc::LatticeConfig;

pub use rational::Rat;
pub use scaling::{Mode, ScalingContext, SdValue};
pub use term::{FormalSeries, Parity, Term};
