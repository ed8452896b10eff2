//! Symbolic Wick contraction with renormalization symbols.

pub mod correlation;
pub mod diagram;
pub mod gamma;
pub mod shift;
pub mod wick;

pub use correlation::{act_on_phi, apply_operator, MAX_RENORM_ORDER};
pub use diagram::{format_sum, from_terms, to_terms, ContractedTerm, Diagram, DiagramSum, RenormSymbol, Vertex};
pub use gamma::{evaluate_at_zero, phi_power_diagram, Contractor, TensorWord};
pub use shift::{decompose_power_shift, label_poly, LabelPoly, Shifts};
pub use wick::{base_diagram, pairings, subset_rho, tag_divergences};
