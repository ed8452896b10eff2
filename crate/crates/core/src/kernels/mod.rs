//! Heat kernels, their powers and explicit extensions of the powers.

pub mod heat;
pub mod power;

pub use heat::{heat_kernel, heat_kernel_radial, massive_heat_kernel, q_epsilon, torus_kernel, TorusValue};
pub use power::{
    adjoint_operator, difference_basis, extended_power_pairing, extension_difference, heat_power, kl_representation,
    fit_extension_difference, plain_power_pairing, DifferenceFit, KernelSpec, PairingConfig, Substitution,
};
