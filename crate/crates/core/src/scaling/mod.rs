//! Scaling degrees, divergence degrees and numerical extensions.

pub mod calculus;
pub mod estimate;
pub mod extension;
pub mod testfn;

pub use calculus::{
    ambiguity_dimension, divergence_degree, gamma_sd_bound, sd_convolution_bound, sd_delta, sd_parametrix, Codim,
    Convention, Mode, ScalingContext, SdValue,
};
pub use estimate::{estimate_sd, geometric_grid, scaled_pairing, Probe, Sampler};
pub use extension::{cutoff, extend_pairing, extend_pairing_with, taylor_indices, ExtensionConfig, Subtraction};
pub use testfn::{Factor, TestFunction};
