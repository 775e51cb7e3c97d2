//! Numerical workbench for information functionals of one-dimensional
//! densities.
//!
//! The crate discretizes closed-form density families onto uniform grids,
//! computes differential entropy, Fisher information, MMSE / conditional
//! variance and Gaussian-channel mutual informations by quadrature, and
//! verifies the classical identities (complementary FI/MMSE relation, de
//! Bruijn, the I-MMSE derivative, the integral representations of entropy)
//! and inequalities (entropy-power inequality, Fisher information
//! inequality, mutual-information convexity under the variance-preserving
//! transform) as numerical residuals and slacks with explicit tolerances.

pub mod density;
pub mod error;
mod fft;
pub mod functionals;
pub mod identities;
pub mod inequalities;
pub mod oracles;
pub mod report;

pub use density::{
    combine_vp, convolve, discretize, gaussian_smooth, scale, AnalyticDensity, GridDensity,
    GridPolicy, MixtureComponent,
};
pub use error::{Error, Result};
pub use functionals::{
    cond_var_additive, deficits, entropy, entropy_power, fisher_information,
    fisher_information_extrapolated, mi_noise, mi_signal, mmse_signal, posterior, ChannelPoint,
    DeficitPoint, Posterior,
};
