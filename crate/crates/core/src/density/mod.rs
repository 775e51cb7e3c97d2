//! One-dimensional densities, analytic and gridded, plus the three
//! transformations the rest of the crate is built on: scaling, convolution,
//! and the variance-preserving combination.

pub mod analytic;
pub mod grid;
pub mod score;
pub mod transform;

pub use analytic::{AnalyticDensity, MixtureComponent};
pub use grid::{discretize, GridDensity, GridPolicy};
pub use score::{score, score_mean};
pub use transform::{combine_vp, convolve, gaussian_smooth, scale};
