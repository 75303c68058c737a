//! 2-Wasserstein geometry for three families of probability measures:
//! one-dimensional measures encoded by quantile functions, centered
//! Gaussians encoded by SPD covariance matrices, and discrete measures on
//! regular grids. On top of the distances sit closed-form or fixed-point
//! barycenters and a damped IRLS solver for the Wasserstein median, plus a
//! seeded contamination benchmark comparing the robustness of medians
//! against barycenters.

#![forbid(unsafe_code)]

pub mod barycenter;
pub mod distances;
mod error;
pub mod experiments;
pub mod io;
pub mod measures;
pub mod median;

pub use error::{Error, Result};
