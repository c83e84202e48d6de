//! Contour dynamics of two-dimensional vortex patches near Kirchhoff ellipses.
//!
//! The boundary of a patch is encoded by a radial deformation `ξ(θ)` of the
//! rotating ellipse with aspect ratio `γ`. The crate provides the nonlinear
//! evolution law and its conserved functionals, the exact linear theory at the
//! ellipse, the symplectic rectification of the angular momentum and a
//! sampling estimator for the resonant sets of the linear frequencies.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod rectification;
pub mod resonance;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{EllipseParams, RadialDeformation};
pub use grid::Grid;
