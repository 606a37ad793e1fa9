//! Geodesic cords of cusped hyperbolic 3-manifolds and the numerical checks
//! around them: action spectra, Morse index data, the kinetic Hamiltonian
//! flow on the cotangent bundle, truncated triangles and torus-knot surfaces.
//!
//! All geometry uses the upper half-space model with coordinates `(x, y, z)`,
//! `z > 0`, and boundary coordinate `w = x + iy`.

pub mod cli;
pub mod cords;
pub mod cylinder;
pub mod error;
pub mod flow;
pub mod group;
pub mod hyperbolic;
pub mod packing;
pub mod torus;
pub mod triangle;
pub mod variational;

pub use error::{Error, Result};

/// The figure-eight knot holonomy shipped with the crate.
pub const FIGURE_EIGHT_JSON: &str = include_str!("../data/figure_eight.json");
