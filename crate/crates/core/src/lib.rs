//! Constant-mean-curvature surfaces with Delaunay ends.
//!
//! Delaunay profiles and their estimates, mean curvature of parametrized
//! patches, Jacobi fields and Floquet exponents, linear and nonlinear solvers on
//! half-Delaunay cylinders, and Cauchy-data matching of catenoidal ends.

pub mod bvp;
pub mod cli;
pub mod cmc_graph;
pub mod delaunay;
pub mod error;
pub mod geometry;
pub mod gluing;
pub mod jacobi;
pub mod output;
pub mod quad;

pub use error::{Error, Result};
