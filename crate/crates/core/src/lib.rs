//! Bridge seminorms between fuzzy spheres and the sphere, and certified
//! upper bounds for the quantum proximity of the matrix algebras B^m and B^n.

pub mod berezin;
pub mod bridge;
pub mod distance;
pub mod error;
pub mod exec;
pub mod group_rep;
pub mod harmonics;
pub mod linalg;
pub mod optimize;
pub mod quantum_metric;
pub mod sphere_opt;
pub mod sweep;

pub use error::{ProxError, Result};
