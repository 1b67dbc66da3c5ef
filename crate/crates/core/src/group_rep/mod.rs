//! SU(2) representation data: irreducible representations, coset points of
//! SU(2)/U(1) ≅ S², coherent states, the highest-weight embedding of
//! H^{m+n} into H^m ⊗ H^n, and quadrature on the sphere.
//!
//! Everything group-specific lives here so that other compact groups can be
//! slotted in later without touching the seminorm code.

mod coset;
mod embedding;
mod irrep;
mod quadrature;

pub use coset::{CosetPoint, Rotation};
pub use embedding::{highest_weight_embedding, Embedding};
pub use irrep::{coherent_state, coherent_vector, group_unitary, make_irrep, Irrep};
pub use quadrature::{gauss_legendre, sphere_grid, EvalGrid, QuadratureGrid, MAX_EXACT_DEGREE};
