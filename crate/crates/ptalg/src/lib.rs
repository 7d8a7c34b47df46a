//! Algebras of partially triangulated marked surfaces.
//!
//! The crate models a marked surface with a partial triangulation as an
//! annotated combinatorial map, builds the quiver and the defining relations
//! of its finite-rank algebra, enumerates an explicit basis with exact
//! structure constants over Q or F_p, and checks the structural properties
//! the construction is known to satisfy (rank formula, symmetry, the Brauer
//! graph specialization, Jacobian presentations for triangulations, flips
//! with coefficient mutation, classification labels and tame-weight
//! certificates).
//!
//! Everything is generic over the scalar type through [`field::Field`];
//! concrete aliases for the two supported ground fields are exported below.

pub mod algebra;
pub mod cli;
pub mod doc;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod invariants;
pub mod linalg;
pub mod presentation;
pub mod surface;
pub mod surgery;

pub use error::{Error, Result, Violation};
pub use field::{Field, Fp, Rat};

/// Surface over the rationals.
pub type RatSurface = surface::Surface<Rat>;
/// Surface over a prime field.
pub type FpSurface = surface::Surface<Fp>;
/// Structure-constant table over the rationals.
pub type RatTable = algebra::AlgebraTable<Rat>;
/// Structure-constant table over a prime field.
pub type FpTable = algebra::AlgebraTable<Fp>;
