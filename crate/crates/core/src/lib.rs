//! Sperner-type theory for the subspace lattices L_n(q) and the Boolean
//! lattice B_n: exact counting, lattice enumeration, Lubell-type measures,
//! forbidden-pattern detection, basis-sublattice covering, bound calculators
//! and exhaustive search on small instances.

pub mod algebra;
pub mod bounds;
pub mod covering;
pub mod error;
pub mod lattice;
pub mod measures;
pub mod patterns;
pub mod report;
pub mod search;

pub use error::{Error, Result};
