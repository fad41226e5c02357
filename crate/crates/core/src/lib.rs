//! Expansion invariants of finite polyhedral complexes.
//!
//! Cheeger and coboundary constants in L^p norms (exact LP and enumeration),
//! Hodge-Laplacian spectral gaps, integer homology and torsion, universal
//! abelian covers, transport certificates for hypercube fillings, and the
//! linking-matrix model of Dehn surgery.

pub mod arith;
pub mod chain;
pub mod complex;
pub mod constructors;
pub mod error;
pub mod filling;
pub mod homology;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod report;
pub mod spectral;
pub mod surgery;
pub mod transport;
pub mod verify;

pub use arith::{Magnitude, Q};
pub use chain::{Chain, FChain, Norm, QChain};
pub use complex::{build_simplicial, CellComplex, SparseMatrix};
pub use error::{Error, Result};
