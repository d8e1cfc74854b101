//! Exact kernels of `d`, `d*` and `d + d*` on homogeneous polynomial
//! differential forms over R^m: the Hodge spaces `dω = d*ω = 0` and the
//! GMT spaces `(d + d*)ω = 0` on grades `r+2p, …, r+2q`.
//!
//! Everything is computed over the rationals: forms are finite maps from
//! (blade, monomial) to exact coefficients, operators are sparse rational
//! matrices in a fixed canonical basis, and subspaces are stored in reduced
//! echelon form so that equality of subspaces is equality of bases.
//!
//! Module map:
//! - [`exterior_poly`]: monomials, blades, polynomial forms, Fischer product.
//! - [`operators`]: `d`, `d*`, the Hodge Laplacian, the restricted Dirac
//!   operator and the map `Φ` as [`operators::OperatorMatrix`] values.
//! - [`exact_linalg`]: kernels, images, minimal-norm solves, subspace algebra.
//! - [`spaces`]: Hodge spaces, harmonic kernels and their decompositions.
//! - [`gmt`]: GMT solution spaces, the `Φ` split and the constructive lift.
//! - [`verify`]: batch cross-checks of dimension formulas and decompositions.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod error;
pub mod exact_linalg;
pub mod exterior_poly;
pub mod gmt;
pub mod operators;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use exact_linalg::{Rational, SparseVec, Subspace};
pub use exterior_poly::{Blade, FormSpaceDescriptor, MultiIndex, PolyForm};
pub use gmt::{GradeRange, HodgeTuple};
pub use operators::OperatorMatrix;
