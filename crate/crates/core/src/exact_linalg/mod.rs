//! Exact rational linear algebra over canonical form bases.
//!
//! Subspaces are kept in reduced row echelon form (each basis vector has a
//! leading 1, pivots strictly increasing, every pivot coordinate zero in the
//! other vectors). Two spanning sets of the same space therefore produce
//! identical [`Subspace`] values.

mod elim;
mod solve;
mod sparse;
mod subspace;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use solve::{solve, Solver};
pub use sparse::{SparseMatrix, SparseVec};
pub use subspace::{
    contains, image, intersect, kernel, kernel_of_matrix, ortho_complement_within, rank,
    restricted_kernel, subspace_sum, Subspace, SubspaceJson,
};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Default ceiling on ambient coordinate counts.
pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIMENSION_CAP);

pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

pub fn set_dimension_cap(cap: usize) {
    DIMENSION_CAP.store(cap, Ordering::Relaxed);
}

pub(crate) fn check_cap(dim: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim > cap {
        Err(Error::CapExceeded { dim, cap })
    } else {
        Ok(())
    }
}
