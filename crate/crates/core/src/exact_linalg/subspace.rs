use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::elim::Echelon;
use super::{check_cap, Rational, SparseMatrix, SparseVec};
use crate::error::{Error, Result};
use crate::exterior_poly::{FormBasis, FormSpaceDescriptor};
use crate::operators::OperatorMatrix;

/// A subspace of an enumerated form space, stored by its canonical basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: FormSpaceDescriptor,
    basis: Vec<SparseVec>,
}

impl Subspace {
    pub fn zero(ambient: FormSpaceDescriptor) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: FormSpaceDescriptor) -> Self {
        let n = ambient.dim();
        Self {
            ambient,
            basis: (0..n).map(SparseVec::unit).collect(),
        }
    }

    /// Canonical basis of the span of `vectors`.
    pub fn from_spanning(ambient: FormSpaceDescriptor, vectors: &[SparseVec]) -> Result<Self> {
        let n = ambient.dim();
        check_cap(n)?;
        if let Some(bad) = vectors
            .iter()
            .find(|v| v.max_index().is_some_and(|i| i >= n))
        {
            return Err(Error::ShapeMismatch(format!(
                "vector index {} outside ambient of dimension {n}",
                bad.max_index().unwrap_or_default()
            )));
        }
        Ok(Self {
            ambient,
            basis: canonical_basis(vectors),
        })
    }

    /// Caller guarantees `basis` is already canonical.
    pub(crate) fn from_canonical(ambient: FormSpaceDescriptor, basis: Vec<SparseVec>) -> Self {
        Self { ambient, basis }
    }

    pub fn ambient(&self) -> &FormSpaceDescriptor {
        &self.ambient
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().filter_map(SparseVec::leading).collect()
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.residual(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// `v` reduced against the canonical basis; zero iff `v` lies in the span.
    pub fn residual(&self, v: &SparseVec) -> SparseVec {
        let mut r = v.clone();
        for b in &self.basis {
            let lead = b.leading().expect("basis vectors are nonzero");
            if let Some(c) = r.get(lead).cloned() {
                r = r.add_scaled(&-c, b);
            }
        }
        r
    }

    /// Coefficients of `v` in the canonical basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &SparseVec) -> Option<Vec<Rational>> {
        let mut r = v.clone();
        let mut coeffs = Vec::with_capacity(self.basis.len());
        for b in &self.basis {
            let lead = b.leading().expect("basis vectors are nonzero");
            let c = r.get(lead).cloned().unwrap_or_else(Rational::zero);
            if !c.is_zero() {
                r = r.add_scaled(&-c.clone(), b);
            }
            coeffs.push(c);
        }
        r.is_zero().then_some(coeffs)
    }

    /// `Σ coeffs[i] · basis[i]`.
    pub fn combination(&self, coeffs: &[Rational]) -> SparseVec {
        let mut out = SparseVec::new();
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                out = out.add_scaled(c, b);
            }
        }
        out
    }

    /// The basis as columns of an `ambient_dim × dim` matrix.
    pub fn as_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_columns(self.ambient_dim(), self.basis.clone())
    }

    /// Image of this subspace under a linear map on coordinates.
    pub fn map(
        &self,
        target: FormSpaceDescriptor,
        f: impl Fn(&SparseVec) -> SparseVec,
    ) -> Result<Subspace> {
        let images: Vec<SparseVec> = self.basis.iter().map(f).collect();
        Subspace::from_spanning(target, &images)
    }

    pub fn to_json(&self) -> SubspaceJson {
        let n = self.ambient_dim();
        SubspaceJson {
            ambient: self.ambient.clone(),
            dim: self.dim(),
            basis: self
                .basis
                .iter()
                .map(|v| v.to_dense(n).iter().map(|c| c.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &SubspaceJson) -> Result<Self> {
        json.ambient.validate()?;
        let n = json.ambient.dim();
        let mut vectors = Vec::with_capacity(json.basis.len());
        for row in &json.basis {
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "basis vector has {} coordinates, ambient has {n}",
                    row.len()
                )));
            }
            let dense = row
                .iter()
                .map(|s| crate::exterior_poly::parse_rational(s))
                .collect::<Result<Vec<_>>>()?;
            vectors.push(SparseVec::from_dense(&dense));
        }
        let sub = Subspace::from_spanning(json.ambient.clone(), &vectors)?;
        if sub.dim() != json.dim {
            return Err(Error::Parse(format!(
                "declared dim {} but basis spans {}",
                json.dim,
                sub.dim()
            )));
        }
        Ok(sub)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SubspaceJson {
    pub ambient: FormSpaceDescriptor,
    pub dim: usize,
    pub basis: Vec<Vec<String>>,
}

pub(crate) fn canonical_basis(vectors: &[SparseVec]) -> Vec<SparseVec> {
    let mut e = Echelon::new(vectors, false);
    e.reduce();
    e.normalized_rows()
}

/// Kernel of a raw matrix, already in canonical form.
///
/// The elimination runs with the column order reversed: in that reduced
/// form every kernel vector attached to a free column `f` has a 1 at `f`
/// and its other entries only at pivot columns `> f`, which is exactly the
/// canonical (reduced echelon) basis of the kernel.
pub fn kernel_of_matrix(a: &SparseMatrix) -> Vec<SparseVec> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    let flip = |c: usize| n - 1 - c;
    let rows: Vec<SparseVec> = a.rows().iter().map(|r| r.map_indices(flip)).collect();
    let mut e = Echelon::new(&rows, false);
    e.reduce();
    let mut is_pivot = vec![false; n];
    for (c, _, _) in &e.pivots {
        is_pivot[*c] = true;
    }
    // kernel vector per free column, keyed in reversed coordinates
    let mut vecs: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for row in e.normalized_rows() {
        let mut it = row.iter();
        let (p, _) = it.next().expect("nonzero row");
        for (f, v) in it {
            vecs[*f].push((flip(*p), -v.clone()));
        }
    }
    let mut out = Vec::with_capacity(n - e.rank());
    for f_rev in (0..n).rev() {
        if is_pivot[f_rev] {
            continue;
        }
        let mut entries = std::mem::take(&mut vecs[f_rev]);
        entries.push((flip(f_rev), Rational::one()));
        entries.sort_unstable_by_key(|e| e.0);
        out.push(SparseVec::from_sorted_unchecked(entries));
    }
    out
}

pub fn rank(op: &OperatorMatrix) -> Result<usize> {
    check_cap(op.source().dim())?;
    check_cap(op.target().dim())?;
    Ok(Echelon::new(&op.matrix().rows(), false).rank())
}

pub fn kernel(op: &OperatorMatrix) -> Result<Subspace> {
    check_cap(op.source().dim())?;
    check_cap(op.target().dim())?;
    Ok(Subspace::from_canonical(
        op.source().clone(),
        kernel_of_matrix(op.matrix()),
    ))
}

pub fn image(op: &OperatorMatrix) -> Result<Subspace> {
    check_cap(op.source().dim())?;
    Subspace::from_spanning(op.target().clone(), op.matrix().columns())
}

/// Kernel of `op` restricted to `sub`: `{ v ∈ sub : op·v = 0 }`.
pub fn restricted_kernel(op: &OperatorMatrix, sub: &Subspace) -> Result<Subspace> {
    if op.source() != sub.ambient() {
        return Err(Error::AmbientMismatch(format!(
            "operator source {} vs subspace ambient {}",
            op.source(),
            sub.ambient()
        )));
    }
    let images: Vec<SparseVec> = sub.basis().iter().map(|v| op.matrix().mul_vec(v)).collect();
    let restricted = SparseMatrix::from_columns(op.target().dim(), images);
    let coeffs = kernel_of_matrix(&restricted);
    let vectors: Vec<SparseVec> = coeffs
        .iter()
        .map(|c| {
            let dense = c.to_dense(sub.dim());
            sub.combination(&dense)
        })
        .collect();
    Subspace::from_spanning(sub.ambient().clone(), &vectors)
}

fn same_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient() != b.ambient() {
        return Err(Error::AmbientMismatch(format!(
            "{} vs {}",
            a.ambient(),
            b.ambient()
        )));
    }
    Ok(())
}

/// Canonical basis of `a ∩ b`.
///
/// A vector of `a` lies in `b` iff it is annihilated by `b`'s canonical
/// annihilator: for each non-pivot coordinate `f` of `b`, the functional
/// `x ↦ x_f − Σ_i b_i[f] · x_{pivot_i}`.
pub fn intersect(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    same_ambient(a, b)?;
    check_cap(a.ambient_dim())?;
    if a.is_zero() || b.is_zero() {
        return Ok(Subspace::zero(a.ambient().clone()));
    }
    let (small, large) = if a.dim() <= b.dim() { (a, b) } else { (b, a) };
    // Coefficients c with residual(Σ c_i small_i) = 0 w.r.t. `large`.
    let residuals: Vec<SparseVec> = small.basis().iter().map(|v| large.residual(v)).collect();
    let m = SparseMatrix::from_columns(small.ambient_dim(), residuals);
    let coeffs = kernel_of_matrix(&m);
    let vectors: Vec<SparseVec> = coeffs
        .iter()
        .map(|c| small.combination(&c.to_dense(small.dim())))
        .collect();
    Subspace::from_spanning(a.ambient().clone(), &vectors)
}

pub fn subspace_sum(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    same_ambient(a, b)?;
    let mut vectors = a.basis().to_vec();
    vectors.extend_from_slice(b.basis());
    Subspace::from_spanning(a.ambient().clone(), &vectors)
}

pub fn contains(a: &Subspace, v: &SparseVec) -> Result<bool> {
    if v.max_index().is_some_and(|i| i >= a.ambient_dim()) {
        return Err(Error::ShapeMismatch("vector outside ambient space".into()));
    }
    Ok(a.contains(v))
}

/// Fischer-orthogonal complement of `sub` inside `whole`.
pub fn ortho_complement_within(sub: &Subspace, whole: &Subspace) -> Result<Subspace> {
    same_ambient(sub, whole)?;
    if !whole.contains_subspace(sub) {
        return Err(Error::NotContained);
    }
    if sub.is_zero() {
        return Ok(whole.clone());
    }
    if sub.dim() == whole.dim() {
        return Ok(Subspace::zero(whole.ambient().clone()));
    }
    let weights = FormBasis::new(whole.ambient()).fischer_weights();
    // Weighting the (typically smaller) `sub` once keeps the Gram entries plain dot products.
    let weighted: Vec<SparseVec> = sub
        .basis()
        .iter()
        .map(|s| {
            SparseVec::from_sorted_unchecked(
                s.iter()
                    .map(|(i, v)| (*i, v * Rational::from_integer(weights[*i].clone())))
                    .collect(),
            )
        })
        .collect();
    let gram_cols: Vec<SparseVec> = whole
        .basis()
        .iter()
        .map(|w| {
            SparseVec::from_sorted_unchecked(
                weighted
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (i, s.dot(w)))
                    .filter(|(_, v)| !v.is_zero())
                    .collect(),
            )
        })
        .collect();
    let gram = SparseMatrix::from_columns(sub.dim(), gram_cols);
    let coeffs = kernel_of_matrix(&gram);
    let vectors: Vec<SparseVec> = coeffs
        .iter()
        .map(|c| whole.combination(&c.to_dense(whole.dim())))
        .collect();
    Subspace::from_spanning(whole.ambient().clone(), &vectors)
}
