//! `d`, `d*`, the Hodge Laplacian, the restricted Dirac operator `d + d*`
//! and the map `Φ`, as exact sparse matrices in canonical bases.
//!
//! Conventions on a basis element `x^α dx_I`:
//! - `d  (x^α dx_I) = Σ_i        αᵢ x^{α−eᵢ} dx_i ∧ dx_I`
//! - `d* (x^α dx_I) = Σ_{i ∈ I}  αᵢ x^{α−eᵢ} ι_{eᵢ} dx_I`
//!
//! With this sign for `d*`, `dd* + d*d` is the scalar Laplacian `Σ ∂ᵢ²`
//! acting on every blade component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{Rational, SparseMatrix, SparseVec, Subspace};
use crate::exterior_poly::{
    contract_unchecked, star_sign, wedge_unchecked, Blade, FormBasis, FormSpaceDescriptor,
    MultiIndex, PolyForm,
};
use crate::gmt::GradeRange;

/// A linear map between two enumerated form spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMatrix {
    source: FormSpaceDescriptor,
    target: FormSpaceDescriptor,
    matrix: SparseMatrix,
}

impl OperatorMatrix {
    pub fn new(
        source: FormSpaceDescriptor,
        target: FormSpaceDescriptor,
        matrix: SparseMatrix,
    ) -> Result<Self> {
        if matrix.ncols() != source.dim() || matrix.nrows() != target.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                source,
                target
            )));
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    /// Builds the matrix column by column from the action on basis
    /// elements. `action` pushes `(blade, monomial, coefficient)` images.
    pub fn from_action(
        source: FormSpaceDescriptor,
        target: FormSpaceDescriptor,
        action: impl Fn(Blade, &MultiIndex, &mut Vec<(Blade, MultiIndex, i64)>),
    ) -> Self {
        let sb = FormBasis::new(&source);
        let tb = FormBasis::new(&target);
        let mut buf = Vec::new();
        let cols = (0..sb.dim())
            .map(|c| {
                let (blade, mono) = sb.element(c);
                buf.clear();
                action(blade, mono, &mut buf);
                SparseVec::from_entries(buf.drain(..).filter_map(|(b, a, v)| {
                    // images in grades outside the target are dropped
                    tb.index_of(b, &a)
                        .map(|i| (i, Rational::from_integer(v.into())))
                }))
            })
            .collect();
        Self {
            matrix: SparseMatrix::from_columns(tb.dim(), cols),
            source,
            target,
        }
    }

    pub fn source(&self) -> &FormSpaceDescriptor {
        &self.source
    }

    pub fn target(&self) -> &FormSpaceDescriptor {
        &self.target
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &OperatorMatrix) -> Result<OperatorMatrix> {
        if inner.target.dim() != self.source.dim()
            || (inner.target != self.source && self.source.dim() != 0)
        {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.source, self.target, inner.source, inner.target
            )));
        }
        Ok(OperatorMatrix {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.matmul(&inner.matrix),
        })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::ShapeMismatch(
                "operator sum with different spaces".into(),
            ));
        }
        Ok(OperatorMatrix {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.add(&other.matrix),
        })
    }

    pub fn scale(&self, factor: &Rational) -> OperatorMatrix {
        OperatorMatrix {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn apply_coords(&self, v: &SparseVec) -> SparseVec {
        self.matrix.mul_vec(v)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            source: self.source.clone(),
            target: self.target.clone(),
            triplets: self
                .matrix
                .triplets()
                .map(|(i, j, v)| (i, j, v.to_string()))
                .collect(),
        }
    }
}

/// Triplets are `[row, col, "coeff"]`, 0-based, in column-major order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OperatorJson {
    pub source: FormSpaceDescriptor,
    pub target: FormSpaceDescriptor,
    pub triplets: Vec<(usize, usize, String)>,
}

fn grade_check(m: usize, s: usize) -> Result<()> {
    if m == 0 || m > crate::exterior_poly::MAX_DIMENSION {
        return Err(Error::InvalidDescriptor(format!(
            "dimension m={m} unsupported"
        )));
    }
    if s > m {
        return Err(Error::InvalidDescriptor(format!("grade {s} exceeds m={m}")));
    }
    Ok(())
}

fn push_d(m: usize, blade: Blade, mono: &MultiIndex, out: &mut Vec<(Blade, MultiIndex, i64)>) {
    for i in 1..=m {
        if let Some((e, lowered)) = mono.lower(i) {
            if let Some((sign, b)) = wedge_unchecked(i, blade) {
                out.push((b, lowered, sign as i64 * e as i64));
            }
        }
    }
}

fn push_dstar(blade: Blade, mono: &MultiIndex, out: &mut Vec<(Blade, MultiIndex, i64)>) {
    for i in blade.indices() {
        if let Some((e, lowered)) = mono.lower(i) {
            if let Some((sign, b)) = contract_unchecked(i, blade) {
                out.push((b, lowered, sign as i64 * e as i64));
            }
        }
    }
}

/// `d : 𝒫^s_k → 𝒫^{s+1}_{k−1}`.
pub fn d_matrix(m: usize, k: i64, s: usize) -> Result<OperatorMatrix> {
    grade_check(m, s)?;
    Ok(OperatorMatrix::from_action(
        FormSpaceDescriptor::single(m, k, s)?,
        FormSpaceDescriptor::with_grades(m, k - 1, [s as i64 + 1]),
        |b, a, out| push_d(m, b, a, out),
    ))
}

/// `d* : 𝒫^s_k → 𝒫^{s−1}_{k−1}`.
pub fn dstar_matrix(m: usize, k: i64, s: usize) -> Result<OperatorMatrix> {
    grade_check(m, s)?;
    Ok(OperatorMatrix::from_action(
        FormSpaceDescriptor::single(m, k, s)?,
        FormSpaceDescriptor::with_grades(m, k - 1, [s as i64 - 1]),
        push_dstar,
    ))
}

/// `Δ = dd* + d*d : 𝒫^s_k → 𝒫^s_{k−2}`.
pub fn laplacian_matrix(m: usize, k: i64, s: usize) -> Result<OperatorMatrix> {
    grade_check(m, s)?;
    let mut lap = zero_operator(m, k, s);
    if s > 0 {
        let dd = d_matrix(m, k - 1, s - 1)?.compose(&dstar_matrix(m, k, s)?)?;
        lap = lap.add(&dd)?;
    }
    if s < m {
        let dd = dstar_matrix(m, k - 1, s + 1)?.compose(&d_matrix(m, k, s)?)?;
        lap = lap.add(&dd)?;
    }
    Ok(lap)
}

fn zero_operator(m: usize, k: i64, s: usize) -> OperatorMatrix {
    let source = FormSpaceDescriptor::with_grades(m, k, [s as i64]);
    let target = FormSpaceDescriptor::with_grades(m, k - 2, [s as i64]);
    OperatorMatrix {
        matrix: SparseMatrix::zeros(target.dim(), source.dim()),
        source,
        target,
    }
}

/// Grades `r+2p−1, r+2p+1, …, r+2q+1` hit by `d + d*` on a grade range.
pub fn dirac_target(m: usize, k: i64, range: &GradeRange) -> FormSpaceDescriptor {
    let r = range.r as i64;
    FormSpaceDescriptor::with_grades(
        m,
        k - 1,
        (range.p..=range.q + 1).map(|j| r + 2 * j as i64 - 1),
    )
}

/// `d + d*` restricted to `𝒫^{(r,p,q)}_k`. Row blocks are, in grade order,
/// `d*ω^{r+2p}`, `dω^{r+2j} + d*ω^{r+2j+2}`, …, `dω^{r+2q}`.
pub fn dirac_block_matrix(m: usize, k: i64, range: &GradeRange) -> Result<OperatorMatrix> {
    range.validate(m)?;
    Ok(OperatorMatrix::from_action(
        range.descriptor(m, k),
        dirac_target(m, k, range),
        |b, a, out| {
            push_d(m, b, a, out);
            push_dstar(b, a, out);
        },
    ))
}

/// The single-grade Hodge-de Rham system `(d, d*)` on `𝒫^s_k`, with both
/// images laid out in one target space (grades `s−1` and `s+1`).
pub fn hodge_system_matrix(m: usize, k: i64, s: usize) -> Result<OperatorMatrix> {
    grade_check(m, s)?;
    dirac_block_matrix(m, k, &GradeRange { r: s, p: 0, q: 0 })
}

/// Contraction with the Euler field, `ι_E : 𝒫^s_k → 𝒫^{s−1}_{k+1}`,
/// `ι_E(x^α dx_I) = Σ_{i ∈ I} x_i x^α ι_{eᵢ} dx_I`.
pub fn euler_contraction_matrix(m: usize, k: i64, s: usize) -> Result<OperatorMatrix> {
    grade_check(m, s)?;
    Ok(OperatorMatrix::from_action(
        FormSpaceDescriptor::single(m, k, s)?,
        FormSpaceDescriptor::with_grades(m, k + 1, [s as i64 - 1]),
        |b, a, out| {
            for i in b.indices() {
                if let Some((sign, nb)) = contract_unchecked(i, b) {
                    out.push((nb, a.raise(i), sign as i64));
                }
            }
        },
    ))
}

/// Hodge star `𝒫^s_k → 𝒫^{m−s}_k`.
pub fn star_matrix(m: usize, k: i64, s: usize) -> Result<OperatorMatrix> {
    grade_check(m, s)?;
    Ok(OperatorMatrix::from_action(
        FormSpaceDescriptor::single(m, k, s)?,
        FormSpaceDescriptor::single(m, k, m - s)?,
        |b, a, out| out.push((b.complement(m), a.clone(), star_sign(b, m) as i64)),
    ))
}

/// Multiplication by `r² = Σ xᵢ²` on the given grades.
pub fn r2_matrix(source: &FormSpaceDescriptor) -> OperatorMatrix {
    let m = source.m;
    let target = FormSpaceDescriptor {
        k: source.k + 2,
        ..source.clone()
    };
    OperatorMatrix::from_action(source.clone(), target, |b, a, out| {
        for i in 1..=m {
            out.push((b, a.raise(i).raise(i), 1));
        }
    })
}

/// Exact product `op · f`, returned as a form of the target space.
pub fn apply(op: &OperatorMatrix, f: &PolyForm) -> Result<PolyForm> {
    if f.m() != op.source.m {
        return Err(Error::ShapeMismatch(format!(
            "form has m={} but operator acts on {}",
            f.m(),
            op.source
        )));
    }
    let coords = FormBasis::new(&op.source).coords(f)?;
    let out = op.matrix.mul_vec(&coords);
    Ok(FormBasis::new(&op.target).form(&out).with_k(op.target.k))
}

/// `Φ`: the restriction of `d` to a GMT solution space, with columns indexed
/// by the canonical basis of that space and target
/// `⊕_{j=p}^{q−1} 𝒫^{r+2j+1}_{k−1}`.
#[derive(Clone, Debug)]
pub struct PhiOperator {
    range: GradeRange,
    mt: Subspace,
    target: FormSpaceDescriptor,
    matrix: SparseMatrix,
}

impl PhiOperator {
    pub fn range(&self) -> &GradeRange {
        &self.range
    }

    pub fn mt(&self) -> &Subspace {
        &self.mt
    }

    pub fn target(&self) -> &FormSpaceDescriptor {
        &self.target
    }

    /// `rows × dim MT` matrix.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// `Ker Φ` as a subspace of `𝒫^{(r,p,q)}_k`.
    pub fn kernel(&self) -> Result<Subspace> {
        let coeffs = crate::exact_linalg::kernel_of_matrix(&self.matrix);
        let vectors: Vec<SparseVec> = coeffs
            .iter()
            .map(|c| self.mt.combination(&c.to_dense(self.mt.dim())))
            .collect();
        Subspace::from_spanning(self.mt.ambient().clone(), &vectors)
    }

    /// `Im Φ` as a subspace of the target.
    pub fn image(&self) -> Result<Subspace> {
        Subspace::from_spanning(self.target.clone(), self.matrix.columns())
    }
}

/// Target of `Φ`: grades `r+2j+1`, `j = p..q−1`, homogeneity `k − 1`.
pub fn phi_target(m: usize, k: i64, range: &GradeRange) -> FormSpaceDescriptor {
    FormSpaceDescriptor::with_grades(
        m,
        k - 1,
        (range.p..range.q).map(|j| (range.r + 2 * j + 1) as i64),
    )
}

/// Operator applying `d` to the components of grade `r+2p, …, r+2q−2` of a
/// form in `𝒫^{(r,p,q)}_k`, landing in the `Φ` target.
pub fn gradewise_d(m: usize, k: i64, range: &GradeRange) -> Result<OperatorMatrix> {
    range.validate(m)?;
    let top = range.r + 2 * range.q;
    Ok(OperatorMatrix::from_action(
        range.descriptor(m, k),
        phi_target(m, k, range),
        |b, a, out| {
            if b.grade() < top {
                push_d(m, b, a, out);
            }
        },
    ))
}

pub fn phi_matrix(m: usize, k: i64, range: &GradeRange, mt: &Subspace) -> Result<PhiOperator> {
    range.validate(m)?;
    let source = range.descriptor(m, k);
    if mt.ambient() != &source {
        return Err(Error::AmbientMismatch(format!(
            "MT subspace lives in {} but range gives {}",
            mt.ambient(),
            source
        )));
    }
    let dirac = dirac_block_matrix(m, k, range)?;
    if mt.basis().iter().any(|v| !dirac.apply_coords(v).is_zero()) {
        return Err(Error::NotInMT);
    }
    let dg = gradewise_d(m, k, range)?;
    let cols = mt.basis().iter().map(|v| dg.apply_coords(v)).collect();
    let target = dg.target().clone();
    Ok(PhiOperator {
        range: *range,
        mt: mt.clone(),
        matrix: SparseMatrix::from_columns(target.dim(), cols),
        target,
    })
}

/// Kernel of several operators sharing a source.
pub fn joint_kernel(ops: &[&OperatorMatrix]) -> Result<Subspace> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Precondition("joint kernel of no operators".into()))?;
    if ops.iter().any(|o| o.source != first.source) {
        return Err(Error::AmbientMismatch(
            "joint kernel with different sources".into(),
        ));
    }
    crate::exact_linalg::check_cap(first.source.dim())?;
    let mats: Vec<&SparseMatrix> = ops.iter().map(|o| &o.matrix).collect();
    let stacked = SparseMatrix::vstack(&mats);
    Ok(Subspace::from_canonical(
        first.source.clone(),
        crate::exact_linalg::kernel_of_matrix(&stacked),
    ))
}
