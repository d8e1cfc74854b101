//! Named solution spaces and their dimension formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{
    kernel, ortho_complement_within, restricted_kernel, subspace_sum, SparseVec, Subspace,
};
use crate::exterior_poly::{binomial, FormSpaceDescriptor};
use crate::operators::{
    d_matrix, dstar_matrix, hodge_system_matrix, joint_kernel, laplacian_matrix, r2_matrix,
    OperatorMatrix,
};

/// `d(k, m, s) = dim H^s_k`, extended by 0 for `k < 0` and for `k ≥ 1` on
/// grades 0 and m, and by 1 on grades 0 and m at `k = 0`.
pub fn hodge_dim_formula(k: i64, m: usize, s: i64) -> u128 {
    let mi = m as i64;
    if k < 0 || s < 0 || s > mi {
        return 0;
    }
    if s == 0 || s == mi {
        return u128::from(k == 0);
    }
    let num = binomial(mi - 2, s - 1)
        * binomial(k + mi - 2, mi - 2)
        * (2 * k + mi) as u128
        * (k + mi - 1) as u128;
    let den = ((k + s) * (k + mi - s)) as u128;
    debug_assert_eq!(num % den, 0, "d({k},{m},{s}) is not integral");
    num / den
}

/// Dimension of scalar harmonic polynomials of degree `k` in `m` variables:
/// `C(k+m−1, m−1) − C(k+m−3, m−1)`.
pub fn harmonic_dim(k: i64, m: usize) -> u128 {
    if k < 0 {
        return 0;
    }
    let mi = m as i64;
    binomial(k + mi - 1, mi - 1) - binomial(k + mi - 3, mi - 1)
}

/// Highest weight and sign `ε` of the O(m)-module `H^s_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeLabel {
    pub weight: Vec<i64>,
    pub epsilon: i8,
}

/// `λ^s_k = (k+1, 1, …, 1, 0, …, 0)` with `s` nonzero entries, length `n`.
fn lambda(n: usize, k: i64, s: usize) -> Vec<i64> {
    (0..n)
        .map(|i| match i {
            _ if i >= s => 0,
            0 => k + 1,
            _ => 1,
        })
        .collect()
}

/// Label of `H^s_k` following the classification table: `(λ^s_k, +1)` for
/// `s < m/2`, `(λ^{m−s}_k, −1)` for `s > m/2`, `(λ^n_k, 0)` for `s = n = m/2`,
/// and the zero weight with `±1` for the constant 0- and m-forms.
pub fn highest_weight_label(m: usize, k: i64, s: usize) -> Result<HodgeLabel> {
    if s > m {
        return Err(Error::InvalidDescriptor(format!("grade {s} exceeds m={m}")));
    }
    if hodge_dim_formula(k, m, s as i64) == 0 {
        return Err(Error::Precondition(format!(
            "H^{s}_{k} is zero-dimensional for m={m}; it carries no label"
        )));
    }
    let n = m / 2;
    let label = if s == 0 || s == m {
        HodgeLabel {
            weight: vec![0; n],
            epsilon: if s == 0 { 1 } else { -1 },
        }
    } else if m.is_multiple_of(2) && s == n {
        HodgeLabel {
            weight: lambda(n, k, n),
            epsilon: 0,
        }
    } else if s <= n {
        HodgeLabel {
            weight: lambda(n, k, s),
            epsilon: 1,
        }
    } else {
        HodgeLabel {
            weight: lambda(n, k, m - s),
            epsilon: -1,
        }
    };
    Ok(label)
}

fn check_grade(m: usize, s: usize) -> Result<()> {
    if m == 0 || s > m {
        return Err(Error::InvalidDescriptor(format!(
            "grade {s} invalid for m={m}"
        )));
    }
    Ok(())
}

/// `H^s_k = Ker d ∩ Ker d*` on `𝒫^s_k`.
pub fn hodge_space(m: usize, k: i64, s: usize) -> Result<Subspace> {
    check_grade(m, s)?;
    kernel(&hodge_system_matrix(m, k, s)?)
}

/// `Ker^s_k Δ`.
pub fn harmonic_kernel(m: usize, k: i64, s: usize) -> Result<Subspace> {
    check_grade(m, s)?;
    kernel(&laplacian_matrix(m, k, s)?)
}

/// `dd* : 𝒫^s_k → 𝒫^s_{k−2}` (zero for `s = 0`).
pub fn d_dstar(m: usize, k: i64, s: usize) -> Result<Option<OperatorMatrix>> {
    if s == 0 {
        return Ok(None);
    }
    Ok(Some(
        d_matrix(m, k - 1, s - 1)?.compose(&dstar_matrix(m, k, s)?)?,
    ))
}

/// `d*d : 𝒫^s_k → 𝒫^s_{k−2}` (zero for `s = m`).
pub fn dstar_d(m: usize, k: i64, s: usize) -> Result<Option<OperatorMatrix>> {
    if s == m {
        return Ok(None);
    }
    Ok(Some(
        dstar_matrix(m, k - 1, s + 1)?.compose(&d_matrix(m, k, s)?)?,
    ))
}

fn kernel_within(op: Option<OperatorMatrix>, sub: Subspace) -> Result<Subspace> {
    match op {
        Some(op) => restricted_kernel(&op, &sub),
        None => Ok(sub),
    }
}

/// `Ker^s_k Δ = H ⊕ U ⊕ V ⊕ W`, with the auxiliary kernels used to build it.
#[derive(Clone, Debug)]
pub struct UvwDecomposition {
    pub h: Subspace,
    pub u: Subspace,
    pub v: Subspace,
    pub w: Subspace,
    pub ker_laplacian: Subspace,
    /// `Ker dd* ∩ Ker d`
    pub ker_ddstar_d: Subspace,
    /// `Ker d*d ∩ Ker d*`
    pub ker_dstard_dstar: Subspace,
    /// `Ker dd* ∩ Ker d*d`
    pub ker_ddstar_dstard: Subspace,
}

/// Complements are Fischer-orthogonal: `U` inside `Ker dd* ∩ Ker d`, `V`
/// inside `Ker d*d ∩ Ker d*`, `W` inside `Ker Δ` against `H ⊕ U ⊕ V`.
pub fn uvw_decomposition(m: usize, k: i64, s: usize) -> Result<UvwDecomposition> {
    check_grade(m, s)?;
    let h = hodge_space(m, k, s)?;
    let ker_d = kernel(&d_matrix(m, k, s)?)?;
    let ker_dstar = kernel(&dstar_matrix(m, k, s)?)?;
    let ker_ddstar_d = kernel_within(d_dstar(m, k, s)?, ker_d)?;
    let ker_dstard_dstar = kernel_within(dstar_d(m, k, s)?, ker_dstar)?;
    let ker_ddstar_dstard = match (d_dstar(m, k, s)?, dstar_d(m, k, s)?) {
        (Some(a), Some(b)) => joint_kernel(&[&a, &b])?,
        (Some(a), None) | (None, Some(a)) => kernel(&a)?,
        (None, None) => Subspace::full(FormSpaceDescriptor::single(m, k, s)?),
    };
    let ker_laplacian = harmonic_kernel(m, k, s)?;
    let u = ortho_complement_within(&h, &ker_ddstar_d)?;
    let v = ortho_complement_within(&h, &ker_dstard_dstar)?;
    let huv = subspace_sum(&subspace_sum(&h, &u)?, &v)?;
    let w = ortho_complement_within(&huv, &ker_laplacian)?;
    Ok(UvwDecomposition {
        h,
        u,
        v,
        w,
        ker_laplacian,
        ker_ddstar_d,
        ker_dstard_dstar,
        ker_ddstar_dstard,
    })
}

/// Predicted `(dim H, dim U, dim V, dim W)`. `W` vanishes in the extreme
/// grades `s ∈ {0, m}` even where `d(k−2, m, s)` does not.
pub fn uvw_dims_formula(m: usize, k: i64, s: usize) -> [u128; 4] {
    let w = if s == 0 || s == m {
        0
    } else {
        hodge_dim_formula(k - 2, m, s as i64)
    };
    let s = s as i64;
    [
        hodge_dim_formula(k, m, s),
        hodge_dim_formula(k - 1, m, s - 1),
        hodge_dim_formula(k - 1, m, s + 1),
        w,
    ]
}

/// Image of `sub` under `r^{2·times}`, as a subspace of homogeneity
/// `k + 2·times`.
pub fn multiply_subspace_by_r2(sub: &Subspace, times: usize) -> Result<Subspace> {
    let mut vectors: Vec<SparseVec> = sub.basis().to_vec();
    let mut desc = sub.ambient().clone();
    for _ in 0..times {
        let op = r2_matrix(&desc);
        vectors = vectors.iter().map(|v| op.apply_coords(v)).collect();
        desc = op.target().clone();
    }
    Subspace::from_spanning(desc, &vectors)
}

/// Strata `r^{2j} Ker^s_{k−2j} Δ`, `j = 0..⌊k/2⌋`, all inside `𝒫^s_k`.
pub fn fisher_strata(m: usize, k: i64, s: usize) -> Result<Vec<Subspace>> {
    check_grade(m, s)?;
    if k < 0 {
        return Ok(Vec::new());
    }
    (0..=(k / 2) as usize)
        .map(|j| multiply_subspace_by_r2(&harmonic_kernel(m, k - 2 * j as i64, s)?, j))
        .collect()
}

/// Predicted `(dim X_j, dim Y_j)` for `𝒫^s_k`. In the interior grades both
/// equal `d(k−2−2j, m, s)`. In the extreme grades `Z` holds a single copy:
/// for `s = 0` all of it is coclosed, for `s = m` all of it is closed.
pub fn xy_dims_formula(m: usize, k: i64, s: usize, j: usize) -> (u128, u128) {
    let e = hodge_dim_formula(k - 2 - 2 * j as i64, m, s as i64);
    if s == 0 {
        (0, e)
    } else if s == m {
        (e, 0)
    } else {
        (e, e)
    }
}

/// One level `j` of the stratification:
/// `z = r^{2j} Z^s_{k−2j}`, `x = z ∩ Ker d`, `y = z ∩ Ker d*`.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub j: usize,
    pub z: Subspace,
    pub x: Subspace,
    pub y: Subspace,
}

#[derive(Clone, Debug)]
pub struct Stratification {
    pub m: usize,
    pub k: i64,
    pub s: usize,
    pub h: Subspace,
    /// `r^{2j} U^s_{k−2j}` for `j = 0..⌊k/2⌋`.
    pub u_strata: Vec<Subspace>,
    /// `r^{2j} V^s_{k−2j}` for `j = 0..⌊k/2⌋`.
    pub v_strata: Vec<Subspace>,
    pub strata: Vec<Stratum>,
    pub ker_d: Subspace,
    pub ker_dstar: Subspace,
    /// `H ⊕ ⊕ r^{2j}U ⊕ ⊕ X_j`
    pub ker_d_reassembled: Subspace,
    /// `H ⊕ ⊕ r^{2j}V ⊕ ⊕ Y_j`
    pub ker_dstar_reassembled: Subspace,
}

impl Stratification {
    /// Checks every splitting and reassembly identity; the error names the
    /// first one that fails.
    pub fn check(&self) -> Result<()> {
        let fail = |what: String| Err(Error::Internal(what));
        for st in &self.strata {
            let (ex, ey) = xy_dims_formula(self.m, self.k, self.s, st.j);
            if st.x.dim() as u128 != ex || st.y.dim() as u128 != ey {
                return fail(format!(
                    "j={}: dim X = {}, dim Y = {}, expected {ex} and {ey}",
                    st.j,
                    st.x.dim(),
                    st.y.dim()
                ));
            }
            if st.x.dim() + st.y.dim() != st.z.dim() || subspace_sum(&st.x, &st.y)? != st.z {
                return fail(format!("j={}: Z is not X ⊕ Y", st.j));
            }
        }
        let dsum = |parts: &[&Subspace]| parts.iter().map(|p| p.dim()).sum::<usize>();
        let mut parts_d: Vec<&Subspace> = vec![&self.h];
        parts_d.extend(self.u_strata.iter());
        parts_d.extend(self.strata.iter().map(|s| &s.x));
        if self.ker_d_reassembled != self.ker_d || dsum(&parts_d) != self.ker_d.dim() {
            return fail("Ker d is not H ⊕ r^{2j}U ⊕ X".into());
        }
        let mut parts_ds: Vec<&Subspace> = vec![&self.h];
        parts_ds.extend(self.v_strata.iter());
        parts_ds.extend(self.strata.iter().map(|s| &s.y));
        if self.ker_dstar_reassembled != self.ker_dstar || dsum(&parts_ds) != self.ker_dstar.dim() {
            return fail("Ker d* is not H ⊕ r^{2j}V ⊕ Y".into());
        }
        Ok(())
    }
}

fn sum_all(ambient: &FormSpaceDescriptor, parts: &[&Subspace]) -> Result<Subspace> {
    let vectors: Vec<SparseVec> = parts
        .iter()
        .flat_map(|p| p.basis().iter().cloned())
        .collect();
    Subspace::from_spanning(ambient.clone(), &vectors)
}

pub fn kernel_stratification(m: usize, k: i64, s: usize) -> Result<Stratification> {
    check_grade(m, s)?;
    let ambient = FormSpaceDescriptor::single(m, k, s)?;
    let h = hodge_space(m, k, s)?;
    let ker_d = kernel(&d_matrix(m, k, s)?)?;
    let ker_dstar = kernel(&dstar_matrix(m, k, s)?)?;
    let d_op = d_matrix(m, k, s)?;
    let ds_op = dstar_matrix(m, k, s)?;
    let levels = if k < 0 { 0 } else { (k / 2) as usize + 1 };
    let mut u_strata = Vec::with_capacity(levels);
    let mut v_strata = Vec::with_capacity(levels);
    let mut strata = Vec::with_capacity(levels);
    for j in 0..levels {
        let kj = k - 2 * j as i64;
        let uvw = uvw_decomposition(m, kj, s)?;
        u_strata.push(multiply_subspace_by_r2(&uvw.u, j)?);
        v_strata.push(multiply_subspace_by_r2(&uvw.v, j)?);
        let r2h = multiply_subspace_by_r2(&hodge_space(m, kj - 2, s)?, 1)?;
        let z_base = subspace_sum(&r2h, &uvw.w)?;
        let z = multiply_subspace_by_r2(&z_base, j)?;
        let x = restricted_kernel(&d_op, &z)?;
        let y = restricted_kernel(&ds_op, &z)?;
        strata.push(Stratum { j, z, x, y });
    }
    let mut parts_d: Vec<&Subspace> = vec![&h];
    parts_d.extend(u_strata.iter());
    parts_d.extend(strata.iter().map(|s| &s.x));
    let ker_d_reassembled = sum_all(&ambient, &parts_d)?;
    let mut parts_ds: Vec<&Subspace> = vec![&h];
    parts_ds.extend(v_strata.iter());
    parts_ds.extend(strata.iter().map(|s| &s.y));
    let ker_dstar_reassembled = sum_all(&ambient, &parts_ds)?;
    Ok(Stratification {
        m,
        k,
        s,
        h,
        u_strata,
        v_strata,
        strata,
        ker_d,
        ker_dstar,
        ker_d_reassembled,
        ker_dstar_reassembled,
    })
}
