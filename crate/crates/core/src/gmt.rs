//! Generalized Moisil-Théodoresco systems: solution spaces, the split
//! `MT ≅ Ker Φ ⊕ Im Φ`, the constructive lift from Hodge tuples, and the
//! Poincaré primitives it is built from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{kernel, Solver, Subspace};
use crate::exterior_poly::{FormBasis, FormSpaceDescriptor, PolyForm, PolyFormJson};
use crate::operators::{
    apply, d_matrix, dirac_block_matrix, dstar_matrix, gradewise_d, hodge_system_matrix,
    OperatorMatrix,
};
use crate::spaces::hodge_dim_formula;

/// Grade range `(r, p, q)`: forms with components in grades
/// `r+2p, r+2p+2, …, r+2q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GradeRange {
    pub r: usize,
    pub p: usize,
    pub q: usize,
}

impl GradeRange {
    pub fn new(m: usize, r: usize, p: usize, q: usize) -> Result<Self> {
        let g = Self { r, p, q };
        g.validate(m)?;
        Ok(g)
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.p > self.q || self.r + 2 * self.q > m {
            return Err(Error::InvalidRange {
                m,
                r: self.r,
                p: self.p,
                q: self.q,
            });
        }
        Ok(())
    }

    /// Grade of the `j`-th component, `r + 2j`.
    pub fn grade(&self, j: usize) -> usize {
        self.r + 2 * j
    }

    pub fn grades(&self) -> Vec<usize> {
        (self.p..=self.q).map(|j| self.grade(j)).collect()
    }

    /// `𝒫^{(r,p,q)}_k`.
    pub fn descriptor(&self, m: usize, k: i64) -> FormSpaceDescriptor {
        FormSpaceDescriptor::with_grades(m, k, self.grades().into_iter().map(|g| g as i64))
    }

    /// Every valid range for dimension `m`, in lexicographic `(r, p, q)` order.
    pub fn all(m: usize) -> Vec<GradeRange> {
        let mut out = Vec::new();
        for r in 0..=m {
            for q in 0..=(m - r) / 2 {
                for p in 0..=q {
                    out.push(GradeRange { r, p, q });
                }
            }
        }
        out.sort();
        out
    }
}

/// A tuple `(P^{r+2j+1}_{k−1})_{j=p..q−1}` of Hodge-de Rham solutions:
/// an element of `Im Φ` for `MT^{(r,p,q)}_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeTuple {
    pub m: usize,
    pub k: i64,
    pub range: GradeRange,
    pub components: Vec<PolyForm>,
}

impl HodgeTuple {
    pub fn zero(m: usize, k: i64, range: GradeRange) -> Self {
        Self {
            m,
            k,
            range,
            components: (range.p..range.q)
                .map(|_| PolyForm::zero(m, k - 1))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(PolyForm::is_zero)
    }

    pub fn to_json(&self) -> HodgeTupleJson {
        HodgeTupleJson {
            m: self.m,
            k: self.k,
            range: self.range,
            components: self.components.iter().map(PolyForm::to_json).collect(),
        }
    }

    pub fn from_json(json: &HodgeTupleJson) -> Result<Self> {
        json.range.validate(json.m)?;
        let expected = json.range.q - json.range.p;
        if json.components.len() != expected {
            return Err(Error::Parse(format!(
                "range ({}, {}, {}) needs {expected} components, got {}",
                json.range.r,
                json.range.p,
                json.range.q,
                json.components.len()
            )));
        }
        let components = json
            .components
            .iter()
            .map(PolyForm::from_json)
            .collect::<Result<Vec<_>>>()?;
        let t = Self {
            m: json.m,
            k: json.k,
            range: json.range,
            components,
        };
        t.check_shapes()?;
        Ok(t)
    }

    fn check_shapes(&self) -> Result<()> {
        self.range.validate(self.m)?;
        if self.components.len() != self.range.q - self.range.p {
            return Err(Error::ShapeMismatch(format!(
                "tuple has {} components for range {:?}",
                self.components.len(),
                self.range
            )));
        }
        for (idx, c) in self.components.iter().enumerate() {
            let grade = self.range.grade(self.range.p + idx) + 1;
            if c.m() != self.m
                || (!c.is_zero() && (c.k() != self.k - 1 || c.grades().iter().any(|&g| g != grade)))
            {
                return Err(Error::ShapeMismatch(format!(
                    "component {idx} must be a grade-{grade} form of homogeneity {}",
                    self.k - 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeTupleJson {
    pub m: usize,
    pub k: i64,
    pub range: GradeRange,
    pub components: Vec<PolyFormJson>,
}

/// `MT^{(r,p,q)}_k = Ker (d + d*)` on `𝒫^{(r,p,q)}_k`.
pub fn mt_space(m: usize, k: i64, range: &GradeRange) -> Result<Subspace> {
    kernel(&dirac_block_matrix(m, k, range)?)
}

/// `Σ_{j=p}^{q} d(k,m,r+2j) + Σ_{j=p}^{q−1} d(k−1,m,r+2j+1)`.
pub fn mt_dim_formula(k: i64, m: usize, range: &GradeRange) -> u128 {
    let even: u128 = (range.p..=range.q)
        .map(|j| hodge_dim_formula(k, m, range.grade(j) as i64))
        .sum();
    let odd: u128 = (range.p..range.q)
        .map(|j| hodge_dim_formula(k - 1, m, range.grade(j) as i64 + 1))
        .sum();
    even + odd
}

/// `c(k, m) = 2^{m−1} C(k+m−2, m−2)`, the dimension of even monogenic
/// polynomials of degree `k`.
pub fn c_formula(k: i64, m: usize) -> u128 {
    if k < 0 || m < 2 {
        return 0;
    }
    (1u128 << (m - 1)) * crate::exterior_poly::binomial(k + m as i64 - 2, m as i64 - 2)
}

fn single_grade_of(f: &PolyForm, s: usize) -> Result<()> {
    if let Some(&g) = f.grades().iter().find(|&&g| g != s) {
        return Err(Error::ShapeMismatch(format!(
            "expected a grade-{s} form, found grade {g}"
        )));
    }
    Ok(())
}

/// Which of the two primitive problems a [`PoincareSolver`] solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimitiveKind {
    /// closed `f` ↦ `Q` with `dQ = f`, `d*Q = 0`
    D,
    /// coclosed `f` ↦ `Q` with `d*Q = f`, `dQ = 0`
    DStar,
}

/// Minimal Fischer-norm primitive solver for one `(m, k, s)`, reusable
/// across right-hand sides.
#[derive(Clone, Debug)]
pub struct PoincareSolver {
    kind: PrimitiveKind,
    m: usize,
    k: i64,
    s: usize,
    test: OperatorMatrix,
    system: Solver,
}

impl PoincareSolver {
    /// Solver for closed `f ∈ 𝒫^s_k`, `s > 0`; primitives live in `𝒫^{s−1}_{k+1}`.
    pub fn d(m: usize, k: i64, s: usize) -> Result<Self> {
        if s == 0 || s > m {
            return Err(Error::Precondition(format!(
                "d-primitive needs 0 < s <= m, got s={s}, m={m}"
            )));
        }
        Ok(Self {
            kind: PrimitiveKind::D,
            m,
            k,
            s,
            test: d_matrix(m, k, s)?,
            system: Solver::new(&hodge_system_matrix(m, k + 1, s - 1)?)?,
        })
    }

    /// Solver for coclosed `f ∈ 𝒫^s_k`, `s < m`; primitives live in `𝒫^{s+1}_{k+1}`.
    pub fn dstar(m: usize, k: i64, s: usize) -> Result<Self> {
        if s >= m {
            return Err(Error::Precondition(format!(
                "d*-primitive needs s < m, got s={s}, m={m}"
            )));
        }
        Ok(Self {
            kind: PrimitiveKind::DStar,
            m,
            k,
            s,
            test: dstar_matrix(m, k, s)?,
            system: Solver::new(&hodge_system_matrix(m, k + 1, s + 1)?)?,
        })
    }

    pub fn kind(&self) -> PrimitiveKind {
        self.kind
    }

    pub fn primitive(&self, f: &PolyForm) -> Result<PolyForm> {
        if f.m() != self.m || (!f.is_zero() && f.k() != self.k) {
            return Err(Error::ShapeMismatch(format!(
                "form with (m,k)=({},{}) given to solver for ({},{})",
                f.m(),
                f.k(),
                self.m,
                self.k
            )));
        }
        single_grade_of(f, self.s)?;
        let f = f.clone().with_k(self.k);
        if !apply(&self.test, &f)?.is_zero() {
            return Err(match self.kind {
                PrimitiveKind::D => Error::NotClosed,
                PrimitiveKind::DStar => Error::NotCoclosed,
            });
        }
        let op = self.system.operator();
        // (d + d*)Q lands in grades {s−2, s} resp. {s, s+2}; `f` sits in grade s.
        let rhs = FormBasis::new(op.target()).coords(&f)?;
        let q = self.system.solve(&rhs)?.ok_or_else(|| {
            Error::Internal(format!(
                "no primitive found for a {} form",
                match self.kind {
                    PrimitiveKind::D => "closed",
                    PrimitiveKind::DStar => "coclosed",
                }
            ))
        })?;
        Ok(FormBasis::new(op.source()).form(&q))
    }
}

/// `Q ∈ 𝒫^{s−1}_{k+1}` with `dQ = f` and `d*Q = 0` for closed `f ∈ 𝒫^s_k`.
pub fn poincare_primitive_d(f: &PolyForm, s: usize) -> Result<PolyForm> {
    PoincareSolver::d(f.m(), f.k(), s)?.primitive(f)
}

/// `Q ∈ 𝒫^{s+1}_{k+1}` with `d*Q = f` and `dQ = 0` for coclosed `f ∈ 𝒫^s_k`.
pub fn poincare_primitive_dstar(f: &PolyForm, s: usize) -> Result<PolyForm> {
    PoincareSolver::dstar(f.m(), f.k(), s)?.primitive(f)
}

/// Builds `P ∈ MT^{(r,p,q)}_k` with `Φ(P) = t` for Hodge tuples `t`.
///
/// Component `j` is `P^{r+2j} = Q_d(t_j) + Q_{d*}(−t_{j−1})`, where `Q_d` and
/// `Q_{d*}` are the minimal-norm primitives and the out-of-range tuple
/// entries `t_{p−1}`, `t_q` are zero. Then `d*P^{r+2j} = −t_{j−1}` and
/// `dP^{r+2j} = t_j`, so `(d + d*)P = 0` and `Φ(P) = t`.
#[derive(Clone, Debug)]
pub struct Lifter {
    m: usize,
    k: i64,
    range: GradeRange,
    /// for `j = p..q−1`: primitive of `t_j` (grade `r+2j+1`) under `d`
    d_solvers: Vec<PoincareSolver>,
    /// for `j = p..q−1`: primitive of `−t_j` under `d*`
    dstar_solvers: Vec<PoincareSolver>,
    checks: Vec<(OperatorMatrix, OperatorMatrix)>,
    dirac: OperatorMatrix,
    phi: OperatorMatrix,
    /// `(d, d*)` on each grade `r+2j`, `j = p..q`
    kernel_checks: Vec<(OperatorMatrix, OperatorMatrix)>,
}

impl Lifter {
    pub fn new(m: usize, k: i64, range: &GradeRange) -> Result<Self> {
        range.validate(m)?;
        let mut d_solvers = Vec::new();
        let mut dstar_solvers = Vec::new();
        let mut checks = Vec::new();
        if k >= 1 {
            for j in range.p..range.q {
                let g = range.grade(j) + 1;
                d_solvers.push(PoincareSolver::d(m, k - 1, g)?);
                dstar_solvers.push(PoincareSolver::dstar(m, k - 1, g)?);
                checks.push((d_matrix(m, k - 1, g)?, dstar_matrix(m, k - 1, g)?));
            }
        }
        let kernel_checks = range
            .grades()
            .into_iter()
            .map(|g| Ok((d_matrix(m, k, g)?, dstar_matrix(m, k, g)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m,
            k,
            range: *range,
            d_solvers,
            dstar_solvers,
            checks,
            dirac: dirac_block_matrix(m, k, range)?,
            phi: gradewise_d(m, k, range)?,
            kernel_checks,
        })
    }

    pub fn range(&self) -> &GradeRange {
        &self.range
    }

    pub fn lift(&self, t: &HodgeTuple) -> Result<PolyForm> {
        if t.m != self.m || t.k != self.k || t.range != self.range {
            return Err(Error::ShapeMismatch(format!(
                "tuple for (m={}, k={}, {:?}) given to lifter for (m={}, k={}, {:?})",
                t.m, t.k, t.range, self.m, self.k, self.range
            )));
        }
        t.check_shapes()?;
        let mut out = PolyForm::zero(self.m, self.k);
        if self.k < 1 {
            if let Some(index) = t.components.iter().position(|c| !c.is_zero()) {
                return Err(Error::ComponentNotHodge { index });
            }
            return Ok(out);
        }
        for (index, (c, (d, ds))) in t.components.iter().zip(&self.checks).enumerate() {
            let c = c.clone().with_k(self.k - 1);
            if !apply(d, &c)?.is_zero() || !apply(ds, &c)?.is_zero() {
                return Err(Error::ComponentNotHodge { index });
            }
        }
        let minus_one = -crate::Rational::from_integer(1.into());
        for (idx, c) in t.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = c.clone().with_k(self.k - 1);
            // grade r+2j below t_j
            out = out.add(&self.d_solvers[idx].primitive(&c)?)?;
            // grade r+2j+2 above t_j
            out = out.add(&self.dstar_solvers[idx].primitive(&c.scale(&minus_one))?)?;
        }
        Ok(out)
    }
}

pub fn lift_hodge_tuple(t: &HodgeTuple) -> Result<PolyForm> {
    Lifter::new(t.m, t.k, &t.range)?.lift(t)
}

/// `Φ(f)`, split into the tuple components `dP^{r+2j}`, `j = p..q−1`.
pub fn phi_apply(f: &PolyForm, k: i64, range: &GradeRange) -> Result<HodgeTuple> {
    phi_apply_op(&gradewise_d(f.m(), k, range)?, f, k, range)
}

fn phi_apply_op(
    op: &OperatorMatrix,
    f: &PolyForm,
    k: i64,
    range: &GradeRange,
) -> Result<HodgeTuple> {
    let image = apply(op, &f.clone().with_k(k))?;
    Ok(HodgeTuple {
        m: f.m(),
        k,
        range: *range,
        components: (range.p..range.q)
            .map(|j| image.component(range.grade(j) + 1).with_k(k - 1))
            .collect(),
    })
}

impl Lifter {
    /// `Φ(f)` for `f` in this lifter's space.
    pub fn phi(&self, f: &PolyForm) -> Result<HodgeTuple> {
        phi_apply_op(&self.phi, f, self.k, &self.range)
    }

    /// Whether `f ∈ 𝒫^{(r,p,q)}_k` solves `(d + d*) f = 0`.
    pub fn is_solution(&self, f: &PolyForm) -> Result<bool> {
        Ok(apply(&self.dirac, &f.clone().with_k(self.k))?.is_zero())
    }
}

/// Result of [`phi_split`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiSplit {
    /// Components in `H^{r+2j}_k`, `j = p..q`.
    pub kernel_part: Vec<PolyForm>,
    /// `Φ(f)`.
    pub image_part: HodgeTuple,
    /// `lift(Φ(f))`, so that `f = Σ kernel_part + lifted`.
    pub lifted: PolyForm,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiSplitJson {
    pub kernel_part: Vec<PolyFormJson>,
    pub image_part: HodgeTupleJson,
}

impl PhiSplit {
    pub fn to_json(&self) -> PhiSplitJson {
        PhiSplitJson {
            kernel_part: self.kernel_part.iter().map(PolyForm::to_json).collect(),
            image_part: self.image_part.to_json(),
        }
    }
}

/// Splits `f ∈ MT^{(r,p,q)}_k` as `f = Σ kernel_part + lift(Φ f)`.
pub fn phi_split_with(lifter: &Lifter, f: &PolyForm) -> Result<PhiSplit> {
    let (m, k, range) = (lifter.m, lifter.k, lifter.range);
    if f.m() != m || (!f.is_zero() && f.k() != k) {
        return Err(Error::ShapeMismatch(format!(
            "form with (m,k)=({},{}) for MT space (m={m}, k={k})",
            f.m(),
            f.k()
        )));
    }
    let grades = range.grades();
    if f.grades().iter().any(|g| !grades.contains(g)) {
        return Err(Error::NotInMT);
    }
    let f = f.clone().with_k(k);
    if !lifter.is_solution(&f)? {
        return Err(Error::NotInMT);
    }
    let image_part = lifter.phi(&f)?;
    let lifted = lifter.lift(&image_part)?;
    let rest = f.sub(&lifted)?;
    let kernel_part: Vec<PolyForm> = grades.iter().map(|&g| rest.component(g)).collect();
    for ((part, &g), (d, ds)) in kernel_part.iter().zip(&grades).zip(&lifter.kernel_checks) {
        let closed = apply(d, part)?.is_zero();
        let coclosed = apply(ds, part)?.is_zero();
        if !closed || !coclosed {
            return Err(Error::Internal(format!(
                "kernel part in grade {g} is not Hodge"
            )));
        }
    }
    Ok(PhiSplit {
        kernel_part,
        image_part,
        lifted,
    })
}

pub fn phi_split(f: &PolyForm, range: &GradeRange) -> Result<PhiSplit> {
    let lifter = Lifter::new(f.m(), f.k(), range)?;
    phi_split_with(&lifter, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::phi_matrix;

    fn q(n: i64) -> crate::Rational {
        crate::Rational::from_integer(n.into())
    }

    fn form(m: usize, terms: &[(&[u32], &[usize], i64)]) -> PolyForm {
        let mut f = PolyForm::zero(m, terms[0].0.iter().map(|&e| e as i64).sum());
        for (e, b, c) in terms {
            f = f.add(&PolyForm::term(m, e, b, q(*c)).unwrap()).unwrap();
        }
        f
    }

    #[test]
    fn ranges_validate() {
        assert!(GradeRange::new(4, 0, 0, 2).is_ok());
        assert!(GradeRange::new(4, 1, 0, 2).is_err());
        assert!(GradeRange::new(4, 0, 2, 1).is_err());
        assert_eq!(GradeRange { r: 1, p: 1, q: 2 }.grades(), vec![3, 5]);
        assert!(GradeRange::all(3).iter().all(|g| g.validate(3).is_ok()));
    }

    #[test]
    fn mt_dimensions() {
        let g = GradeRange::new(4, 0, 0, 2).unwrap();
        assert_eq!(mt_space(4, 0, &g).unwrap().dim(), 8);
        assert_eq!(mt_space(4, 1, &g).unwrap().dim(), 24);
        assert_eq!(mt_dim_formula(1, 4, &g), 24);
        let h1 = GradeRange::new(3, 1, 0, 0).unwrap();
        for k in 0..4 {
            assert_eq!(mt_space(3, k, &h1).unwrap().dim() as i64, 2 * k + 3);
        }
        assert_eq!(c_formula(1, 4), 24);
        assert_eq!(c_formula(0, 5), 16);
        assert_eq!(c_formula(7, 2), 2);
    }

    #[test]
    fn primitives_small_cases() {
        let dx1 = form(3, &[(&[0, 0, 0], &[1], 1)]);
        assert_eq!(
            poincare_primitive_d(&dx1, 1).unwrap(),
            form(3, &[(&[1, 0, 0], &[], 1)])
        );

        let f = form(2, &[(&[0, 0], &[1, 2], 2)]);
        let qf = poincare_primitive_d(&f, 2).unwrap();
        assert_eq!(apply(&d_matrix(2, 1, 1).unwrap(), &qf).unwrap(), f);
        assert!(apply(&dstar_matrix(2, 1, 1).unwrap(), &qf)
            .unwrap()
            .is_zero());

        let not_closed = form(2, &[(&[1, 0], &[2], 1)]);
        assert_eq!(poincare_primitive_d(&not_closed, 1), Err(Error::NotClosed));

        let one = form(3, &[(&[0, 0, 0], &[], 1)]);
        let qo = poincare_primitive_dstar(&one, 0).unwrap();
        let expect = form(
            3,
            &[
                (&[1, 0, 0], &[1], 1),
                (&[0, 1, 0], &[2], 1),
                (&[0, 0, 1], &[3], 1),
            ],
        )
        .scale(&crate::Rational::new(1.into(), 3.into()));
        assert_eq!(qo, expect);
        assert!(poincare_primitive_dstar(&PolyForm::zero(3, 0), 1)
            .unwrap()
            .is_zero());
        let top = form(3, &[(&[1, 0, 0], &[1, 2, 3], 1)]);
        assert!(matches!(
            poincare_primitive_dstar(&top, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lift_hand_example() {
        let range = GradeRange::new(3, 0, 0, 1).unwrap();
        let t = HodgeTuple {
            m: 3,
            k: 1,
            range,
            components: vec![form(3, &[(&[0, 0, 0], &[1], 1)])],
        };
        let p = lift_hodge_tuple(&t).unwrap();
        assert!(apply(&dirac_block_matrix(3, 1, &range).unwrap(), &p)
            .unwrap()
            .is_zero());
        assert_eq!(phi_apply(&p, 1, &range).unwrap(), t);
        assert!(lift_hodge_tuple(&HodgeTuple::zero(3, 1, range))
            .unwrap()
            .is_zero());

        let bad = HodgeTuple {
            components: vec![form(3, &[(&[0, 0, 0], &[1], 1)]).multiply_by_r2().with_k(2)],
            k: 3,
            ..t.clone()
        };
        assert!(matches!(
            lift_hodge_tuple(&bad),
            Err(Error::ComponentNotHodge { index: 0 })
        ));
    }

    #[test]
    fn split_hand_example() {
        let range = GradeRange::new(3, 0, 0, 1).unwrap();
        let f = form(3, &[(&[1, 0, 0], &[], 1)])
            .add(&form(3, &[(&[0, 1, 0], &[1, 2], 1)]))
            .unwrap();
        let split = phi_split(&f, &range).unwrap();
        assert_eq!(
            split.image_part.components,
            vec![form(3, &[(&[0, 0, 0], &[1], 1)])]
        );
        let mut re = lift_hodge_tuple(&split.image_part).unwrap();
        for part in &split.kernel_part {
            re = re.add(part).unwrap();
        }
        assert_eq!(re, f);
        let not_mt = form(3, &[(&[1, 0, 0], &[], 1)]);
        assert_eq!(phi_split(&not_mt, &range), Err(Error::NotInMT));
    }

    #[test]
    fn phi_dimensions_small() {
        let range = GradeRange::new(3, 0, 0, 1).unwrap();
        let mt = mt_space(3, 1, &range).unwrap();
        let phi = phi_matrix(3, 1, &range, &mt).unwrap();
        assert_eq!(phi.image().unwrap().dim(), 3);
        assert_eq!(phi.kernel().unwrap().dim(), 5);
        let single = GradeRange::new(3, 1, 0, 0).unwrap();
        let mt1 = mt_space(3, 2, &single).unwrap();
        assert_eq!(
            phi_matrix(3, 2, &single, &mt1)
                .unwrap()
                .image()
                .unwrap()
                .dim(),
            0
        );
    }
}
