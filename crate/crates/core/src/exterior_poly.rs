//! Monomials, blades and polynomial differential forms.
//!
//! The ambient basis of a form space is ordered blade-major: blades by
//! ascending grade and lexicographically within a grade, then monomials in
//! descending lexicographic order of their exponent vectors. Matrix layouts
//! and every JSON export follow this order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{Rational, SparseVec};

/// Largest supported dimension; blades are stored as bit masks.
pub const MAX_DIMENSION: usize = 32;

/// Exponent vector of a monomial `x^α`.
///
/// `Ord` is the canonical basis order, i.e. *descending* lexicographic on
/// the exponents: `x1²` sorts before `x1 x2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn zero(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    /// `α! = Π αᵢ!`
    pub fn factorial(&self) -> BigInt {
        let mut out = BigInt::one();
        for &e in &self.0 {
            for f in 2..=e {
                out *= f;
            }
        }
        out
    }

    /// `x^α / x_i`, with the exponent that was removed; `None` if `αᵢ = 0`.
    /// `i` is 1-based.
    pub fn lower(&self, i: usize) -> Option<(u32, MultiIndex)> {
        let e = self.0[i - 1];
        (e > 0).then(|| {
            let mut exps = self.0.clone();
            exps[i - 1] -= 1;
            (e, MultiIndex(exps))
        })
    }

    /// `x_i · x^α` (1-based).
    pub fn raise(&self, i: usize) -> MultiIndex {
        let mut exps = self.0.clone();
        exps[i - 1] += 1;
        MultiIndex(exps)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A basis s-vector `dx_{i1} ∧ … ∧ dx_{is}`, stored as a bit set of 1-based
/// indices. Ordered by grade, then lexicographically by index list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Blade(u32);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    /// Builds a blade from strictly increasing 1-based indices.
    pub fn new(indices: &[usize], m: usize) -> Result<Self> {
        let mut mask = 0u32;
        let mut prev = 0;
        for &i in indices {
            if i == 0 || i > m {
                return Err(Error::IndexOutOfRange { index: i, m });
            }
            if i <= prev {
                return Err(Error::InvalidDescriptor(format!(
                    "blade indices must be strictly increasing: {indices:?}"
                )));
            }
            prev = i;
            mask |= 1 << (i - 1);
        }
        Ok(Self(mask))
    }

    pub fn from_mask(mask: u32) -> Self {
        Self(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32)
            .filter(|b| self.0 & (1 << b) != 0)
            .map(|b| b + 1)
            .collect()
    }

    /// Number of elements of the blade strictly below `i`.
    fn count_below(self, i: usize) -> u32 {
        (self.0 & ((1u32 << (i - 1)) - 1)).count_ones()
    }

    /// Complement within `{1..m}`.
    pub fn complement(self, m: usize) -> Blade {
        let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        Blade(!self.0 & full)
    }
}

impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        self.grade().cmp(&other.grade()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 & (diff & diff.wrapping_neg()) != 0 {
                // the smallest differing index belongs to self
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        write!(f, "dx")?;
        for i in self.indices() {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut out = 1u128;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// All exponent vectors of total degree `k` in `m` variables, in canonical
/// (descending lexicographic) order. Empty for negative `k`.
pub fn enumerate_monomials(m: usize, k: i64) -> Vec<MultiIndex> {
    fn rec(m: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == m {
            prefix.push(left);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(m, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k < 0 || m == 0 {
        return out;
    }
    rec(m, k as u32, &mut Vec::with_capacity(m), &mut out);
    out
}

/// All blades of grade `s` in dimension `m`, lexicographically ordered.
pub fn enumerate_blades(m: usize, s: i64) -> Vec<Blade> {
    fn rec(start: usize, m: usize, left: usize, mask: u32, out: &mut Vec<Blade>) {
        if left == 0 {
            out.push(Blade(mask));
            return;
        }
        for i in start..=m {
            if m - i + 1 < left {
                break;
            }
            rec(i + 1, m, left - 1, mask | (1 << (i - 1)), out);
        }
    }
    let mut out = Vec::new();
    if s < 0 || s as usize > m {
        return out;
    }
    rec(1, m, s as usize, 0, &mut out);
    out
}

fn check_index(i: usize, m: usize) -> Result<()> {
    if i == 0 || i > m {
        Err(Error::IndexOutOfRange { index: i, m })
    } else {
        Ok(())
    }
}

/// `dx_i ∧ dx_I = sign · dx_{I ∪ {i}}`; `None` when `i ∈ I`.
pub fn wedge_step(m: usize, i: usize, b: Blade) -> Result<Option<(i8, Blade)>> {
    check_index(i, m)?;
    Ok(wedge_unchecked(i, b))
}

/// Interior product with `e_i`: `ι_i dx_I = sign · dx_{I \ {i}}`; `None`
/// when `i ∉ I`.
pub fn contract_step(m: usize, i: usize, b: Blade) -> Result<Option<(i8, Blade)>> {
    check_index(i, m)?;
    Ok(contract_unchecked(i, b))
}

pub(crate) fn wedge_unchecked(i: usize, b: Blade) -> Option<(i8, Blade)> {
    if b.contains(i) {
        return None;
    }
    let sign = if b.count_below(i).is_multiple_of(2) {
        1
    } else {
        -1
    };
    Some((sign, Blade(b.0 | (1 << (i - 1)))))
}

pub(crate) fn contract_unchecked(i: usize, b: Blade) -> Option<(i8, Blade)> {
    if !b.contains(i) {
        return None;
    }
    let sign = if b.count_below(i).is_multiple_of(2) {
        1
    } else {
        -1
    };
    Some((sign, Blade(b.0 & !(1 << (i - 1)))))
}

/// Sign of the permutation `(I, I^c)` of `(1, …, m)`.
pub(crate) fn star_sign(b: Blade, m: usize) -> i8 {
    let comp = b.complement(m);
    // inversions: pairs (i ∈ I, j ∈ I^c) with j < i
    let inversions: u32 = b.indices().iter().map(|&i| comp.count_below(i)).sum();
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `m`, homogeneity `k` and the grades spanned by a form space.
///
/// Grades are ascending and lie in `[0, m]`; a negative `k` denotes the zero
/// space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormSpaceDescriptor {
    pub m: usize,
    pub k: i64,
    pub grades: Vec<usize>,
}

impl FormSpaceDescriptor {
    /// `𝒫^s_k`.
    pub fn single(m: usize, k: i64, s: usize) -> Result<Self> {
        let d = Self {
            m,
            k,
            grades: vec![s],
        };
        d.validate()?;
        Ok(d)
    }

    /// Space spanned by the given grades; grades outside `[0, m]` are dropped.
    pub fn with_grades<I: IntoIterator<Item = i64>>(m: usize, k: i64, grades: I) -> Self {
        let set: BTreeSet<usize> = grades
            .into_iter()
            .filter(|&g| g >= 0 && g as usize <= m)
            .map(|g| g as usize)
            .collect();
        Self {
            m,
            k,
            grades: set.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_DIMENSION {
            return Err(Error::InvalidDescriptor(format!(
                "dimension m={} must lie in 1..={MAX_DIMENSION}",
                self.m
            )));
        }
        if let Some(&g) = self.grades.iter().find(|&&g| g > self.m) {
            return Err(Error::InvalidDescriptor(format!(
                "grade {g} exceeds m={}",
                self.m
            )));
        }
        if self.grades.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDescriptor(format!(
                "grades must be strictly increasing: {:?}",
                self.grades
            )));
        }
        Ok(())
    }

    pub fn monomial_count(&self) -> usize {
        if self.k < 0 {
            0
        } else {
            binomial(self.k + self.m as i64 - 1, self.m as i64 - 1) as usize
        }
    }

    pub fn blade_count(&self) -> usize {
        self.grades
            .iter()
            .map(|&s| binomial(self.m as i64, s as i64) as usize)
            .sum()
    }

    pub fn dim(&self) -> usize {
        self.monomial_count() * self.blade_count()
    }

    pub fn is_single_grade(&self) -> bool {
        self.grades.len() == 1
    }
}

impl fmt::Display for FormSpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P(m={}, k={}, grades={:?})", self.m, self.k, self.grades)
    }
}

/// Enumerated canonical basis of a form space with index lookups.
#[derive(Clone, Debug)]
pub struct FormBasis {
    desc: FormSpaceDescriptor,
    blades: Vec<Blade>,
    blade_pos: HashMap<u32, usize>,
    monomials: Vec<MultiIndex>,
    monomial_pos: HashMap<MultiIndex, usize>,
}

impl FormBasis {
    pub fn new(desc: &FormSpaceDescriptor) -> Self {
        let blades: Vec<Blade> = desc
            .grades
            .iter()
            .flat_map(|&s| enumerate_blades(desc.m, s as i64))
            .collect();
        let monomials = enumerate_monomials(desc.m, desc.k);
        Self {
            desc: desc.clone(),
            blade_pos: blades.iter().enumerate().map(|(i, b)| (b.0, i)).collect(),
            monomial_pos: monomials
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), i))
                .collect(),
            blades,
            monomials,
        }
    }

    pub fn descriptor(&self) -> &FormSpaceDescriptor {
        &self.desc
    }

    pub fn dim(&self) -> usize {
        self.blades.len() * self.monomials.len()
    }

    pub fn blades(&self) -> &[Blade] {
        &self.blades
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn element(&self, index: usize) -> (Blade, &MultiIndex) {
        let n = self.monomials.len();
        (self.blades[index / n], &self.monomials[index % n])
    }

    pub fn index_of(&self, blade: Blade, mono: &MultiIndex) -> Option<usize> {
        let b = self.blade_pos.get(&blade.0)?;
        let a = self.monomial_pos.get(mono)?;
        Some(b * self.monomials.len() + a)
    }

    /// Fischer norms `α!` of the basis elements.
    pub fn fischer_weights(&self) -> Vec<BigInt> {
        let per_mono: Vec<BigInt> = self.monomials.iter().map(MultiIndex::factorial).collect();
        (0..self.blades.len())
            .flat_map(|_| per_mono.iter().cloned())
            .collect()
    }

    /// Coordinates of `f` in this basis.
    pub fn coords(&self, f: &PolyForm) -> Result<SparseVec> {
        if f.is_zero() && f.m == self.desc.m {
            return Ok(SparseVec::new());
        }
        if f.m != self.desc.m || f.k != self.desc.k {
            return Err(Error::ShapeMismatch(format!(
                "form has (m={}, k={}) but space is {}",
                f.m, f.k, self.desc
            )));
        }
        let mut entries = Vec::with_capacity(f.terms.len());
        for ((blade, mono), c) in &f.terms {
            let idx = self.index_of(*blade, mono).ok_or_else(|| {
                Error::ShapeMismatch(format!("grade {} not in {}", blade.grade(), self.desc))
            })?;
            entries.push((idx, c.clone()));
        }
        Ok(SparseVec::from_entries(entries))
    }

    pub fn form(&self, v: &SparseVec) -> PolyForm {
        let mut f = PolyForm::zero(self.desc.m, self.desc.k);
        for (i, c) in v.iter() {
            let (b, a) = self.element(*i);
            f.terms.insert((b, a.clone()), c.clone());
        }
        f
    }
}

/// A homogeneous polynomial differential form `Σ c · x^α dx_I`.
///
/// Terms are keyed by `(blade, monomial)`, whose ordering is the canonical
/// basis order; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyForm {
    m: usize,
    k: i64,
    terms: BTreeMap<(Blade, MultiIndex), Rational>,
}

impl PolyForm {
    pub fn zero(m: usize, k: i64) -> Self {
        Self {
            m,
            k,
            terms: BTreeMap::new(),
        }
    }

    /// Single term `coeff · x^exps dx_blade`.
    pub fn term(m: usize, exps: &[u32], blade: &[usize], coeff: Rational) -> Result<Self> {
        if exps.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "exponent vector has length {} but m={m}",
                exps.len()
            )));
        }
        let mono = MultiIndex::new(exps.to_vec());
        let mut f = Self::zero(m, mono.degree());
        f.add_term(Blade::new(blade, m)?, mono, coeff)?;
        Ok(f)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &MultiIndex, &Rational)> {
        self.terms.iter().map(|((b, a), c)| (*b, a, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn grades(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|(b, _)| b.grade()).collect()
    }

    pub fn coefficient(&self, blade: Blade, mono: &MultiIndex) -> Rational {
        self.terms
            .get(&(blade, mono.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, blade: Blade, mono: MultiIndex, coeff: Rational) -> Result<()> {
        if mono.dim() != self.m || mono.degree() != self.k {
            return Err(Error::ShapeMismatch(format!(
                "monomial {:?} does not have m={} and degree {}",
                mono.exps(),
                self.m,
                self.k
            )));
        }
        if blade.mask() >> self.m != 0 {
            return Err(Error::ShapeMismatch(format!(
                "blade {blade} exceeds m={}",
                self.m
            )));
        }
        let key = (blade, mono);
        let v = self.terms.remove(&key).unwrap_or_else(Rational::zero) + coeff;
        if !v.is_zero() {
            self.terms.insert(key, v);
        }
        Ok(())
    }

    /// Component of grade `s`.
    pub fn component(&self, s: usize) -> PolyForm {
        PolyForm {
            m: self.m,
            k: self.k,
            terms: self
                .terms
                .iter()
                .filter(|((b, _), _)| b.grade() == s)
                .map(|(key, c)| (key.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> PolyForm {
        if factor.is_zero() {
            return PolyForm::zero(self.m, self.k);
        }
        PolyForm {
            m: self.m,
            k: self.k,
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (key.clone(), c * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &PolyForm) -> Result<PolyForm> {
        if self.is_zero() && self.m == other.m {
            return Ok(other.clone());
        }
        if other.is_zero() && self.m == other.m {
            return Ok(self.clone());
        }
        if self.m != other.m || self.k != other.k {
            return Err(Error::ShapeMismatch(format!(
                "cannot add forms with (m,k)=({},{}) and ({},{})",
                self.m, self.k, other.m, other.k
            )));
        }
        let mut out = self.clone();
        for (key, c) in &other.terms {
            let v = out.terms.remove(key).unwrap_or_else(Rational::zero) + c;
            if !v.is_zero() {
                out.terms.insert(key.clone(), v);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyForm) -> Result<PolyForm> {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Re-labels the homogeneity of a zero form.
    pub(crate) fn with_k(mut self, k: i64) -> PolyForm {
        debug_assert!(self.is_zero() || self.k == k);
        self.k = k;
        self
    }

    /// Hodge star on a single-grade form: `dx_I ↦ sign(I, I^c) dx_{I^c}`.
    pub fn hodge_star(&self) -> Result<PolyForm> {
        let grades = self.grades();
        if grades.len() > 1 {
            return Err(Error::MixedGrade(grades.into_iter().collect()));
        }
        let terms = self
            .terms
            .iter()
            .map(|((b, a), c)| {
                let sign = Rational::from_integer(star_sign(*b, self.m).into());
                ((b.complement(self.m), a.clone()), c * sign)
            })
            .collect();
        Ok(PolyForm {
            m: self.m,
            k: self.k,
            terms,
        })
    }

    /// `(x_1² + … + x_m²) · f`.
    pub fn multiply_by_r2(&self) -> PolyForm {
        let mut out = PolyForm::zero(self.m, self.k + 2);
        for ((b, a), c) in &self.terms {
            for i in 1..=self.m {
                let key = (*b, a.raise(i).raise(i));
                let v = out.terms.remove(&key).unwrap_or_else(Rational::zero) + c;
                if !v.is_zero() {
                    out.terms.insert(key, v);
                }
            }
        }
        out
    }

    /// Fischer inner product `⟨x^α dx_I, x^β dx_J⟩ = δ_{αβ} δ_{IJ} α!`.
    pub fn fischer_inner(&self, other: &PolyForm) -> Result<Rational> {
        if self.m != other.m || (self.k != other.k && !self.is_zero() && !other.is_zero()) {
            return Err(Error::ShapeMismatch(format!(
                "Fischer product of forms with (m,k)=({},{}) and ({},{})",
                self.m, self.k, other.m, other.k
            )));
        }
        let mut acc = Rational::zero();
        for (key, c) in &self.terms {
            if let Some(d) = other.terms.get(key) {
                acc += c * d * Rational::from_integer(key.1.factorial());
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> PolyFormJson {
        PolyFormJson {
            m: self.m,
            k: self.k,
            terms: self
                .terms
                .iter()
                .map(|((b, a), c)| TermJson {
                    coeff: c.to_string(),
                    exps: a.exps().to_vec(),
                    blade: b.indices(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyFormJson) -> Result<Self> {
        if json.m == 0 || json.m > MAX_DIMENSION {
            return Err(Error::Parse(format!("m={} out of range", json.m)));
        }
        if json.k < 0 && !json.terms.is_empty() {
            return Err(Error::Parse(format!("negative homogeneity k={}", json.k)));
        }
        let mut f = PolyForm::zero(json.m, json.k);
        for t in &json.terms {
            if t.exps.len() != json.m {
                return Err(Error::Parse(format!(
                    "term exponent vector {:?} has length != m={}",
                    t.exps, json.m
                )));
            }
            let blade = Blade::new(&t.blade, json.m).map_err(|e| Error::Parse(e.to_string()))?;
            let coeff = parse_rational(&t.coeff)?;
            f.add_term(blade, MultiIndex::new(t.exps.clone()), coeff)
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(f)
    }
}

impl fmt::Display for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, ((b, a), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (i, &e) in a.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " x{}", i + 1)?,
                    _ => write!(f, " x{}^{e}", i + 1)?,
                }
            }
            if b.grade() > 0 {
                write!(f, " {b}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub exps: Vec<u32>,
    pub blade: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFormJson {
    pub m: usize,
    pub k: i64,
    pub terms: Vec<TermJson>,
}

/// Parses `"n"` or `"n/d"` into a rational in lowest terms.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        None => s
            .parse::<BigInt>()
            .map(Rational::from_integer)
            .map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}
