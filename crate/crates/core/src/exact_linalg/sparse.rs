use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::Rational;

/// Sparse coordinate vector: strictly increasing indices, no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from unordered entries, summing duplicates.
    pub fn from_entries<I: IntoIterator<Item = (usize, Rational)>>(entries: I) -> Self {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, v) in entries {
            *acc.entry(i).or_insert_with(Rational::zero) += v;
        }
        Self {
            entries: acc.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    /// Caller guarantees sorted, distinct, nonzero entries.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(usize, Rational)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|(_, v)| !v.is_zero()));
        Self { entries }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn unit(index: usize) -> Self {
        Self {
            entries: vec![(index, Rational::one())],
        }
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, Rational)> {
        self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Rational)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leading(&self) -> Option<usize> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn get(&self, index: usize) -> Option<&Rational> {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .ok()
            .map(|pos| &self.entries[pos].1)
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::new();
        }
        Self {
            entries: self.entries.iter().map(|(i, v)| (*i, v * factor)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|(i, v)| (*i, -v)).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: &Rational, other: &SparseVec) -> Self {
        if factor.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some((ia, va)), Some((ib, vb))) => {
                    if ia < ib {
                        out.push((*ia, va.clone()));
                        a.next();
                    } else if ib < ia {
                        out.push((*ib, vb * factor));
                        b.next();
                    } else {
                        let v = va + vb * factor;
                        if !v.is_zero() {
                            out.push((*ia, v));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((ia, va)), None) => {
                    out.push((*ia, va.clone()));
                    a.next();
                }
                (None, Some((ib, vb))) => {
                    out.push((*ib, vb * factor));
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> Self {
        self.add_scaled(&Rational::one(), other)
    }

    pub fn sub(&self, other: &SparseVec) -> Self {
        self.add_scaled(&-Rational::one(), other)
    }

    /// Euclidean (coordinate) dot product.
    pub fn dot(&self, other: &SparseVec) -> Rational {
        self.weighted_dot(other, |_| None)
    }

    /// Dot product with a diagonal integer weight per coordinate.
    pub fn dot_with_weights(&self, other: &SparseVec, weights: &[BigInt]) -> Rational {
        self.weighted_dot(other, |i| Some(&weights[i]))
    }

    fn weighted_dot<'w>(
        &self,
        other: &SparseVec,
        weight: impl Fn(usize) -> Option<&'w BigInt>,
    ) -> Rational {
        let mut acc = Rational::zero();
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        while let (Some((ia, va)), Some((ib, vb))) = (a.peek(), b.peek()) {
            if ia < ib {
                a.next();
            } else if ib < ia {
                b.next();
            } else {
                let mut term = va * vb;
                if let Some(w) = weight(*ia) {
                    term *= Rational::from_integer(w.clone());
                }
                acc += term;
                a.next();
                b.next();
            }
        }
        acc
    }

    pub(crate) fn map_indices(&self, f: impl Fn(usize) -> usize) -> Self {
        Self::from_entries(self.entries.iter().map(|(i, v)| (f(*i), v.clone())))
    }
}

/// Column-major sparse rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            cols: vec![SparseVec::new(); ncols],
        }
    }

    pub fn from_columns(nrows: usize, cols: Vec<SparseVec>) -> Self {
        debug_assert!(cols.iter().all(|c| c.max_index().is_none_or(|i| i < nrows)));
        Self { nrows, cols }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            cols: (0..n).map(SparseVec::unit).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(SparseVec::nnz).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(SparseVec::is_zero)
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.cols[col]
            .get(row)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.iter().map(move |(i, v)| (*i, j, v)))
    }

    pub fn rows(&self) -> Vec<SparseVec> {
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, v) in col.iter() {
                rows[*i].push((j, v.clone()));
            }
        }
        rows.into_iter()
            .map(SparseVec::from_sorted_unchecked)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            nrows: self.ncols(),
            cols: self.rows(),
        }
    }

    pub fn mul_vec(&self, x: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (j, xj) in x.iter() {
            for (i, a) in self.cols[*j].iter() {
                *acc.entry(*i).or_insert_with(Rational::zero) += a * xj;
            }
        }
        SparseVec::from_sorted_unchecked(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), rhs.nrows, "matmul shape mismatch");
        SparseMatrix {
            nrows: self.nrows,
            cols: rhs.cols.iter().map(|c| self.mul_vec(c)).collect(),
        }
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(
            (self.nrows, self.ncols()),
            (rhs.nrows, rhs.ncols()),
            "add shape mismatch"
        );
        SparseMatrix {
            nrows: self.nrows,
            cols: self
                .cols
                .iter()
                .zip(&rhs.cols)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> SparseMatrix {
        SparseMatrix {
            nrows: self.nrows,
            cols: self.cols.iter().map(|c| c.scale(factor)).collect(),
        }
    }

    /// Stacks `blocks` vertically; all blocks must have the same column count.
    pub fn vstack(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let ncols = blocks.first().map_or(0, |b| b.ncols());
        assert!(
            blocks.iter().all(|b| b.ncols() == ncols),
            "vstack column mismatch"
        );
        let mut cols = vec![Vec::new(); ncols];
        let mut offset = 0;
        for b in blocks {
            for (j, col) in b.cols.iter().enumerate() {
                cols[j].extend(col.iter().map(|(i, v)| (i + offset, v.clone())));
            }
            offset += b.nrows;
        }
        SparseMatrix {
            nrows: offset,
            cols: cols
                .into_iter()
                .map(SparseVec::from_sorted_unchecked)
                .collect(),
        }
    }
}
