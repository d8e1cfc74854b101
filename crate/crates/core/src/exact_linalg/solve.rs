use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::elim::{Echelon, RowOp};
use super::{check_cap, Rational, SparseVec};
use crate::error::{Error, Result};
use crate::exterior_poly::FormBasis;
use crate::operators::OperatorMatrix;

/// Minimal Fischer-norm solver for `A x = b`.
///
/// With `W` the diagonal Fischer Gram matrix of the source basis, the
/// solution orthogonal to `Ker A` has the form `x = W⁻¹ Aᵀ y` where
/// `A W⁻¹ Aᵀ y = b`. The normal matrix is sparse and factored once, so
/// repeated solves against the same operator only replay the recorded row
/// operations. Any `y` yields the same `x`, which makes the map `b ↦ x`
/// linear.
#[derive(Clone, Debug)]
pub struct Solver {
    op: OperatorMatrix,
    weights: Vec<BigInt>,
    factor: Echelon,
}

impl Solver {
    pub fn new(op: &OperatorMatrix) -> Result<Self> {
        check_cap(op.source().dim())?;
        check_cap(op.target().dim())?;
        let weights = FormBasis::new(op.source()).fischer_weights();
        let n = op.target().dim();
        let mut normal: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); n];
        for (c, col) in op.matrix().columns().iter().enumerate() {
            let w = Rational::from_integer(weights[c].clone());
            for (i, a) in col.iter() {
                let scaled = a / &w;
                for (j, b) in col.iter() {
                    *normal[*i].entry(*j).or_insert_with(Rational::zero) += &scaled * b;
                }
            }
        }
        let rows: Vec<SparseVec> = normal.into_iter().map(SparseVec::from_entries).collect();
        Ok(Self {
            op: op.clone(),
            weights,
            factor: Echelon::new(&rows, true),
        })
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.op
    }

    /// The minimal-norm solution, or `None` when `b` is not in the image.
    pub fn solve(&self, b: &SparseVec) -> Result<Option<SparseVec>> {
        let n = self.op.target().dim();
        if b.max_index().is_some_and(|i| i >= n) {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side has index {} but target dimension is {n}",
                b.max_index().unwrap_or_default()
            )));
        }
        let mut rhs = b.to_dense(n);
        for op in &self.factor.log {
            match op {
                RowOp::Scale { row, factor } => {
                    if !rhs[*row].is_zero() {
                        rhs[*row] *= factor;
                    }
                }
                RowOp::Combine {
                    target,
                    pivot,
                    a,
                    b,
                    g,
                } => {
                    // right-hand sides are sparse; most replayed steps touch zeros
                    let t_zero = rhs[*target].is_zero();
                    if rhs[*pivot].is_zero() {
                        if !t_zero {
                            rhs[*target] *= Rational::new(a.clone(), g.clone());
                        }
                        continue;
                    }
                    let from_pivot = &rhs[*pivot] * Rational::new(b.clone(), g.clone());
                    rhs[*target] = if t_zero {
                        -from_pivot
                    } else {
                        &rhs[*target] * Rational::new(a.clone(), g.clone()) - from_pivot
                    };
                }
            }
        }
        if self.factor.zero_rows.iter().any(|&r| !rhs[r].is_zero()) {
            return Ok(None);
        }
        let mut y = vec![Rational::zero(); n];
        for (col, id, row) in self.factor.pivots.iter().rev() {
            let mut acc = rhs[*id].clone();
            for (c, v) in &row[1..] {
                if !y[*c].is_zero() {
                    acc -= Rational::from_integer(v.clone()) * &y[*c];
                }
            }
            y[*col] = acc / Rational::from_integer(row[0].1.clone());
        }
        let x: Vec<(usize, Rational)> = self
            .op
            .matrix()
            .columns()
            .iter()
            .enumerate()
            .filter_map(|(c, col)| {
                let mut s = Rational::zero();
                for (i, a) in col.iter() {
                    if !y[*i].is_zero() {
                        s += a * &y[*i];
                    }
                }
                (!s.is_zero()).then(|| (c, s / Rational::from_integer(self.weights[c].clone())))
            })
            .collect();
        let x = SparseVec::from_sorted_unchecked(x);
        if self.op.matrix().mul_vec(&x) != *b {
            return Err(Error::Internal(
                "normal-equation solution does not solve the system".into(),
            ));
        }
        Ok(Some(x))
    }
}

/// One-shot minimal Fischer-norm solve of `op · x = target`.
pub fn solve(op: &OperatorMatrix, target: &SparseVec) -> Result<Option<SparseVec>> {
    Solver::new(op)?.solve(target)
}
