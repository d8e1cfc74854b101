//! Fraction-free sparse row elimination over the integers.
//!
//! Rational rows are scaled to primitive integer rows. Eliminating the
//! leading entry of a row `t` with pivot row `p` replaces `t` by
//! `(a·t − b·p) / g`, where `a`, `b` are the two leading coefficients
//! divided by their gcd and `g` is the content of the result. Rows stay
//! primitive, which keeps coefficient growth in check without ever forming
//! fractions. Columns are processed in increasing order; among the rows
//! sharing a leading column the sparsest one is chosen as pivot.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Rational, SparseVec};

pub(crate) type IntRow = Vec<(usize, BigInt)>;

/// One recorded row operation, replayable on a right-hand side.
#[derive(Clone, Debug)]
pub(crate) enum RowOp {
    /// `row ← factor · row`
    Scale { row: usize, factor: Rational },
    /// `target ← (a · target − b · pivot) / g`
    Combine {
        target: usize,
        pivot: usize,
        a: BigInt,
        b: BigInt,
        g: BigInt,
    },
}

fn content(row: &IntRow) -> BigInt {
    let mut g = BigInt::zero();
    for (_, v) in row {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Converts a rational row to a primitive integer row with positive leading
/// coefficient. Returns the row and the factor `λ` with `int_row = λ · row`.
pub(crate) fn to_primitive(row: &SparseVec) -> (IntRow, Rational) {
    if row.is_zero() {
        return (Vec::new(), Rational::one());
    }
    let mut lcm = BigInt::one();
    for (_, v) in row.iter() {
        lcm = lcm.lcm(v.denom());
    }
    let mut out: IntRow = row
        .iter()
        .map(|(i, v)| (*i, v.numer() * (&lcm / v.denom())))
        .collect();
    let mut g = content(&out);
    if out[0].1.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, v) in out.iter_mut() {
            *v = &*v / &g;
        }
    }
    (out, Rational::new(lcm, g))
}

/// `(a · target − b · pivot) / g` with the leading column cancelled.
fn combine(target: &IntRow, pivot: &IntRow) -> (IntRow, BigInt, BigInt, BigInt) {
    let lead_t = &target[0].1;
    let lead_p = &pivot[0].1;
    let g0 = lead_t.gcd(lead_p);
    let a = lead_p / &g0;
    let b = lead_t / &g0;
    let mut out: IntRow = Vec::with_capacity(target.len() + pivot.len());
    let (mut i, mut j) = (1, 1);
    while i < target.len() || j < pivot.len() {
        let ci = target.get(i).map(|e| e.0);
        let cj = pivot.get(j).map(|e| e.0);
        match (ci, cj) {
            (Some(x), Some(y)) if x == y => {
                let v = &a * &target[i].1 - &b * &pivot[j].1;
                if !v.is_zero() {
                    out.push((x, v));
                }
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push((x, &a * &target[i].1));
                i += 1;
            }
            (Some(x), None) => {
                out.push((x, &a * &target[i].1));
                i += 1;
            }
            (_, Some(y)) => {
                out.push((y, -(&b * &pivot[j].1)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let g = content(&out);
    if !g.is_zero() && !g.is_one() {
        for (_, v) in out.iter_mut() {
            *v = &*v / &g;
        }
    }
    let g = if g.is_zero() { BigInt::one() } else { g };
    (out, a, b, g)
}

/// Row echelon form of a set of rows.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    /// `(pivot column, original row id, row)` sorted by pivot column.
    pub pivots: Vec<(usize, usize, IntRow)>,
    /// Original ids of rows that reduced to zero.
    pub zero_rows: Vec<usize>,
    pub log: Vec<RowOp>,
}

impl Echelon {
    /// Forward elimination. When `record` is set, every row operation is
    /// logged so that it can be replayed on right-hand sides.
    pub fn new(rows: &[SparseVec], record: bool) -> Self {
        let mut log = Vec::new();
        let mut slab: Vec<IntRow> = Vec::with_capacity(rows.len());
        let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut zero_rows = Vec::new();
        for (id, row) in rows.iter().enumerate() {
            let (int_row, factor) = to_primitive(row);
            if record && !factor.is_one() {
                log.push(RowOp::Scale { row: id, factor });
            }
            match int_row.first() {
                Some((c, _)) => buckets.entry(*c).or_default().push(id),
                None => zero_rows.push(id),
            }
            slab.push(int_row);
        }

        let mut pivots = Vec::new();
        while let Some((col, ids)) = buckets.pop_first() {
            let pivot_id = *ids
                .iter()
                .min_by_key(|&&id| (slab[id].len(), id))
                .expect("bucket is never empty");
            let pivot_row = std::mem::take(&mut slab[pivot_id]);
            for &id in &ids {
                if id == pivot_id {
                    continue;
                }
                let (reduced, a, b, g) = combine(&slab[id], &pivot_row);
                if record {
                    log.push(RowOp::Combine {
                        target: id,
                        pivot: pivot_id,
                        a,
                        b,
                        g,
                    });
                }
                match reduced.first() {
                    Some((c, _)) => buckets.entry(*c).or_default().push(id),
                    None => zero_rows.push(id),
                }
                slab[id] = reduced;
            }
            pivots.push((col, pivot_id, pivot_row));
        }
        zero_rows.sort_unstable();
        Self {
            pivots,
            zero_rows,
            log,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Back-substitution to reduced echelon form: every pivot column is
    /// zero in all other pivot rows. Invalidates the recorded log.
    pub fn reduce(&mut self) {
        let pivot_pos: BTreeMap<usize, usize> = self
            .pivots
            .iter()
            .enumerate()
            .map(|(pos, (c, _, _))| (*c, pos))
            .collect();
        for pos in (0..self.pivots.len()).rev() {
            let hits: Vec<usize> = self.pivots[pos].2[1..]
                .iter()
                .filter_map(|(c, _)| pivot_pos.get(c).copied())
                .collect();
            if hits.is_empty() {
                continue;
            }
            let mut row = std::mem::take(&mut self.pivots[pos].2);
            for other in hits {
                let other_row = &self.pivots[other].2;
                let col = other_row[0].0;
                let Ok(at) = row.binary_search_by_key(&col, |e| e.0) else {
                    continue;
                };
                row = eliminate_at(&row, at, other_row);
            }
            self.pivots[pos].2 = row;
        }
        self.log.clear();
    }

    /// Rational rows normalized to a leading 1, in pivot order.
    pub fn normalized_rows(&self) -> Vec<SparseVec> {
        self.pivots
            .iter()
            .map(|(_, _, row)| {
                let lead = &row[0].1;
                SparseVec::from_sorted_unchecked(
                    row.iter()
                        .map(|(c, v)| (*c, Rational::new(v.clone(), lead.clone())))
                        .collect(),
                )
            })
            .collect()
    }
}

/// Cancels `row[at]` using `pivot` (whose leading column equals that
/// position's column); the leading entry of `row` keeps its column.
fn eliminate_at(row: &IntRow, at: usize, pivot: &IntRow) -> IntRow {
    let coef = &row[at].1;
    let lead_p = &pivot[0].1;
    let g0 = coef.gcd(lead_p);
    let a = lead_p / &g0;
    let b = coef / &g0;
    let mut out: IntRow = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map(|e| e.0);
        let cj = pivot.get(j).map(|e| e.0);
        match (ci, cj) {
            (Some(x), Some(y)) if x == y => {
                let v = &a * &row[i].1 - &b * &pivot[j].1;
                if !v.is_zero() {
                    out.push((x, v));
                }
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push((x, &a * &row[i].1));
                i += 1;
            }
            (Some(x), None) => {
                out.push((x, &a * &row[i].1));
                i += 1;
            }
            (_, Some(y)) => {
                out.push((y, -(&b * &pivot[j].1)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let mut g = content(&out);
    if out.first().is_some_and(|(_, v)| v.is_negative()) {
        g = -g;
    }
    if !g.is_one() {
        for (_, v) in out.iter_mut() {
            *v = &*v / &g;
        }
    }
    out
}
