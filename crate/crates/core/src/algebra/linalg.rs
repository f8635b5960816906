//! Exact linear algebra over QQ: reduced row echelon form, kernels, and an
//! incrementally extended echelon basis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::context::{ContextHandle, Element};
use super::matrix::ExactMatrix;
use crate::error::{Error, Result};

pub type QVector = Vec<BigRational>;

/// Row-reduces `rows` (each of length `ncols`) in place; returns pivot columns.
pub fn rref_in_place(rows: &mut [QVector], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub(crate) fn rational_rows(m: &ExactMatrix) -> Result<Vec<QVector>> {
    if *m.parent() != ContextHandle::rationals() {
        return Err(Error::Validation(format!("expected a matrix over QQ, got {}", m.parent())));
    }
    Ok((0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|e| e.as_rational().expect("QQ entry").clone())
                .collect()
        })
        .collect())
}

pub(crate) fn rational_matrix(rows: Vec<QVector>, ncols: usize) -> ExactMatrix {
    let qq = ContextHandle::rationals();
    let n = rows.len();
    let entries = rows.into_iter().flatten().map(Element::Rational).collect();
    ExactMatrix::new(&qq, n, ncols, entries).expect("well-formed rational matrix")
}

/// Reduced row echelon form of a matrix over QQ, with its pivot columns.
pub fn rref_over_q(m: &ExactMatrix) -> Result<(ExactMatrix, Vec<usize>)> {
    let mut rows = rational_rows(m)?;
    let pivots = rref_in_place(&mut rows, m.cols());
    Ok((rational_matrix(rows, m.cols()), pivots))
}

/// Scales a nonzero rational vector to a primitive integer vector whose first
/// nonzero entry is positive.
pub fn primitive_integer_vector(v: &[BigRational]) -> QVector {
    let den_lcm = v
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &den_lcm).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if content.is_zero() {
        return v.to_vec();
    }
    let lead_negative = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let content = if lead_negative { -content } else { content };
    ints.into_iter()
        .map(|x| BigRational::from_integer(x / &content))
        .collect()
}

/// Kernel basis from already-reduced rows: one vector per free column, in
/// increasing free-column order, canonically scaled.
pub fn nullspace_from_rref(rref: &[QVector], pivots: &[usize], ncols: usize) -> Vec<QVector> {
    let mut out = Vec::new();
    let mut pivot_iter = pivots.iter().peekable();
    for free in 0..ncols {
        if pivot_iter.peek() == Some(&&free) {
            pivot_iter.next();
            continue;
        }
        let mut v = vec![BigRational::zero(); ncols];
        v[free] = BigRational::one();
        for (row, &pc) in rref.iter().zip(pivots) {
            v[pc] = -row[free].clone();
        }
        out.push(primitive_integer_vector(&v));
    }
    out
}

/// Basis of `{v : m v = 0}` over QQ.
pub fn nullspace_over_q(m: &ExactMatrix) -> Result<Vec<QVector>> {
    let mut rows = rational_rows(m)?;
    let pivots = rref_in_place(&mut rows, m.cols());
    Ok(nullspace_from_rref(&rows, &pivots, m.cols()))
}

/// Row space basis kept in echelon form (each stored row has a leading one
/// at its pivot and zeros at every other stored pivot), so membership tests
/// are a single reduction pass.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<(usize, QVector)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        EchelonBasis::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[BigRational]) -> QVector {
        let mut w = v.to_vec();
        for (pc, row) in &self.rows {
            if w[*pc].is_zero() {
                continue;
            }
            let f = w[*pc].clone();
            for (x, r) in w.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Adds `v` if it is independent of the current span; returns whether it was added.
    pub fn insert(&mut self, v: &[BigRational]) -> bool {
        let mut w = self.reduce(v);
        let Some(pc) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[pc].recip();
        for x in w.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for (x, r) in row.iter_mut().zip(&w) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
        }
        self.rows.push((pc, w));
        true
    }
}
