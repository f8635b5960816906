use std::fmt;

use num_bigint::BigInt;

use super::context::{reduce_bigint, ContextHandle, Element, RingDescriptor};
use super::poly::Polynomial;
use super::prime::{is_prime, MAX_PRIME};
use crate::error::{Error, Result};

/// A dense row-major matrix over an interned ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    parent: ContextHandle,
    rows: usize,
    cols: usize,
    entries: Vec<Element>,
}

impl ExactMatrix {
    pub fn new(parent: &ContextHandle, rows: usize, cols: usize, entries: Vec<Element>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Validation(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for e in &entries {
            parent.check_element(e)?;
        }
        Ok(ExactMatrix {
            parent: parent.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(parent: &ContextHandle, rows: Vec<Vec<Element>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Validation("ragged matrix rows".into()));
        }
        Self::new(parent, n, m, rows.into_iter().flatten().collect())
    }

    pub fn zeros(parent: &ContextHandle, rows: usize, cols: usize) -> Self {
        ExactMatrix {
            parent: parent.clone(),
            rows,
            cols,
            entries: vec![parent.zero(); rows * cols],
        }
    }

    pub fn identity(parent: &ContextHandle, n: usize) -> Self {
        let mut m = Self::zeros(parent, n, n);
        for i in 0..n {
            m.entries[i * n + i] = parent.one();
        }
        m
    }

    pub fn parent(&self) -> &ContextHandle {
        &self.parent
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Element] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> ExactMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        ExactMatrix {
            parent: self.parent.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.parent != other.parent {
            return Err(Error::Context(format!(
                "matrices over different rings: {} and {}",
                self.parent, other.parent
            )));
        }
        if self.cols != other.rows {
            return Err(Error::Validation(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = &self.parent;
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = r.zero();
                for k in 0..self.cols {
                    acc = r.add(&acc, &r.mul(self.get(i, k), other.get(k, j)));
                }
                entries.push(acc);
            }
        }
        Ok(ExactMatrix {
            parent: r.clone(),
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// The ring `GF(p)[sym]` matching a univariate integer polynomial ring `ZZ[sym]`.
pub fn prime_field_image(ring: &ContextHandle, p: u64) -> Result<ContextHandle> {
    match ring.descriptor() {
        RingDescriptor::Univariate { base, symbol } if *base == ContextHandle::integers() => {
            check_prime(p)?;
            ContextHandle::univariate(&ContextHandle::prime_field(p)?, symbol)
        }
        _ => Err(Error::Validation(format!("expected a ring of the form ZZ[t], got {ring}"))),
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p > MAX_PRIME {
        return Err(Error::Validation(format!("prime {p} exceeds machine width bound {MAX_PRIME}")));
    }
    if !is_prime(p) {
        return Err(Error::Validation(format!("{p} is not prime")));
    }
    Ok(())
}

/// Reduces a polynomial over `ZZ[t]` to `GF(p)[t]`.
pub fn reduce_poly_mod_prime(poly: &Polynomial, p: u64) -> Result<Polynomial> {
    let target = prime_field_image(poly.parent(), p)?;
    poly.map_coefficients(&target, |c| match c {
        Element::Integer(n) => Ok(Element::Residue(reduce_bigint(n, p))),
        other => Err(Error::Context(format!("non-integer coefficient {other}"))),
    })
}

/// Reduces every entry of a matrix over `ZZ[t]` modulo `p`.
pub fn reduce_mod_prime(m: &ExactMatrix, p: u64) -> Result<ExactMatrix> {
    let target = prime_field_image(m.parent(), p)?;
    let entries = m
        .entries()
        .iter()
        .map(|e| match e {
            Element::Poly(q) => reduce_poly_mod_prime(q, p).map(Element::Poly),
            other => Err(Error::Context(format!("unexpected entry {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::new(&target, m.rows(), m.cols(), entries)
}

/// Convenience for building `ZZ[t]` matrices from integer coefficient lists,
/// lowest degree first.
pub fn int_poly_matrix(ring: &ContextHandle, rows: &[Vec<Vec<i64>>]) -> Result<ExactMatrix> {
    let entries = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|coeffs| {
                    let terms = coeffs
                        .iter()
                        .enumerate()
                        .map(|(d, c)| (vec![d as u32], Element::Integer(BigInt::from(*c))));
                    Polynomial::new(ring, terms).map(Element::Poly)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_rows(ring, entries)
}
