//! Determinants of univariate polynomial matrices over a prime field by
//! evaluation at `D + 1` points and Lagrange interpolation.

use super::context::Element;
use super::matrix::ExactMatrix;
use super::poly::Polynomial;
use super::prime::{add_mod, inv_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};

/// Scalar determinant over `GF(p)` by Gaussian elimination. Consumes `a`.
pub fn det_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = a.len();
    let mut det = 1u64;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(pivot, col);
            det = sub_mod(0, det, p);
        }
        let pv = a[col][col];
        det = mul_mod(det, pv, p);
        let inv = inv_mod(pv, p);
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let factor = mul_mod(a[r][col], inv, p);
            for c in col..n {
                let sub = mul_mod(factor, a[col][c], p);
                a[r][c] = sub_mod(a[r][c], sub, p);
            }
        }
    }
    det
}

fn horner(coeffs: &[u64], x: u64, p: u64) -> u64 {
    coeffs
        .iter()
        .rev()
        .fold(0, |acc, &c| add_mod(mul_mod(acc, x, p), c, p))
}

/// Coefficients (lowest degree first) of the unique polynomial of degree
/// `< xs.len()` through the points `(xs[i], ys[i])`. The `xs` must be distinct.
pub fn interpolate(xs: &[u64], ys: &[u64], p: u64) -> Vec<u64> {
    let n = xs.len();
    // master = prod (t - x_i), degree n
    let mut master = vec![0u64; n + 1];
    master[0] = 1;
    for (k, &x) in xs.iter().enumerate() {
        for d in (0..=k + 1).rev() {
            let shifted = if d > 0 { master[d - 1] } else { 0 };
            master[d] = sub_mod(shifted, mul_mod(master[d], x, p), p);
        }
    }
    let mut out = vec![0u64; n];
    let mut quotient = vec![0u64; n];
    for i in 0..n {
        if ys[i] == 0 {
            continue;
        }
        // master / (t - x_i) by synthetic division
        let mut carry = 0u64;
        for d in (0..n).rev() {
            carry = add_mod(master[d + 1], mul_mod(carry, xs[i], p), p);
            quotient[d] = carry;
        }
        let denom = horner(&quotient, xs[i], p);
        let w = mul_mod(ys[i], inv_mod(denom, p), p);
        for d in 0..n {
            out[d] = add_mod(out[d], mul_mod(w, quotient[d], p), p);
        }
    }
    out
}

/// Dense residue coefficients of a `GF(p)[t]` element, lowest degree first.
pub(crate) fn dense_residues(e: &Element) -> Result<Vec<u64>> {
    let poly = e
        .as_poly()
        .ok_or_else(|| Error::Context(format!("expected a polynomial entry, got {e}")))?;
    let len = poly.degree().map_or(0, |d| d as usize + 1);
    let mut out = vec![0u64; len];
    for (m, c) in poly.terms() {
        match c {
            Element::Residue(r) => out[m.exponents()[0] as usize] = *r,
            other => return Err(Error::Context(format!("expected a residue, got {other}"))),
        }
    }
    Ok(out)
}

/// `det(m)` for a square matrix over `GF(p)[t]` whose determinant has degree
/// at most `degree_bound`.
pub fn det_univariate_over_prime_field(m: &ExactMatrix, degree_bound: usize) -> Result<Polynomial> {
    let ring = m.parent();
    let p = ring
        .base()
        .and_then(|b| b.modulus())
        .filter(|_| ring.is_univariate())
        .ok_or_else(|| Error::Validation(format!("expected a matrix over GF(p)[t], got {ring}")))?;
    if !m.is_square() {
        return Err(Error::Validation(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if p <= degree_bound as u64 {
        return Err(Error::InsufficientEvaluationPoints {
            prime: p,
            bound: degree_bound,
        });
    }
    let n = m.rows();
    let dense = m
        .entries()
        .iter()
        .map(dense_residues)
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<u64> = (0..=degree_bound as u64).collect();
    let ys: Vec<u64> = xs
        .iter()
        .map(|&x| {
            let rows = (0..n)
                .map(|i| (0..n).map(|j| horner(&dense[i * n + j], x, p)).collect())
                .collect();
            det_mod_p(rows, p)
        })
        .collect();
    let coeffs = interpolate(&xs, &ys, p);
    let terms = coeffs
        .into_iter()
        .enumerate()
        .map(|(d, c)| (vec![d as u32], Element::Residue(c)));
    Polynomial::new(ring, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::context::ContextHandle;

    fn fp_t(p: u64) -> ContextHandle {
        ContextHandle::univariate(&ContextHandle::prime_field(p).unwrap(), "t").unwrap()
    }

    fn poly(r: &ContextHandle, coeffs: &[u64]) -> Element {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(d, c)| (vec![d as u32], Element::Residue(*c)));
        Element::Poly(Polynomial::new(r, terms).unwrap())
    }

    #[test]
    fn two_by_two_over_f101() {
        // det [[t, 1], [1, t]] = t^2 - 1 = t^2 + 100 over GF(101)
        let r = fp_t(101);
        let m = ExactMatrix::from_rows(
            &r,
            vec![
                vec![poly(&r, &[0, 1]), poly(&r, &[1])],
                vec![poly(&r, &[1]), poly(&r, &[0, 1])],
            ],
        )
        .unwrap();
        let d = det_univariate_over_prime_field(&m, 2).unwrap();
        assert_eq!(d, poly(&r, &[100, 0, 1]).as_poly().unwrap().clone());
    }

    #[test]
    fn identity_and_zero_row() {
        let r = fp_t(13);
        let id = ExactMatrix::identity(&r, 3);
        assert!(det_univariate_over_prime_field(&id, 0).unwrap().is_one());
        let mut rows = vec![vec![poly(&r, &[1, 2]), poly(&r, &[3])], vec![poly(&r, &[]), poly(&r, &[])]];
        rows[0][0] = poly(&r, &[5, 0, 1]);
        let m = ExactMatrix::from_rows(&r, rows).unwrap();
        assert!(det_univariate_over_prime_field(&m, 2).unwrap().is_zero());
    }

    #[test]
    fn errors() {
        let r = fp_t(3);
        let id = ExactMatrix::identity(&r, 2);
        assert!(matches!(
            det_univariate_over_prime_field(&id, 3),
            Err(Error::InsufficientEvaluationPoints { prime: 3, bound: 3 })
        ));
        let rect = ExactMatrix::zeros(&r, 2, 3);
        assert!(matches!(det_univariate_over_prime_field(&rect, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = 10007;
        let coeffs = [3u64, 0, 17, 9999, 1];
        let xs: Vec<u64> = (0..5).collect();
        let ys: Vec<u64> = xs.iter().map(|&x| horner(&coeffs, x, p)).collect();
        assert_eq!(interpolate(&xs, &ys, p), coeffs.to_vec());
    }

    #[test]
    fn scalar_det_matches_expansion() {
        let p = 97;
        let a = vec![vec![2, 3, 5], vec![7, 11, 13], vec![17, 19, 23]];
        // 2(11*23-13*19) - 3(7*23-13*17) + 5(7*19-11*17) = -78
        assert_eq!(det_mod_p(a, p), 97 - 78);
        assert_eq!(det_mod_p(vec![vec![0, 1], vec![1, 0]], p), 96);
    }
}
