use num_rational::BigRational;
use num_traits::One;

use super::context::{ContextHandle, Element};
use super::grading::Multidegree;
use super::poly::{Monomial, Polynomial};
use crate::error::{Error, Result};

/// A ring map `QQ[x_1..x_n] -> QQ[s_1..s_k]` sending each variable to a
/// single nonzero term. It is homogeneous for the grading
/// `deg(x_i) = exponent vector of its image`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMap {
    source: ContextHandle,
    target: ContextHandle,
    images: Vec<Polynomial>,
}

impl MonomialMap {
    pub fn new(source: &ContextHandle, target: &ContextHandle, images: Vec<Polynomial>) -> Result<Self> {
        let qq = ContextHandle::rationals();
        for ring in [source, target] {
            if ring.base() != Some(&qq) || ring.is_univariate() {
                return Err(Error::Validation(format!(
                    "monomial maps need multivariate rings over QQ, got {ring}"
                )));
            }
        }
        if images.len() != source.arity() {
            return Err(Error::Validation(format!(
                "{} images for {} source variables",
                images.len(),
                source.arity()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            if img.parent() != target {
                return Err(Error::Context(format!("image {i} is not in {target}")));
            }
            if img.len() != 1 {
                return Err(Error::Validation(format!(
                    "image of {} must be a single nonzero term, got {img}",
                    source.symbols()[i]
                )));
            }
        }
        Ok(MonomialMap {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn source(&self) -> &ContextHandle {
        &self.source
    }

    pub fn target(&self) -> &ContextHandle {
        &self.target
    }

    pub fn images(&self) -> &[Polynomial] {
        &self.images
    }

    /// The grading induced by the image exponent vectors.
    pub fn variable_degrees(&self) -> Vec<Multidegree> {
        self.images
            .iter()
            .map(|img| Multidegree(img.terms()[0].0.exponents().iter().map(|&e| e as i64).collect()))
            .collect()
    }

    /// Image of a source monomial as `(coefficient, target monomial)`.
    pub fn image_of_monomial(&self, m: &Monomial) -> (BigRational, Monomial) {
        let mut coeff = BigRational::one();
        let mut mono = Monomial::one(self.target.arity());
        for (&e, img) in m.exponents().iter().zip(&self.images) {
            if e == 0 {
                continue;
            }
            let (tm, tc) = &img.terms()[0];
            let c = tc.as_rational().expect("QQ coefficient");
            coeff *= num_traits::pow(c.clone(), e as usize);
            let scaled: Vec<u32> = tm.exponents().iter().map(|x| x * e).collect();
            mono = mono.mul(&Monomial::new(scaled));
        }
        (coeff, mono)
    }
}

/// Substitutes the images for the variables of `p`.
pub fn evaluate_map(phi: &MonomialMap, p: &Polynomial) -> Result<Polynomial> {
    if p.parent() != phi.source() {
        return Err(Error::Context(format!(
            "polynomial in {} cannot be mapped from {}",
            p.parent(),
            phi.source()
        )));
    }
    let mut acc = Polynomial::zero(phi.target());
    for (m, c) in p.terms() {
        let mut term = Polynomial::new(phi.target(), [(Monomial::one(phi.target().arity()), c.clone())])?;
        for (&e, img) in m.exponents().iter().zip(phi.images()) {
            if e > 0 {
                term = term.mul(&img.pow(e))?;
            }
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Helper for building a single-term target polynomial with rational coefficient.
pub fn rational_term(ring: &ContextHandle, coeff: BigRational, exponents: Vec<u32>) -> Result<Polynomial> {
    Polynomial::term(ring, exponents, Element::Rational(coeff))
}
