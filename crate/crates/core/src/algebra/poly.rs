use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::context::{ContextHandle, Element};
use crate::error::{Error, Result};

/// An exponent vector. Ordered degree-lexicographically: total degree first,
/// then lexicographic with the first variable most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }
}

impl From<Vec<u32>> for Monomial {
    fn from(v: Vec<u32>) -> Self {
        Monomial(v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial in canonical form: terms sorted by descending
/// degree-lex monomial, no zero coefficients. The zero polynomial has no terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    parent: ContextHandle,
    terms: Vec<(Monomial, Element)>,
}

impl Polynomial {
    /// Builds a polynomial from arbitrary terms, merging duplicates and
    /// dropping zeros.
    pub fn new<M, I>(parent: &ContextHandle, terms: I) -> Result<Self>
    where
        M: Into<Monomial>,
        I: IntoIterator<Item = (M, Element)>,
    {
        let base = parent
            .base()
            .ok_or_else(|| Error::Context(format!("{parent} is not a polynomial ring")))?;
        let arity = parent.arity();
        let mut checked = Vec::new();
        for (m, c) in terms {
            let m = m.into();
            if m.arity() != arity {
                return Err(Error::Validation(format!(
                    "exponent vector of length {} in ring with {} variables",
                    m.arity(),
                    arity
                )));
            }
            base.check_element(&c)?;
            checked.push((m, c));
        }
        Ok(Self::canonical(parent, checked))
    }

    fn canonical(parent: &ContextHandle, terms: Vec<(Monomial, Element)>) -> Self {
        let base = parent.base().expect("polynomial ring");
        let mut acc: BTreeMap<Monomial, Element> = BTreeMap::new();
        for (m, c) in terms {
            match acc.get_mut(&m) {
                Some(existing) => *existing = base.add(existing, &c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let terms = acc
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Polynomial {
            parent: parent.clone(),
            terms,
        }
    }

    pub fn zero(parent: &ContextHandle) -> Self {
        debug_assert!(parent.is_polynomial_ring());
        Polynomial {
            parent: parent.clone(),
            terms: Vec::new(),
        }
    }

    pub(crate) fn constant(parent: &ContextHandle, c: Element) -> Self {
        let terms = if c.is_zero() {
            Vec::new()
        } else {
            vec![(Monomial::one(parent.arity()), c)]
        };
        Polynomial {
            parent: parent.clone(),
            terms,
        }
    }

    pub fn one(parent: &ContextHandle) -> Self {
        let c = parent.base().expect("polynomial ring").one();
        Self::constant(parent, c)
    }

    /// The `i`-th generator of the ring.
    pub fn variable(parent: &ContextHandle, i: usize) -> Result<Self> {
        if i >= parent.arity() {
            return Err(Error::Validation(format!("{parent} has no variable {i}")));
        }
        let mut e = vec![0; parent.arity()];
        e[i] = 1;
        let one = parent.base().unwrap().one();
        Ok(Polynomial {
            parent: parent.clone(),
            terms: vec![(Monomial(e), one)],
        })
    }

    /// A single term `c * x^e`.
    pub fn term(parent: &ContextHandle, exponents: Vec<u32>, c: Element) -> Result<Self> {
        Self::new(parent, [(exponents, c)])
    }

    pub fn parent(&self) -> &ContextHandle {
        &self.parent
    }

    pub fn terms(&self) -> &[(Monomial, Element)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Element)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms[0].0.total_degree() == 0
            && self.terms[0].1.is_one_scalar()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.first().map(|(m, _)| m.total_degree())
    }

    pub fn coefficient(&self, m: &Monomial) -> Element {
        self.terms
            .iter()
            .find(|(t, _)| t == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| self.parent.base().unwrap().zero())
    }

    fn check_parent(&self, other: &Polynomial) -> Result<()> {
        if self.parent == other.parent {
            Ok(())
        } else {
            Err(Error::Context(format!(
                "operands live in different rings: {} and {}",
                self.parent, other.parent
            )))
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_parent(other)?;
        Ok(self.add_same_parent(other))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_parent(other)?;
        Ok(self.add_same_parent(&other.negated()))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_parent(other)?;
        Ok(self.mul_same_parent(other))
    }

    pub fn neg(&self) -> Polynomial {
        self.negated()
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut acc = Polynomial::one(&self.parent);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_same_parent(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same_parent(&base);
            }
        }
        acc
    }

    /// Multiplies every coefficient by `c` from the coefficient ring.
    pub fn scale(&self, c: &Element) -> Result<Polynomial> {
        let base = self.parent.base().unwrap();
        base.check_element(c)?;
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), base.mul(a, c)))
            .collect();
        Ok(Self::canonical(&self.parent, terms))
    }

    pub(crate) fn add_same_parent(&self, other: &Polynomial) -> Polynomial {
        let base = self.parent.base().unwrap();
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = base.add(&a[i].1, &b[j].1);
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Polynomial {
            parent: self.parent.clone(),
            terms: out,
        }
    }

    pub(crate) fn negated(&self) -> Polynomial {
        let base = self.parent.base().unwrap();
        Polynomial {
            parent: self.parent.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), base.neg(c)))
                .collect(),
        }
    }

    pub(crate) fn mul_same_parent(&self, other: &Polynomial) -> Polynomial {
        let base = self.parent.base().unwrap();
        let mut acc: BTreeMap<Monomial, Element> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = base.mul(ca, cb);
                match acc.get_mut(&m) {
                    Some(e) => *e = base.add(e, &c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Polynomial {
            parent: self.parent.clone(),
            terms: acc.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Rebuilds the polynomial in `target` (same arity) with coefficients
    /// mapped by `f`.
    pub fn map_coefficients<F>(&self, target: &ContextHandle, mut f: F) -> Result<Polynomial>
    where
        F: FnMut(&Element) -> Result<Element>,
    {
        if target.arity() != self.parent.arity() || !target.is_polynomial_ring() {
            return Err(Error::Context(format!(
                "cannot map {} coefficients into {target}",
                self.parent
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((m.clone(), f(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Polynomial::new(target, terms)
    }

    /// Degree in the single variable of a univariate ring.
    pub fn degree(&self) -> Option<u32> {
        self.total_degree()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let symbols = self.parent.symbols();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = m
                .exponents()
                .iter()
                .zip(symbols)
                .filter(|(e, _)| **e > 0)
                .map(|(e, s)| if *e == 1 { s.clone() } else { format!("{s}^{e}") })
                .collect();
            let negative = c.is_negative_scalar();
            if k > 0 {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            } else if negative {
                write!(f, "-")?;
            }
            let magnitude = if negative {
                self.parent.base().unwrap().neg(c)
            } else {
                c.clone()
            };
            if mono.is_empty() {
                write!(f, "{}", magnitude.fmt_factor())?;
            } else if magnitude.is_one_scalar() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", magnitude.fmt_factor(), mono.join("*"))?;
            }
        }
        Ok(())
    }
}
