use std::collections::BTreeMap;
use std::fmt;

use super::context::ContextHandle;
use super::poly::Monomial;
use crate::error::{Error, Result};

/// A value in `Z^k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multidegree(pub Vec<i64>);

impl Multidegree {
    pub fn zero(k: usize) -> Self {
        Multidegree(vec![0; k])
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_scaled(&mut self, other: &Multidegree, times: i64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * times;
        }
    }

    pub fn sub(&self, other: &Multidegree) -> Multidegree {
        Multidegree(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All exponent vectors of length `n` with total degree exactly `t`, in
/// descending degree-lex order.
pub fn monomials_of_degree(n: usize, t: u32) -> Vec<Monomial> {
    fn rec(prefix: &mut Vec<u32>, n: usize, left: u32, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(Monomial::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(prefix, n, left - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if t == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return out;
    }
    rec(&mut Vec::with_capacity(n), n, t, &mut out);
    out
}

/// Multidegree of `m` when variable `i` has degree `variable_degrees[i]`.
pub fn multidegree_of(m: &Monomial, variable_degrees: &[Multidegree]) -> Multidegree {
    let k = variable_degrees.first().map_or(0, |d| d.len());
    let mut md = Multidegree::zero(k);
    for (e, d) in m.exponents().iter().zip(variable_degrees) {
        md.add_scaled(d, *e as i64);
    }
    md
}

/// Groups every monomial of total degree `total_degree` in `ring` by multidegree.
pub fn monomials_by_multidegree(
    ring: &ContextHandle,
    variable_degrees: &[Multidegree],
    total_degree: u32,
) -> Result<BTreeMap<Multidegree, Vec<Monomial>>> {
    if variable_degrees.len() != ring.arity() {
        return Err(Error::Validation(format!(
            "{} variable degrees for a ring with {} variables",
            variable_degrees.len(),
            ring.arity()
        )));
    }
    if let Some(first) = variable_degrees.first() {
        if variable_degrees.iter().any(|d| d.len() != first.len()) {
            return Err(Error::Validation("variable degrees of differing length".into()));
        }
    }
    let mut groups: BTreeMap<Multidegree, Vec<Monomial>> = BTreeMap::new();
    for m in monomials_of_degree(ring.arity(), total_degree) {
        groups
            .entry(multidegree_of(&m, variable_degrees))
            .or_default()
            .push(m);
    }
    Ok(groups)
}
