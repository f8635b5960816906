use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::algebra::{ContextHandle, Element, ExactMatrix, MonomialMap, Polynomial};

/// Everything that can be saved to or loaded from a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Integer(BigInt),
    Rational(BigRational),
    Residue { field: ContextHandle, value: u64 },
    Polynomial(Polynomial),
    Matrix(ExactMatrix),
    Ring(ContextHandle),
    MonomialMap(MonomialMap),
    /// Homogeneous sequence: all items share one type tree.
    Vector(Vec<Value>),
    Tuple(Vec<Value>),
}

impl Value {
    /// Contexts the value refers to, each preceded by its base rings.
    pub fn contexts(&self) -> Vec<ContextHandle> {
        let mut out: Vec<ContextHandle> = Vec::new();
        let push = |c: &ContextHandle, out: &mut Vec<ContextHandle>| {
            let mut chain = c.dependencies();
            chain.reverse();
            chain.push(c.clone());
            for x in chain {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        };
        self.visit_contexts(&mut |c| push(c, &mut out));
        out
    }

    fn visit_contexts(&self, f: &mut dyn FnMut(&ContextHandle)) {
        match self {
            Value::Integer(_) | Value::Rational(_) => {}
            Value::Residue { field, .. } => f(field),
            Value::Polynomial(p) => f(p.parent()),
            Value::Matrix(m) => f(m.parent()),
            Value::Ring(r) => f(r),
            Value::MonomialMap(m) => {
                f(m.source());
                f(m.target());
            }
            Value::Vector(items) | Value::Tuple(items) => items.iter().for_each(|v| v.visit_contexts(f)),
        }
    }

    /// Wraps a ring element as a standalone value.
    pub fn from_element(ring: &ContextHandle, e: Element) -> Value {
        match e {
            Element::Integer(n) => Value::Integer(n),
            Element::Rational(q) => Value::Rational(q),
            Element::Residue(r) => Value::Residue {
                field: ring.clone(),
                value: r,
            },
            Element::Poly(p) => Value::Polynomial(p),
        }
    }

    pub fn as_integer(&self) -> Option<&BigInt> {
        match self {
            Value::Integer(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            Value::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&ExactMatrix> {
        match self {
            Value::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_items(&self) -> Option<&[Value]> {
        match self {
            Value::Vector(v) | Value::Tuple(v) => Some(v),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Integer(_) => "integer",
            Value::Rational(_) => "rational",
            Value::Residue { .. } => "prime field element",
            Value::Polynomial(_) => "polynomial",
            Value::Matrix(_) => "matrix",
            Value::Ring(_) => "ring",
            Value::MonomialMap(_) => "monomial map",
            Value::Vector(_) => "vector",
            Value::Tuple(_) => "tuple",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(n) => write!(f, "{n}"),
            Value::Rational(q) => write!(f, "{q}"),
            Value::Residue { value, .. } => write!(f, "{value}"),
            Value::Polynomial(p) => write!(f, "{p}"),
            Value::Matrix(m) => write!(f, "{m}"),
            Value::Ring(r) => write!(f, "{r}"),
            Value::MonomialMap(m) => {
                let parts: Vec<String> = m
                    .source()
                    .symbols()
                    .iter()
                    .zip(m.images())
                    .map(|(s, img)| format!("{s} -> {img}"))
                    .collect();
                write!(f, "{}", parts.join(", "))
            }
            Value::Vector(items) | Value::Tuple(items) => {
                let (open, close) = if matches!(self, Value::Vector(_)) { ("[", "]") } else { ("(", ")") };
                let parts: Vec<String> = items.iter().map(|v| v.to_string()).collect();
                write!(f, "{open}{}{close}", parts.join(", "))
            }
        }
    }
}

impl From<BigInt> for Value {
    fn from(n: BigInt) -> Self {
        Value::Integer(n)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Integer(BigInt::from(n))
    }
}

impl From<BigRational> for Value {
    fn from(q: BigRational) -> Self {
        Value::Rational(q)
    }
}

impl From<Polynomial> for Value {
    fn from(p: Polynomial) -> Self {
        Value::Polynomial(p)
    }
}

impl From<ExactMatrix> for Value {
    fn from(m: ExactMatrix) -> Self {
        Value::Matrix(m)
    }
}

impl From<MonomialMap> for Value {
    fn from(m: MonomialMap) -> Self {
        Value::MonomialMap(m)
    }
}

impl From<ContextHandle> for Value {
    fn from(c: ContextHandle) -> Self {
        Value::Ring(c)
    }
}
