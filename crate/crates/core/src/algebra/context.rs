//! Interned ring contexts and the elements that live in them.
//!
//! Two elements may only be combined when their parents are the *same*
//! interned context. Interning maps structurally equal descriptors to one
//! handle, so identity comparison decides sameness.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Polynomial;
use super::prime::{add_mod, is_prime, mul_mod, sub_mod, MAX_PRIME};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingDescriptor {
    Integers,
    Rationals,
    PrimeField(u64),
    Univariate {
        base: ContextHandle,
        symbol: String,
    },
    Multivariate {
        base: ContextHandle,
        symbols: Vec<String>,
    },
}

impl RingDescriptor {
    fn validate(&self) -> Result<()> {
        match self {
            RingDescriptor::Integers | RingDescriptor::Rationals => Ok(()),
            RingDescriptor::PrimeField(p) => {
                if *p > MAX_PRIME {
                    Err(Error::Validation(format!(
                        "prime field modulus {p} exceeds machine width bound {MAX_PRIME}"
                    )))
                } else if !is_prime(*p) {
                    Err(Error::Validation(format!("{p} is not prime")))
                } else {
                    Ok(())
                }
            }
            RingDescriptor::Univariate { symbol, .. } => check_symbols(std::slice::from_ref(symbol)),
            RingDescriptor::Multivariate { symbols, .. } => check_symbols(symbols),
        }
    }
}

fn check_symbols(symbols: &[String]) -> Result<()> {
    if symbols.is_empty() {
        return Err(Error::Validation("polynomial ring needs at least one symbol".into()));
    }
    for (i, s) in symbols.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Validation("empty ring symbol".into()));
        }
        if symbols[..i].contains(s) {
            return Err(Error::Validation(format!("duplicate ring symbol `{s}`")));
        }
    }
    Ok(())
}

struct ContextData {
    id: u64,
    descriptor: RingDescriptor,
}

/// An interned ring. Cloning is cheap; equality is identity.
#[derive(Clone)]
pub struct ContextHandle(Arc<ContextData>);

impl PartialEq for ContextHandle {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for ContextHandle {}

impl Hash for ContextHandle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

impl fmt::Debug for ContextHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContextHandle(#{} {})", self.0.id, self)
    }
}

fn registry() -> &'static Mutex<HashMap<RingDescriptor, ContextHandle>> {
    static REGISTRY: OnceLock<Mutex<HashMap<RingDescriptor, ContextHandle>>> = OnceLock::new();
    REGISTRY.get_or_init(|| Mutex::new(HashMap::new()))
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Returns the process-wide handle for `descriptor`, creating it on first use.
pub fn intern_context(descriptor: RingDescriptor) -> Result<ContextHandle> {
    descriptor.validate()?;
    let mut table = registry().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(handle) = table.get(&descriptor) {
        return Ok(handle.clone());
    }
    let handle = ContextHandle(Arc::new(ContextData {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        descriptor: descriptor.clone(),
    }));
    table.insert(descriptor, handle.clone());
    Ok(handle)
}

impl ContextHandle {
    pub fn integers() -> Self {
        intern_context(RingDescriptor::Integers).expect("ZZ is valid")
    }

    pub fn rationals() -> Self {
        intern_context(RingDescriptor::Rationals).expect("QQ is valid")
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        intern_context(RingDescriptor::PrimeField(p))
    }

    pub fn univariate(base: &ContextHandle, symbol: &str) -> Result<Self> {
        intern_context(RingDescriptor::Univariate {
            base: base.clone(),
            symbol: symbol.to_string(),
        })
    }

    pub fn multivariate<S: AsRef<str>>(base: &ContextHandle, symbols: &[S]) -> Result<Self> {
        intern_context(RingDescriptor::Multivariate {
            base: base.clone(),
            symbols: symbols.iter().map(|s| s.as_ref().to_string()).collect(),
        })
    }

    /// Opaque identity token, unique per interned descriptor.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.0.descriptor
    }

    /// Coefficient ring of a polynomial ring.
    pub fn base(&self) -> Option<&ContextHandle> {
        match &self.0.descriptor {
            RingDescriptor::Univariate { base, .. } | RingDescriptor::Multivariate { base, .. } => {
                Some(base)
            }
            _ => None,
        }
    }

    pub fn symbols(&self) -> &[String] {
        match &self.0.descriptor {
            RingDescriptor::Univariate { symbol, .. } => std::slice::from_ref(symbol),
            RingDescriptor::Multivariate { symbols, .. } => symbols,
            _ => &[],
        }
    }

    /// Number of variables; zero for non-polynomial rings.
    pub fn arity(&self) -> usize {
        self.symbols().len()
    }

    pub fn is_polynomial_ring(&self) -> bool {
        self.base().is_some()
    }

    pub fn is_univariate(&self) -> bool {
        matches!(self.0.descriptor, RingDescriptor::Univariate { .. })
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.0.descriptor {
            RingDescriptor::PrimeField(p) => Some(p),
            _ => None,
        }
    }

    /// Contexts this one is built on, innermost last.
    pub fn dependencies(&self) -> Vec<ContextHandle> {
        let mut out = Vec::new();
        let mut cur = self.base();
        while let Some(b) = cur {
            out.push(b.clone());
            cur = b.base();
        }
        out
    }

    pub fn zero(&self) -> Element {
        match &self.0.descriptor {
            RingDescriptor::Integers => Element::Integer(BigInt::zero()),
            RingDescriptor::Rationals => Element::Rational(BigRational::zero()),
            RingDescriptor::PrimeField(_) => Element::Residue(0),
            _ => Element::Poly(Polynomial::zero(self)),
        }
    }

    pub fn one(&self) -> Element {
        self.from_integer(&BigInt::one())
    }

    /// Image of an integer under the canonical map ZZ -> self.
    pub fn from_integer(&self, n: &BigInt) -> Element {
        match &self.0.descriptor {
            RingDescriptor::Integers => Element::Integer(n.clone()),
            RingDescriptor::Rationals => Element::Rational(BigRational::from_integer(n.clone())),
            RingDescriptor::PrimeField(p) => Element::Residue(reduce_bigint(n, *p)),
            _ => {
                let c = self.base().unwrap().from_integer(n);
                Element::Poly(Polynomial::constant(self, c))
            }
        }
    }

    /// Whether `e` is an element of this ring.
    pub fn contains(&self, e: &Element) -> bool {
        match (&self.0.descriptor, e) {
            (RingDescriptor::Integers, Element::Integer(_)) => true,
            (RingDescriptor::Rationals, Element::Rational(_)) => true,
            (RingDescriptor::PrimeField(p), Element::Residue(r)) => r < p,
            (RingDescriptor::Univariate { .. } | RingDescriptor::Multivariate { .. }, Element::Poly(q)) => {
                q.parent() == self
            }
            _ => false,
        }
    }

    pub fn check_element(&self, e: &Element) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::Context(format!("element {e} does not belong to {self}")))
        }
    }

    pub fn is_zero(&self, e: &Element) -> bool {
        e.is_zero()
    }

    // The arithmetic below assumes both operands belong to `self`; callers
    // check membership at construction time.

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Integer(x), Element::Integer(y)) => Element::Integer(x + y),
            (Element::Rational(x), Element::Rational(y)) => Element::Rational(x + y),
            (Element::Residue(x), Element::Residue(y)) => Element::Residue(add_mod(*x, *y, self.p())),
            (Element::Poly(x), Element::Poly(y)) => Element::Poly(x.add_same_parent(y)),
            _ => panic!("mismatched elements {a}, {b} in {self}"),
        }
    }

    pub fn neg(&self, a: &Element) -> Element {
        match a {
            Element::Integer(x) => Element::Integer(-x),
            Element::Rational(x) => Element::Rational(-x),
            Element::Residue(x) => Element::Residue(sub_mod(0, *x, self.p())),
            Element::Poly(x) => Element::Poly(x.negated()),
        }
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Integer(x), Element::Integer(y)) => Element::Integer(x * y),
            (Element::Rational(x), Element::Rational(y)) => Element::Rational(x * y),
            (Element::Residue(x), Element::Residue(y)) => Element::Residue(mul_mod(*x, *y, self.p())),
            (Element::Poly(x), Element::Poly(y)) => Element::Poly(x.mul_same_parent(y)),
            _ => panic!("mismatched elements {a}, {b} in {self}"),
        }
    }

    fn p(&self) -> u64 {
        self.modulus().expect("prime field")
    }
}

impl fmt::Display for ContextHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.descriptor {
            RingDescriptor::Integers => write!(f, "ZZ"),
            RingDescriptor::Rationals => write!(f, "QQ"),
            RingDescriptor::PrimeField(p) => write!(f, "GF({p})"),
            RingDescriptor::Univariate { base, symbol } => {
                write_base(f, base)?;
                write!(f, "[{symbol}]")
            }
            RingDescriptor::Multivariate { base, symbols } => {
                write_base(f, base)?;
                write!(f, "[{}]", symbols.join(", "))
            }
        }
    }
}

fn write_base(f: &mut fmt::Formatter<'_>, base: &ContextHandle) -> fmt::Result {
    if base.is_polynomial_ring() {
        write!(f, "({base})")
    } else {
        write!(f, "{base}")
    }
}

/// Nonnegative residue of a big integer modulo a machine prime.
pub fn reduce_bigint(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    Integer(BigInt),
    Rational(BigRational),
    Residue(u64),
    Poly(Polynomial),
}

impl Element {
    pub fn is_zero(&self) -> bool {
        match self {
            Element::Integer(x) => x.is_zero(),
            Element::Rational(x) => x.is_zero(),
            Element::Residue(x) => *x == 0,
            Element::Poly(x) => x.is_zero(),
        }
    }

    pub fn as_integer(&self) -> Option<&BigInt> {
        match self {
            Element::Integer(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Element::Rational(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_poly(&self) -> Option<&Polynomial> {
        match self {
            Element::Poly(x) => Some(x),
            _ => None,
        }
    }

    /// True if the printed form needs parentheses when used as a factor.
    fn is_compound(&self) -> bool {
        match self {
            Element::Rational(x) => !x.is_integer(),
            Element::Poly(p) => p.len() > 1,
            _ => false,
        }
    }

    pub(crate) fn is_negative_scalar(&self) -> bool {
        match self {
            Element::Integer(x) => x.is_negative(),
            Element::Rational(x) => x.is_negative(),
            _ => false,
        }
    }

    pub(crate) fn is_one_scalar(&self) -> bool {
        match self {
            Element::Integer(x) => x.is_one(),
            Element::Rational(x) => x.is_one(),
            Element::Residue(x) => *x == 1,
            Element::Poly(p) => p.is_one(),
        }
    }

    pub(crate) fn fmt_factor(&self) -> String {
        if self.is_compound() {
            format!("({self})")
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Integer(x) => write!(f, "{x}"),
            Element::Rational(x) => write!(f, "{x}"),
            Element::Residue(x) => write!(f, "{x}"),
            Element::Poly(x) => write!(f, "{x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_identity_preserving() {
        let qq = ContextHandle::rationals();
        let a = ContextHandle::multivariate(&qq, &["x", "y"]).unwrap();
        let b = ContextHandle::multivariate(&qq, &["x", "y"]).unwrap();
        assert_eq!(a.id(), b.id());
        let swapped = ContextHandle::multivariate(&qq, &["y", "x"]).unwrap();
        assert_ne!(a.id(), swapped.id());
        let zt = ContextHandle::univariate(&ContextHandle::integers(), "t").unwrap();
        let qt = ContextHandle::univariate(&qq, "t").unwrap();
        assert_ne!(zt.id(), qt.id());
    }

    #[test]
    fn malformed_descriptors_are_rejected() {
        let qq = ContextHandle::rationals();
        assert!(matches!(
            ContextHandle::multivariate(&qq, &["x", "x"]),
            Err(Error::Validation(_))
        ));
        assert!(ContextHandle::multivariate::<&str>(&qq, &[]).is_err());
        assert!(ContextHandle::univariate(&qq, "").is_err());
        assert!(ContextHandle::prime_field(91).is_err());
        assert!(ContextHandle::prime_field(4_294_967_291).is_err());
        assert!(ContextHandle::prime_field(101).is_ok());
    }

    #[test]
    fn concurrent_interning_agrees() {
        let ids: Vec<u64> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..8)
                .map(|_| {
                    s.spawn(|| {
                        let zz = ContextHandle::integers();
                        ContextHandle::multivariate(&zz, &["c1", "c2", "c3"]).unwrap().id()
                    })
                })
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(ids.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn display_nested() {
        let zt = ContextHandle::univariate(&ContextHandle::integers(), "t").unwrap();
        let ztu = ContextHandle::univariate(&zt, "u").unwrap();
        assert_eq!(ztu.to_string(), "(ZZ[t])[u]");
        assert_eq!(ztu.dependencies(), vec![zt, ContextHandle::integers()]);
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = ContextHandle::prime_field(7).unwrap();
        assert_eq!(f.from_integer(&BigInt::from(-1)), Element::Residue(6));
        let a = Element::Residue(5);
        let b = Element::Residue(4);
        assert_eq!(f.add(&a, &b), Element::Residue(2));
        assert_eq!(f.mul(&a, &b), Element::Residue(6));
        assert_eq!(f.sub(&b, &a), Element::Residue(6));
        assert!(!f.contains(&Element::Residue(7)));
    }
}
