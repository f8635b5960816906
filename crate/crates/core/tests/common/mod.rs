//! Generators and independent oracles shared by the integration tests and
//! the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;

use mrdi_core::algebra::grading::multidegree_of;
use mrdi_core::algebra::map::rational_term;
use mrdi_core::algebra::{evaluate_map, ContextHandle, Element, ExactMatrix, Monomial, MonomialMap, Multidegree, Polynomial};
use mrdi_core::ipc::Message;
use mrdi_core::mrdi::{save_value, GlobalSerializerState, Mode, MrdiDocument, Value};
use mrdi_core::workloads::KernelComponents;
use uuid::Uuid;

pub const SMALL_PRIMES: [u64; 4] = [2, 7, 101, 2_147_483_647];

pub fn zz() -> ContextHandle {
    ContextHandle::integers()
}

pub fn qq() -> ContextHandle {
    ContextHandle::rationals()
}

pub fn zt() -> ContextHandle {
    ContextHandle::univariate(&zz(), "t").unwrap()
}

pub fn qq_ring(symbols: &[&str]) -> ContextHandle {
    ContextHandle::multivariate(&qq(), symbols).unwrap()
}

pub fn q(n: i64) -> Element {
    Element::Rational(BigRational::from_integer(n.into()))
}

pub fn z(n: i64) -> Element {
    Element::Integer(n.into())
}

pub fn worker_bin() -> mrdi_core::ipc::WorkerCommand {
    mrdi_core::ipc::WorkerCommand::new(env!("CARGO_BIN_EXE_mrdi"))
}

pub fn big(rng: &mut impl Rng, max_digits: usize) -> BigInt {
    let digits = rng.random_range(1..=max_digits);
    let mut s = String::with_capacity(digits + 1);
    if rng.random_bool(0.5) {
        s.push('-');
    }
    for _ in 0..digits {
        s.push(char::from(b'0' + rng.random_range(0..10u8)));
    }
    s.parse().unwrap()
}

/// A sample of every ring kind, including nesting.
pub fn random_ring(rng: &mut impl Rng) -> ContextHandle {
    let p = *SMALL_PRIMES.choose(rng).unwrap();
    let fp = ContextHandle::prime_field(p).unwrap();
    match rng.random_range(0..9) {
        0 => zz(),
        1 => qq(),
        2 => fp,
        3 => zt(),
        4 => qq_ring(&["x", "y"]),
        5 => ContextHandle::univariate(&fp, "t").unwrap(),
        6 => ContextHandle::univariate(&zt(), "u").unwrap(),
        7 => ContextHandle::multivariate(&zz(), &["a", "b", "c"]).unwrap(),
        _ => ContextHandle::multivariate(&ContextHandle::univariate(&qq(), "s").unwrap(), &["x", "y"]).unwrap(),
    }
}

pub fn random_element(rng: &mut impl Rng, ring: &ContextHandle) -> Element {
    use mrdi_core::algebra::RingDescriptor as R;
    match ring.descriptor() {
        R::Integers => Element::Integer(big(rng, 40)),
        R::Rationals => {
            let mut den = big(rng, 12);
            while den.is_zero() {
                den = big(rng, 12);
            }
            Element::Rational(BigRational::new(big(rng, 20), den))
        }
        R::PrimeField(p) => Element::Residue(rng.random_range(0..*p)),
        R::Univariate { .. } | R::Multivariate { .. } => Element::Poly(random_poly(rng, ring, 4, 5)),
    }
}

pub fn random_poly(rng: &mut impl Rng, ring: &ContextHandle, max_terms: usize, max_exp: u32) -> Polynomial {
    let base = ring.base().unwrap().clone();
    let n = rng.random_range(0..=max_terms);
    let terms: Vec<(Vec<u32>, Element)> = (0..n)
        .map(|_| {
            let exps = (0..ring.arity()).map(|_| rng.random_range(0..=max_exp)).collect();
            let depth_limited = if base.is_polynomial_ring() {
                Element::Poly(random_poly(rng, &base, 2, 3))
            } else {
                random_element(rng, &base)
            };
            (exps, depth_limited)
        })
        .collect();
    Polynomial::new(ring, terms).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, ring: &ContextHandle) -> ExactMatrix {
    let rows = rng.random_range(0..=3);
    let cols = rng.random_range(0..=3);
    let entries = (0..rows * cols).map(|_| random_element(rng, ring)).collect();
    ExactMatrix::new(ring, rows, cols, entries).unwrap()
}

pub fn random_monomial_map(rng: &mut impl Rng, n: usize, k: usize, max_exp: u32) -> MonomialMap {
    mrdi_core::workloads::synthetic::random_monomial_map(rng.next_u64(), n, k, max_exp).unwrap()
}

/// A value of a randomly chosen registered type.
pub fn random_value(rng: &mut impl Rng, depth: u32) -> Value {
    let top = if depth == 0 { 7 } else { 9 };
    match rng.random_range(0..top) {
        0 => Value::Integer(big(rng, 60)),
        1 => Value::from_element(&qq(), random_element(rng, &qq())),
        2 => {
            let p = *SMALL_PRIMES.choose(rng).unwrap();
            let f = ContextHandle::prime_field(p).unwrap();
            Value::from_element(&f, random_element(rng, &f))
        }
        3 | 4 => {
            let mut ring = random_ring(rng);
            while !ring.is_polynomial_ring() {
                ring = random_ring(rng);
            }
            Value::Polynomial(random_poly(rng, &ring, 5, 6))
        }
        5 => {
            let ring = random_ring(rng);
            Value::Matrix(random_matrix(rng, &ring))
        }
        6 => {
            if rng.random_bool(0.5) {
                Value::Ring(random_ring(rng))
            } else {
                let n = rng.random_range(1..=4);
                let k = rng.random_range(1..=3);
                Value::MonomialMap(random_monomial_map(rng, n, k, 3))
            }
        }
        7 => {
            // Homogeneous: every item drawn from one ring and kind.
            let ring = random_ring(rng);
            let len = rng.random_range(0..=4);
            let as_matrix = rng.random_bool(0.3);
            Value::Vector(
                (0..len)
                    .map(|_| {
                        if as_matrix {
                            Value::Matrix(random_matrix(rng, &ring))
                        } else {
                            Value::from_element(&ring, random_element(rng, &ring))
                        }
                    })
                    .collect(),
            )
        }
        _ => {
            let len = rng.random_range(0..=3);
            Value::Tuple((0..len).map(|_| random_value(rng, depth - 1)).collect())
        }
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &ExactMatrix) -> Polynomial {
    let ring = m.parent().clone();
    let n = m.rows();
    let rows: Vec<Vec<Polynomial>> = (0..n)
        .map(|i| m.row(i).iter().map(|e| e.as_poly().unwrap().clone()).collect())
        .collect();
    fn rec(rows: &[Vec<Polynomial>], cols: &[usize], ring: &ContextHandle) -> Polynomial {
        if cols.is_empty() {
            return Polynomial::one(ring);
        }
        let mut acc = Polynomial::zero(ring);
        for (k, &c) in cols.iter().enumerate() {
            let entry = &rows[0][c];
            if entry.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = rec(&rows[1..], &rest, ring);
            let term = entry.mul(&minor).unwrap();
            acc = if k % 2 == 0 { acc.add(&term).unwrap() } else { acc.sub(&term).unwrap() };
        }
        acc
    }
    rec(&rows, &(0..n).collect::<Vec<_>>(), &ring)
}

/// A random square matrix over `ZZ[t]`.
pub fn random_zt_matrix(rng: &mut impl Rng, max_n: usize, max_deg: u32, max_coeff: i64) -> ExactMatrix {
    let n = rng.random_range(1..=max_n);
    let ring = zt();
    let entries = (0..n * n)
        .map(|_| {
            if rng.random_bool(0.1) {
                return Element::Poly(Polynomial::zero(&ring));
            }
            let deg = rng.random_range(0..=max_deg);
            let terms: Vec<(Vec<u32>, Element)> = (0..=deg)
                .map(|d| (vec![d], z(rng.random_range(-max_coeff..=max_coeff))))
                .collect();
            Element::Poly(Polynomial::new(&ring, terms).unwrap())
        })
        .collect();
    ExactMatrix::new(&ring, n, n, entries).unwrap()
}

/// Rank over QQ by plain fraction Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                for j in 0..ncols {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Image of a source polynomial under `phi`, by direct substitution over
/// exponent vectors.
pub fn substitute(phi: &MonomialMap, p: &Polynomial) -> BTreeMap<Vec<u32>, BigRational> {
    let mut out: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    let k = phi.target().arity();
    for (m, c) in p.terms() {
        let mut coeff = c.as_rational().unwrap().clone();
        let mut exps = vec![0u32; k];
        for (i, &e) in m.exponents().iter().enumerate() {
            let (tm, tc) = &phi.images()[i].terms()[0];
            for _ in 0..e {
                coeff *= tc.as_rational().unwrap();
            }
            for (x, y) in exps.iter_mut().zip(tm.exponents()) {
                *x += y * e;
            }
        }
        *out.entry(exps).or_insert_with(BigRational::zero) += coeff;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// All exponent vectors of length `n` and total degree `t`.
pub fn all_monomials(n: usize, t: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if t == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for e in 0..=t {
        for mut rest in all_monomials(n - 1, t - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

/// Brute-force kernel dimension per (total degree, multidegree) of `phi`.
pub fn kernel_dimensions(phi: &MonomialMap, d: u32) -> BTreeMap<(u32, Vec<i64>), (Vec<Vec<u32>>, usize)> {
    let n = phi.source().arity();
    let degs: Vec<Vec<i64>> = phi
        .images()
        .iter()
        .map(|img| img.terms()[0].0.exponents().iter().map(|&e| e as i64).collect())
        .collect();
    let k = phi.target().arity();
    let mut out = BTreeMap::new();
    for t in 1..=d {
        let mut groups: BTreeMap<Vec<i64>, Vec<Vec<u32>>> = BTreeMap::new();
        for m in all_monomials(n, t) {
            let mut md = vec![0i64; k];
            for (i, &e) in m.iter().enumerate() {
                for j in 0..k {
                    md[j] += degs[i][j] * e as i64;
                }
            }
            groups.entry(md).or_default().push(m);
        }
        for (md, monos) in groups {
            // Columns: monomials; rows: image target monomials.
            let images: Vec<BTreeMap<Vec<u32>, BigRational>> = monos
                .iter()
                .map(|m| {
                    let p = Polynomial::new(phi.source(), vec![(m.clone(), q(1))]).unwrap();
                    substitute(phi, &p)
                })
                .collect();
            let mut targets: Vec<Vec<u32>> = images.iter().flat_map(|im| im.keys().cloned()).collect();
            targets.sort();
            targets.dedup();
            let rows: Vec<Vec<BigRational>> = targets
                .iter()
                .map(|tm| images.iter().map(|im| im.get(tm).cloned().unwrap_or_else(BigRational::zero)).collect())
                .collect();
            let dim = monos.len() - rank(rows);
            out.insert((t, md), (monos, dim));
        }
    }
    out
}

/// Coordinates of `p` against the monomial list `basis`.
pub fn coordinates(p: &Polynomial, basis: &[Vec<u32>]) -> Vec<BigRational> {
    basis
        .iter()
        .map(|m| {
            p.coefficient(&Monomial::new(m.clone()))
                .as_rational()
                .cloned()
                .unwrap_or_else(BigRational::zero)
        })
        .collect()
}

pub fn is_one(x: &BigRational) -> bool {
    x.is_one()
}

pub fn abs_max_coeff(p: &Polynomial) -> BigInt {
    p.terms()
        .iter()
        .map(|(_, c)| c.as_integer().unwrap().abs())
        .max()
        .unwrap_or_else(BigInt::zero)
}

/// Monomial map with unit coefficients given by image exponent vectors.
pub fn map(src: &[&str], tgt: &[&str], images: &[Vec<u32>]) -> MonomialMap {
    let s = qq_ring(src);
    let t = qq_ring(tgt);
    let imgs = images
        .iter()
        .map(|e| rational_term(&t, BigRational::from_integer(1.into()), e.clone()).unwrap())
        .collect();
    MonomialMap::new(&s, &t, imgs).unwrap()
}

pub fn twisted_conic() -> MonomialMap {
    map(&["x", "y", "z"], &["s", "t"], &[vec![2, 0], vec![1, 1], vec![0, 2]])
}

pub fn segre() -> MonomialMap {
    map(
        &["x11", "x12", "x21", "x22"],
        &["s1", "s2", "t1", "t2"],
        &[vec![1, 0, 1, 0], vec![1, 0, 0, 1], vec![0, 1, 1, 0], vec![0, 1, 0, 1]],
    )
}


/// Asserts the components are kernel elements of the right multidegree that,
/// together with multiples of lower generators when minimalized, span each
/// brute-force kernel block.
pub fn check_kernel_against_oracle(phi: &MonomialMap, d: u32, comps: &KernelComponents, minimalized: bool) {
    let dims = kernel_dimensions(phi, d);
    let degs = phi.variable_degrees();
    for (md, gens) in comps {
        for g in gens {
            assert!(evaluate_map(phi, g).unwrap().is_zero());
            assert!(substitute(phi, g).is_empty());
            for (m, _) in g.terms() {
                assert_eq!(&multidegree_of(m, &degs), md);
            }
        }
    }
    let mut lower: Vec<Polynomial> = Vec::new();
    for ((t, md), (monos, dim)) in &dims {
        let found: Vec<&Polynomial> = comps
            .get(&Multidegree(md.clone()))
            .map(|v| v.iter().filter(|p| p.total_degree() == Some(*t)).collect())
            .unwrap_or_default();
        let mut rows: Vec<Vec<BigRational>> = found.iter().map(|p| coordinates(p, monos)).collect();
        assert_eq!(rank(rows.clone()), found.len(), "emitted elements are independent");
        if minimalized {
            // Lower generators times monomials fill in the rest of the kernel.
            for g in &lower {
                let s = g.total_degree().unwrap();
                if s >= *t {
                    continue;
                }
                for m in all_monomials(phi.source().arity(), t - s) {
                    let mono = Polynomial::new(phi.source(), vec![(m, q(1))]).unwrap();
                    let prod = g.mul(&mono).unwrap();
                    if prod.terms().iter().all(|(pm, _)| monos.contains(&pm.exponents().to_vec())) {
                        rows.push(coordinates(&prod, monos));
                    }
                }
            }
        }
        assert_eq!(rank(rows), *dim, "degree {t}, multidegree {md:?}");
        lower.extend(found.into_iter().cloned());
    }
}


fn arbitrary_doc(rng: &mut impl Rng, g: &GlobalSerializerState) -> MrdiDocument {
    let v = random_value(rng, 1);
    for c in v.contexts() {
        g.register_context(&c);
    }
    save_value(&v, Mode::Ipc, g).unwrap()
}

fn arbitrary_ref(rng: &mut impl Rng, g: &GlobalSerializerState) -> (Uuid, MrdiDocument) {
    loop {
        let ring = random_ring(rng);
        if let Ok(doc) = g.ref_document(g.register_context(&ring)) {
            return (g.uuid_of(&ring).unwrap(), doc);
        }
    }
}

pub fn arbitrary_message(rng: &mut impl Rng) -> Message {
    let g = GlobalSerializerState::new();
    match rng.random_range(0..5) {
        0 => {
            let (uuid, doc) = arbitrary_ref(rng, &g);
            Message::LoadContext { uuid, doc }
        }
        1 => Message::Call {
            id: rng.random(),
            function: format!("fn_{}\u{e9}\"\\", rng.random::<u16>()),
            args: arbitrary_doc(rng, &g),
        },
        2 => {
            let n = rng.random_range(0..3);
            let mut refs: Vec<(Uuid, MrdiDocument)> = Vec::new();
            for _ in 0..n {
                let r = arbitrary_ref(rng, &g);
                if !refs.iter().any(|(u, _)| *u == r.0) {
                    refs.push(r);
                }
            }
            Message::Result { id: rng.random(), result: arbitrary_doc(rng, &g), refs }
        }
        3 => Message::Failure { id: rng.random(), error: format!("boom \n\t{}", rng.random::<i64>()) },
        _ => Message::Shutdown,
    }
}

