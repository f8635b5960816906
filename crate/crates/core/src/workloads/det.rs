//! Determinants of `ZZ[t]` matrices by reduction modulo many primes and a
//! coefficient-wise balanced CRT lift.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{
    det_univariate_over_prime_field, reduce_mod_prime, ContextHandle, CrtBasis, Element, ExactMatrix, Polynomial,
    RingDescriptor,
};
use crate::error::{Error, Result};
use crate::ipc::registry::arity;
use crate::ipc::WorkerPool;
use crate::mrdi::Value;

/// Primes are drawn descending from just below this bound.
pub const DEFAULT_PRIME_CEILING: u64 = 1 << 31;

#[derive(Clone, Debug)]
pub struct DetOptions {
    /// Stop once two further primes leave the lifted result unchanged,
    /// instead of when the provable bound is reached.
    pub heuristic: bool,
    /// Exclusive upper bound for the primes used.
    pub prime_ceiling: u64,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions {
            heuristic: false,
            prime_ceiling: DEFAULT_PRIME_CEILING,
        }
    }
}

/// Bookkeeping for one determinant run.
#[derive(Clone, Debug)]
pub struct DetJob {
    pub degree_bound: usize,
    pub coefficient_bound: BigInt,
    pub primes: Vec<u64>,
}

fn check_integer_poly_matrix(m: &ExactMatrix) -> Result<()> {
    match m.parent().descriptor() {
        RingDescriptor::Univariate { base, .. } if *base == ContextHandle::integers() => {}
        _ => return Err(Error::Validation(format!("expected a matrix over ZZ[t], got {}", m.parent()))),
    }
    if !m.is_square() {
        return Err(Error::Validation(format!("determinant of a non-square {}x{} matrix", m.rows(), m.cols())));
    }
    Ok(())
}

fn poly_entry(e: &Element) -> &Polynomial {
    e.as_poly().expect("entries of a polynomial-ring matrix are polynomials")
}

fn l1_norm(p: &Polynomial) -> BigInt {
    p.terms()
        .iter()
        .map(|(_, c)| c.as_integer().expect("integer coefficient").abs())
        .sum()
}

/// `B = prod_i sum_j |m[i][j]|_1`; bounds every coefficient of `det(m)`.
pub fn coefficient_bound(m: &ExactMatrix) -> Result<BigInt> {
    check_integer_poly_matrix(m)?;
    Ok((0..m.rows())
        .map(|i| m.row(i).iter().map(|e| l1_norm(poly_entry(e))).sum::<BigInt>())
        .product())
}

/// `D = sum_i max_j deg m[i][j]`; bounds the degree of `det(m)`.
pub fn degree_bound(m: &ExactMatrix) -> Result<usize> {
    check_integer_poly_matrix(m)?;
    Ok((0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|e| poly_entry(e).degree().unwrap_or(0) as usize)
                .max()
                .unwrap_or(0)
        })
        .sum())
}

/// Distinct primes below `ceiling`, all above `degree_bound`, descending,
/// with product exceeding `2 * bound`.
pub fn select_primes(ceiling: u64, degree_bound: usize, bound: &BigInt) -> Result<Vec<u64>> {
    let target = bound * 2u32;
    let mut product = BigInt::one();
    let mut out = Vec::new();
    let mut next = ceiling;
    while product <= target {
        let p = next_prime_below(next, degree_bound)?;
        product *= p;
        out.push(p);
        next = p;
    }
    Ok(out)
}

fn next_prime_below(bound: u64, degree_bound: usize) -> Result<u64> {
    crate::algebra::prime::prev_prime(bound)
        .filter(|&p| p > degree_bound as u64)
        .ok_or(Error::PrimesExhausted(bound))
}

/// `det(m mod p)` as dense residues, lowest degree first.
fn det_residues(m: &ExactMatrix, p: u64, degree_bound: usize) -> Result<Vec<u64>> {
    let det = det_univariate_over_prime_field(&reduce_mod_prime(m, p)?, degree_bound)?;
    let mut out = vec![0u64; degree_bound + 1];
    for (mono, c) in det.terms() {
        match c {
            Element::Residue(r) => out[mono.exponents()[0] as usize] = *r,
            _ => unreachable!("GF(p) coefficients"),
        }
    }
    Ok(out)
}

/// Worker entry point: `(matrix over ZZ[t], p, D) -> det(matrix mod p)` in `GF(p)[t]`.
pub fn det_mod_p_task(args: &[Value]) -> Result<Value> {
    arity("det_mod_p", args, 3)?;
    let m = args[0]
        .as_matrix()
        .ok_or_else(|| Error::Validation("det_mod_p expects a matrix".into()))?;
    let small = |v: &Value, what: &str| {
        v.as_integer()
            .and_then(|n| n.to_u64())
            .ok_or_else(|| Error::Validation(format!("det_mod_p expects a nonnegative integer {what}")))
    };
    let p = small(&args[1], "prime")?;
    let d = small(&args[2], "degree bound")? as usize;
    check_integer_poly_matrix(m)?;
    Ok(Value::Polynomial(det_univariate_over_prime_field(&reduce_mod_prime(m, p)?, d)?))
}

fn residues_from_value(v: &Value, p: u64, degree_bound: usize) -> Result<Vec<u64>> {
    let poly = v
        .as_polynomial()
        .filter(|q| q.parent().base().and_then(|b| b.modulus()) == Some(p))
        .ok_or_else(|| Error::Remote(format!("det_mod_p returned {} instead of a GF({p})[t] polynomial", v.kind())))?;
    let mut out = vec![0u64; degree_bound + 1];
    for (mono, c) in poly.terms() {
        let d = mono.exponents()[0] as usize;
        match c {
            Element::Residue(r) if d <= degree_bound => out[d] = *r,
            _ => return Err(Error::Remote("det_mod_p result exceeds the degree bound".into())),
        }
    }
    Ok(out)
}

fn compute_residues(
    m: &ExactMatrix,
    primes: &[u64],
    degree_bound: usize,
    pool: Option<&WorkerPool>,
) -> Result<Vec<Vec<u64>>> {
    match pool {
        None => primes.iter().map(|&p| det_residues(m, p, degree_bound)).collect(),
        Some(pool) => {
            let mv = Value::Matrix(m.clone());
            let dv = Value::from(degree_bound as i64);
            let items: Vec<Vec<Value>> = primes
                .iter()
                .map(|&p| vec![mv.clone(), Value::from(p as i64), dv.clone()])
                .collect();
            let values = pool.parallel_map("det_mod_p", &items)?;
            values
                .iter()
                .zip(primes)
                .map(|(v, &p)| residues_from_value(v, p, degree_bound))
                .collect()
        }
    }
}

fn lift(ring: &ContextHandle, primes: &[u64], residues: &[Vec<u64>], degree_bound: usize) -> Result<Polynomial> {
    let moduli: Vec<BigInt> = primes.iter().map(|&p| BigInt::from(p)).collect();
    let basis = CrtBasis::new(&moduli)?;
    let mut terms = Vec::new();
    for d in 0..=degree_bound {
        let rs: Vec<BigInt> = residues.iter().map(|r| BigInt::from(r[d])).collect();
        let c = basis.combine(&rs)?;
        if !c.is_zero() {
            terms.push((vec![d as u32], Element::Integer(c)));
        }
    }
    Polynomial::new(ring, terms)
}

/// `det(m)` over `ZZ[t]`, serially or across a worker pool.
pub fn modular_determinant(m: &ExactMatrix, pool: Option<&WorkerPool>) -> Result<Polynomial> {
    modular_determinant_with(m, pool, &DetOptions::default()).map(|(p, _)| p)
}

pub fn modular_determinant_with(
    m: &ExactMatrix,
    pool: Option<&WorkerPool>,
    options: &DetOptions,
) -> Result<(Polynomial, DetJob)> {
    let bound = coefficient_bound(m)?;
    let d = degree_bound(m)?;
    let ring = m.parent().clone();
    if bound.is_zero() {
        let job = DetJob {
            degree_bound: d,
            coefficient_bound: bound,
            primes: vec![],
        };
        return Ok((Polynomial::zero(&ring), job));
    }
    let primes = select_primes(options.prime_ceiling, d, &bound)?;
    if !options.heuristic {
        let residues = compute_residues(m, &primes, d, pool)?;
        let det = lift(&ring, &primes, &residues, d)?;
        let job = DetJob {
            degree_bound: d,
            coefficient_bound: bound,
            primes,
        };
        return Ok((det, job));
    }

    // Heuristic: process primes in batches and stop at the first prefix whose
    // lift agrees with the lifts after each of the next two primes. The batch
    // size only affects wasted work, never the chosen prefix.
    let batch = pool.map_or(1, |p| p.size()).max(3);
    let mut residues: Vec<Vec<u64>> = Vec::new();
    let mut lifts: Vec<Polynomial> = Vec::new();
    let mut done = 0;
    while done < primes.len() {
        let end = (done + batch).min(primes.len());
        residues.extend(compute_residues(m, &primes[done..end], d, pool)?);
        for k in done..end {
            lifts.push(lift(&ring, &primes[..=k], &residues[..=k], d)?);
            if k >= 2 && lifts[k] == lifts[k - 1] && lifts[k - 1] == lifts[k - 2] {
                let job = DetJob {
                    degree_bound: d,
                    coefficient_bound: bound,
                    primes: primes[..=k - 2].to_vec(),
                };
                return Ok((lifts.swap_remove(k - 2), job));
            }
        }
        done = end;
    }
    let det = lifts.pop().expect("at least one prime");
    let job = DetJob {
        degree_bound: d,
        coefficient_bound: bound,
        primes,
    };
    Ok((det, job))
}
