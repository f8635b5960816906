//! Kernel components of a monomial map, computed one multidegree at a time.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::algebra::grading::{monomials_of_degree, multidegree_of};
use crate::algebra::linalg::{nullspace_from_rref, rref_in_place, EchelonBasis, QVector};
use crate::algebra::{monomials_by_multidegree, Element, Monomial, MonomialMap, Multidegree, Polynomial};
use crate::error::{Error, Result};
use crate::ipc::registry::arity;
use crate::ipc::WorkerPool;
use crate::mrdi::Value;

pub type KernelComponents = BTreeMap<Multidegree, Vec<Polynomial>>;

/// One independent task: the part of the kernel spanned by `group`, a set of
/// same-degree monomials sharing one multidegree.
///
/// With `minimalize`, kernel vectors already in the span of `g * m` for the
/// given lower-degree generators `g` and monomials `m` are dropped.
pub fn kernel_block(
    phi: &MonomialMap,
    group: &[Monomial],
    generators: &[Polynomial],
    minimalize: bool,
) -> Result<Vec<Polynomial>> {
    let Some(first) = group.first() else {
        return Ok(Vec::new());
    };
    let source = phi.source();
    let t = first.total_degree();
    let degs = phi.variable_degrees();
    let alpha = multidegree_of(first, &degs);

    // Rows: target monomials; columns: group monomials.
    let images: Vec<(BigRational, Monomial)> = group.iter().map(|m| phi.image_of_monomial(m)).collect();
    let mut targets: Vec<&Monomial> = images.iter().map(|(_, mu)| mu).collect();
    targets.sort();
    targets.dedup();
    let mut rows: Vec<QVector> = targets
        .iter()
        .map(|mu| {
            images
                .iter()
                .map(|(c, m)| if m == *mu { c.clone() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    let pivots = rref_in_place(&mut rows, group.len());
    let kernel = nullspace_from_rref(&rows, &pivots, group.len());

    let index: BTreeMap<&Monomial, usize> = group.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let coordinates = |p: &Polynomial| -> Result<QVector> {
        let mut v = vec![BigRational::zero(); group.len()];
        for (m, c) in p.terms() {
            let i = index
                .get(m)
                .ok_or_else(|| Error::Validation(format!("product term {m:?} lies outside the multidegree {alpha}")))?;
            v[*i] = c.as_rational().expect("QQ coefficient").clone();
        }
        Ok(v)
    };

    let mut span = EchelonBasis::new();
    if minimalize {
        for g in generators {
            let Some((lead, _)) = g.terms().first() else { continue };
            let s = lead.total_degree();
            if s >= t || g.parent() != source {
                continue;
            }
            let beta = multidegree_of(lead, &degs);
            for m in monomials_of_degree(source.arity(), t - s) {
                let mut md = multidegree_of(&m, &degs);
                md.add_scaled(&beta, 1);
                if md != alpha {
                    continue;
                }
                let mono = Polynomial::term(source, m.exponents().to_vec(), Element::Rational(BigRational::from_integer(1.into())))?;
                span.insert(&coordinates(&g.mul(&mono)?)?);
            }
        }
    }

    let mut out = Vec::new();
    for v in kernel {
        if minimalize && !span.insert(&v) {
            continue;
        }
        let terms = group
            .iter()
            .zip(&v)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m.exponents().to_vec(), Element::Rational(c.clone())));
        out.push(Polynomial::new(source, terms)?);
    }
    Ok(out)
}

/// Worker entry point: `(phi, group monomials, generators, minimalize flag)`.
pub fn kernel_block_task(args: &[Value]) -> Result<Value> {
    arity("kernel_block", args, 4)?;
    let Value::MonomialMap(phi) = &args[0] else {
        return Err(Error::Validation("kernel_block expects a monomial map".into()));
    };
    let polys = |v: &Value, what: &str| -> Result<Vec<Polynomial>> {
        v.as_items()
            .ok_or_else(|| Error::Validation(format!("kernel_block expects a vector of {what}")))?
            .iter()
            .map(|x| {
                x.as_polynomial()
                    .cloned()
                    .ok_or_else(|| Error::Validation(format!("kernel_block expects a vector of {what}")))
            })
            .collect()
    };
    let group = polys(&args[1], "monomials")?
        .into_iter()
        .map(|p| match p.terms() {
            [(m, _)] => Ok(m.clone()),
            _ => Err(Error::Validation("group entries must be monomials".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let generators = polys(&args[2], "generators")?;
    let minimalize = args[3].as_integer().and_then(|n| n.to_u8()).map(|n| n != 0).unwrap_or(false);
    let out = kernel_block(phi, &group, &generators, minimalize)?;
    Ok(Value::Vector(out.into_iter().map(Value::Polynomial).collect()))
}

fn dominated(beta: &Multidegree, alpha: &Multidegree) -> bool {
    beta.components().iter().zip(alpha.components()).all(|(b, a)| b <= a)
}

/// Kernel elements of `phi` of total degree `1..=d`, grouped by multidegree.
/// Only multidegrees contributing at least one element appear.
pub fn components_of_kernel(
    phi: &MonomialMap,
    d: u32,
    pool: Option<&WorkerPool>,
    minimalize: bool,
) -> Result<KernelComponents> {
    if d == 0 {
        return Err(Error::Validation("total degree must be at least 1".into()));
    }
    let source = phi.source();
    let degs = phi.variable_degrees();
    let one = Element::Rational(BigRational::from_integer(1.into()));
    let mut out = KernelComponents::new();
    let mut generators: Vec<(Multidegree, Polynomial)> = Vec::new();
    for t in 1..=d {
        let groups: Vec<(Multidegree, Vec<Monomial>)> = monomials_by_multidegree(source, &degs, t)?
            .into_iter()
            .filter(|(_, g)| g.len() >= 2)
            .collect();
        // Variable degrees are exponent vectors, hence nonnegative, so only
        // generators of componentwise smaller multidegree can contribute.
        let relevant = |alpha: &Multidegree| -> Vec<Polynomial> {
            if !minimalize {
                return Vec::new();
            }
            generators
                .iter()
                .filter(|(beta, _)| dominated(beta, alpha))
                .map(|(_, g)| g.clone())
                .collect()
        };
        let results: Vec<Vec<Polynomial>> = match pool {
            None => groups
                .iter()
                .map(|(alpha, g)| kernel_block(phi, g, &relevant(alpha), minimalize))
                .collect::<Result<_>>()?,
            Some(pool) => {
                let phi_v = Value::MonomialMap(phi.clone());
                let flag = Value::Integer(BigInt::from(minimalize as u8));
                let items = groups
                    .iter()
                    .map(|(alpha, g)| {
                        let monos = g
                            .iter()
                            .map(|m| Polynomial::term(source, m.exponents().to_vec(), one.clone()).map(Value::Polynomial))
                            .collect::<Result<Vec<_>>>()?;
                        let gens = relevant(alpha).into_iter().map(Value::Polynomial).collect();
                        Ok(vec![phi_v.clone(), Value::Vector(monos), Value::Vector(gens), flag.clone()])
                    })
                    .collect::<Result<Vec<_>>>()?;
                pool.parallel_map("kernel_block", &items)?
                    .into_iter()
                    .map(|v| match v {
                        Value::Vector(items) => items
                            .into_iter()
                            .map(|x| match x {
                                Value::Polynomial(p) if p.parent() == source => Ok(p),
                                other => Err(Error::Remote(format!("kernel_block returned a {}", other.kind()))),
                            })
                            .collect(),
                        other => Err(Error::Remote(format!("kernel_block returned a {}", other.kind()))),
                    })
                    .collect::<Result<_>>()?
            }
        };
        for ((alpha, _), found) in groups.into_iter().zip(results) {
            if found.is_empty() {
                continue;
            }
            generators.extend(found.iter().map(|g| (alpha.clone(), g.clone())));
            out.entry(alpha).or_default().extend(found);
        }
    }
    Ok(out)
}

/// Output form: a vector of `(multidegree, generators)` tuples in
/// multidegree order.
pub fn components_to_value(components: &KernelComponents) -> Value {
    Value::Vector(
        components
            .iter()
            .map(|(alpha, gens)| {
                Value::Tuple(vec![
                    Value::Vector(alpha.components().iter().map(|&c| Value::from(c)).collect()),
                    Value::Vector(gens.iter().cloned().map(Value::Polynomial).collect()),
                ])
            })
            .collect(),
    )
}
