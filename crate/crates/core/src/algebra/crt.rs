//! Chinese remaindering with a balanced (symmetric) lift.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Precomputed data for combining residues over a fixed set of moduli.
#[derive(Clone, Debug)]
pub struct CrtBasis {
    moduli: Vec<BigInt>,
    // prefix[i] = product of moduli[..i]; inverses[i] = prefix[i]^-1 mod moduli[i]
    prefix: Vec<BigInt>,
    inverses: Vec<BigInt>,
    product: BigInt,
}

impl CrtBasis {
    pub fn new(moduli: &[BigInt]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Validation("no moduli given".into()));
        }
        let mut prefix = Vec::with_capacity(moduli.len());
        let mut inverses = Vec::with_capacity(moduli.len());
        let mut product = BigInt::one();
        for m in moduli {
            if *m <= BigInt::one() {
                return Err(Error::Validation(format!("modulus {m} must exceed 1")));
            }
            let g = product.extended_gcd(m);
            if !g.gcd.is_one() {
                return Err(Error::Validation(format!(
                    "moduli are not pairwise coprime (gcd {} with {m})",
                    g.gcd
                )));
            }
            prefix.push(product.clone());
            inverses.push(g.x.mod_floor(m));
            product *= m;
        }
        Ok(CrtBasis {
            moduli: moduli.to_vec(),
            prefix,
            inverses,
            product,
        })
    }

    pub fn product(&self) -> &BigInt {
        &self.product
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    /// The unique `r` in `(-M/2, M/2]` congruent to each residue.
    pub fn combine(&self, residues: &[BigInt]) -> Result<BigInt> {
        if residues.len() != self.moduli.len() {
            return Err(Error::Validation(format!(
                "{} residues for {} moduli",
                residues.len(),
                self.moduli.len()
            )));
        }
        let mut r = BigInt::zero();
        for i in 0..self.moduli.len() {
            let m = &self.moduli[i];
            let delta = ((&residues[i] - &r) * &self.inverses[i]).mod_floor(m);
            r += delta * &self.prefix[i];
        }
        if (&r * 2u32) > self.product {
            r -= &self.product;
        }
        Ok(r)
    }
}

/// Combines `residues[i] mod moduli[i]` into the balanced representative
/// modulo the product of the moduli.
pub fn crt_combine_balanced(residues: &[BigInt], moduli: &[BigInt]) -> Result<BigInt> {
    if residues.len() != moduli.len() {
        return Err(Error::Validation(format!(
            "{} residues for {} moduli",
            residues.len(),
            moduli.len()
        )));
    }
    CrtBasis::new(moduli)?.combine(residues)
}

/// Balanced representative of `r` modulo `m`.
pub fn balanced_mod(r: &BigInt, m: &BigInt) -> BigInt {
    let mut x = r.mod_floor(m);
    if (&x * 2u32) > *m {
        x -= m;
    }
    x
}
