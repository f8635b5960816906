//! Seeded benchmark instances.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::matrix::int_poly_matrix;
use crate::algebra::map::rational_term;
use crate::algebra::{ContextHandle, ExactMatrix, MonomialMap};
use crate::error::Result;

pub const SYNTHETIC_SEED: u64 = 0x6d72_6469;
pub const DETCRT_SIZE: usize = 16;
pub const DETCRT_DEGREE: usize = 12;
pub const KERNEL_SOURCE_VARS: usize = 6;
pub const KERNEL_TARGET_VARS: usize = 3;
pub const KERNEL_DEGREE: u32 = 4;

/// A `size x size` matrix over `ZZ[t]` whose entries have degree exactly
/// `degree` and uniformly random 64-bit coefficients.
pub fn random_int_poly_matrix(seed: u64, size: usize, degree: usize) -> Result<ExactMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zt = ContextHandle::univariate(&ContextHandle::integers(), "t")?;
    let rows: Vec<Vec<Vec<i64>>> = (0..size)
        .map(|_| {
            (0..size)
                .map(|_| {
                    let mut c: Vec<i64> = (0..=degree).map(|_| rng.random()).collect();
                    while c[degree] == 0 {
                        c[degree] = rng.random();
                    }
                    c
                })
                .collect()
        })
        .collect();
    int_poly_matrix(&zt, &rows)
}

pub fn detcrt_synthetic(seed: u64) -> Result<ExactMatrix> {
    random_int_poly_matrix(seed, DETCRT_SIZE, DETCRT_DEGREE)
}

/// A monomial map from `n` variables `x0..` to `k` variables `s0..`, images
/// with exponents in `0..=max_exp` (never all zero) and coefficients in
/// `+-1..=5`.
pub fn random_monomial_map(seed: u64, n: usize, k: usize, max_exp: u32) -> Result<MonomialMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qq = ContextHandle::rationals();
    let xs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let ss: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    let source = ContextHandle::multivariate(&qq, &xs)?;
    let target = ContextHandle::multivariate(&qq, &ss)?;
    let images = (0..n)
        .map(|_| {
            let mut exps: Vec<u32> = vec![0; k];
            while exps.iter().all(|&e| e == 0) {
                exps = (0..k).map(|_| rng.random_range(0..=max_exp)).collect();
            }
            let mut c: i64 = rng.random_range(1..=5);
            if rng.random_bool(0.5) {
                c = -c;
            }
            rational_term(&target, BigRational::from_integer(c.into()), exps)
        })
        .collect::<Result<Vec<_>>>()?;
    MonomialMap::new(&source, &target, images)
}

pub fn kernel_synthetic(seed: u64) -> Result<MonomialMap> {
    random_monomial_map(seed, KERNEL_SOURCE_VARS, KERNEL_TARGET_VARS, 2)
}
