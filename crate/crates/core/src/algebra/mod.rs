//! Exact arithmetic and the algebraic objects that get serialized and shipped
//! between processes.

pub mod context;
pub mod crt;
pub mod det;
pub mod grading;
pub mod linalg;
pub mod map;
pub mod matrix;
pub mod poly;
pub mod prime;

pub use context::{intern_context, ContextHandle, Element, RingDescriptor};
pub use crt::{crt_combine_balanced, CrtBasis};
pub use det::det_univariate_over_prime_field;
pub use grading::{monomials_by_multidegree, Multidegree};
pub use linalg::{nullspace_over_q, rref_over_q, QVector};
pub use map::{evaluate_map, MonomialMap};
pub use matrix::{reduce_mod_prime, reduce_poly_mod_prime, ExactMatrix};
pub use poly::{Monomial, Polynomial};
