//! The two parallel workloads, each runnable serially or over a worker pool.

pub mod det;
pub mod kernel;
pub mod synthetic;

pub use crate::algebra::evaluate_map;
pub use det::{
    coefficient_bound, degree_bound, det_mod_p_task, modular_determinant, modular_determinant_with, select_primes,
    DetJob, DetOptions,
};
pub use kernel::{components_of_kernel, components_to_value, kernel_block, kernel_block_task, KernelComponents};
pub use synthetic::{detcrt_synthetic, kernel_synthetic, SYNTHETIC_SEED};
