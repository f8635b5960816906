//! Exact algebraic objects, the mrdi document format, a process worker pool
//! that preloads ring contexts, and two parallel workloads built on them.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod ipc;
pub mod mrdi;
pub mod workloads;

pub use error::{Error, Result};
