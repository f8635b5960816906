//! Process worker pool speaking length-prefixed mrdi messages over pipes.

pub mod message;
pub mod pool;
pub mod registry;
pub mod worker;

pub use message::{decode_frames, encode_frame, read_message, write_message, Message, MessageKind};
pub use pool::{shutdown_pool, spawn_pool, TapEntry, WorkerCommand, WorkerPool, WorkerState};
pub use registry::{FunctionRegistry, RemoteFn};
pub use worker::{init_worker_logging, run_worker, Worker, WORKER_ID_ENV, WORKER_LOG_ENV};
