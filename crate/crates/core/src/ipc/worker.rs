//! The worker side of the protocol: a single-threaded read, dispatch, reply
//! loop over stdin and stdout.

use std::collections::HashSet;
use std::io::{Read, Write};

use uuid::Uuid;

use super::message::{read_message, write_message, Message, ACK_ID};
use super::registry::FunctionRegistry;
use crate::error::{Error, Result};
use crate::mrdi::{context_from_document, load_value, save_value, GlobalSerializerState, Mode, MrdiDocument, Value};

/// Environment variable naming an optional log file for workers. A `{id}`
/// placeholder is replaced by the worker id; otherwise `.<id>` is appended.
pub const WORKER_LOG_ENV: &str = "MRDI_WORKER_LOG";
/// Set by the pool on each child.
pub const WORKER_ID_ENV: &str = "MRDI_WORKER_ID";

pub struct Worker {
    registry: FunctionRegistry,
    global: GlobalSerializerState,
    /// Context UUIDs the coordinator is known to hold.
    coordinator_knows: HashSet<Uuid>,
}

impl Worker {
    pub fn new(registry: FunctionRegistry) -> Self {
        Worker {
            registry,
            global: GlobalSerializerState::new(),
            coordinator_knows: HashSet::new(),
        }
    }

    /// Handles one message; `None` means stop.
    pub fn handle(&mut self, msg: Message) -> Option<Message> {
        match msg {
            Message::LoadContext { uuid, doc } => Some(match self.load_context(uuid, &doc) {
                Ok(()) => Message::ack(),
                Err(e) => Message::Failure { id: ACK_ID, error: e.to_string() },
            }),
            Message::Call { id, function, args } => {
                log::debug!("call {id}: {function}");
                Some(match self.call(id, &function, &args) {
                    Ok(reply) => reply,
                    Err(e) => {
                        log::warn!("call {id} failed: {e}");
                        Message::Failure { id, error: e.to_string() }
                    }
                })
            }
            Message::Shutdown => None,
            other => Some(Message::Failure {
                id: ACK_ID,
                error: format!("unexpected {:?} message on worker", other.kind()),
            }),
        }
    }

    fn load_context(&mut self, uuid: Uuid, doc: &MrdiDocument) -> Result<()> {
        let global = &self.global;
        let ctx = context_from_document(doc, &format!("/{uuid}"), &mut |u| {
            global.context(u).ok_or_else(|| Error::ContextNotPreloaded(u.to_string()))
        })?;
        global.bind(uuid, &ctx)?;
        self.coordinator_knows.insert(uuid);
        log::debug!("loaded context {ctx} as {uuid}");
        Ok(())
    }

    fn call(&mut self, id: u64, function: &str, args: &MrdiDocument) -> Result<Message> {
        let items = match load_value(args, &self.global)? {
            Value::Tuple(items) => items,
            other => return Err(Error::Validation(format!("call arguments must be a tuple, got a {}", other.kind()))),
        };
        let value = self.registry.call(function, &items)?;
        for c in value.contexts() {
            self.global.register_context(&c);
        }
        let result = save_value(&value, Mode::Ipc, &self.global)?;
        let mut refs = Vec::new();
        for u in self.global.post_order(&result.type_tree)? {
            if self.coordinator_knows.insert(u) {
                refs.push((u, self.global.ref_document(u)?));
            }
        }
        Ok(Message::Result { id, result, refs })
    }
}

/// Runs the worker loop until Shutdown or end of input.
pub fn run_worker(registry: FunctionRegistry, input: &mut impl Read, output: &mut impl Write) -> Result<()> {
    let mut worker = Worker::new(registry);
    while let Some(msg) = read_message(input)? {
        match worker.handle(msg) {
            Some(reply) => write_message(output, &reply)?,
            None => break,
        }
    }
    log::debug!("worker exiting");
    Ok(())
}

/// Installs the file logger requested through the environment, if any.
pub fn init_worker_logging() {
    let Ok(path) = std::env::var(WORKER_LOG_ENV) else {
        return;
    };
    let id = std::env::var(WORKER_ID_ENV).unwrap_or_else(|_| "0".into());
    let path = if path.contains("{id}") { path.replace("{id}", &id) } else { format!("{path}.{id}") };
    let Ok(file) = std::fs::OpenOptions::new().create(true).append(true).open(&path) else {
        return;
    };
    let _ = env_logger::Builder::new()
        .filter_level(log::LevelFilter::Debug)
        .target(env_logger::Target::Pipe(Box::new(file)))
        .format(move |buf, record| writeln!(buf, "[worker {id}] {} {}", record.level(), record.args()))
        .try_init();
}
