//! Coordinator side: a pool of child processes, each tracking which context
//! UUIDs it has already received.

use std::collections::HashSet;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use uuid::Uuid;

use super::message::{read_message, write_message, Message, ACK_ID};
use super::worker::WORKER_ID_ENV;
use crate::error::{Error, Result};
use crate::mrdi::{context_from_document, load_value, save_value, GlobalSerializerState, Mode, TypeNode, Value};

const SHUTDOWN_GRACE: Duration = Duration::from_secs(5);

/// How to start a worker process.
#[derive(Clone, Debug)]
pub struct WorkerCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
    /// Extra environment for the children, e.g. a log path.
    pub env: Vec<(String, String)>,
}

impl WorkerCommand {
    /// `<program> --worker`.
    pub fn new(program: impl Into<PathBuf>) -> Self {
        WorkerCommand {
            program: program.into(),
            args: vec!["--worker".into()],
            env: Vec::new(),
        }
    }

    /// The running executable in worker mode.
    pub fn current_exe() -> Result<Self> {
        Ok(Self::new(std::env::current_exe()?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkerState {
    Idle,
    Busy,
    Dead,
}

struct WorkerHandle {
    id: usize,
    child: Child,
    input: BufWriter<ChildStdin>,
    output: BufReader<ChildStdout>,
    known_contexts: HashSet<Uuid>,
}

enum Slot {
    Idle(Box<WorkerHandle>),
    Busy,
    Dead,
}

struct Slots {
    slots: Vec<Slot>,
    closed: bool,
    stopped: bool,
}

/// A sent message as recorded by the transport tap.
#[derive(Clone, Debug)]
pub struct TapEntry {
    pub worker: usize,
    pub message: Message,
}

pub struct WorkerPool {
    state: Mutex<Slots>,
    changed: Condvar,
    global: Arc<GlobalSerializerState>,
    next_call: AtomicU64,
    tap: Mutex<Option<Vec<TapEntry>>>,
    size: usize,
}

/// Spawns `n` workers running the current executable.
pub fn spawn_pool(n: usize) -> Result<WorkerPool> {
    WorkerPool::spawn(n, &WorkerCommand::current_exe()?, Arc::new(GlobalSerializerState::new()))
}

impl WorkerPool {
    pub fn spawn(n: usize, command: &WorkerCommand, global: Arc<GlobalSerializerState>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("a worker pool needs at least one worker".into()));
        }
        let mut workers: Vec<WorkerHandle> = Vec::with_capacity(n);
        for id in 0..n {
            match spawn_worker(id, command) {
                Ok(w) => workers.push(w),
                Err(e) => {
                    for mut w in workers {
                        let _ = w.child.kill();
                        let _ = w.child.wait();
                    }
                    return Err(e);
                }
            }
        }
        log::debug!("spawned {n} workers from {}", command.program.display());
        Ok(WorkerPool {
            state: Mutex::new(Slots {
                slots: workers.into_iter().map(|w| Slot::Idle(Box::new(w))).collect(),
                closed: false,
                stopped: false,
            }),
            changed: Condvar::new(),
            global,
            next_call: AtomicU64::new(ACK_ID + 1),
            tap: Mutex::new(None),
            size: n,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn global(&self) -> &Arc<GlobalSerializerState> {
        &self.global
    }

    pub fn worker_states(&self) -> Vec<WorkerState> {
        self.lock()
            .slots
            .iter()
            .map(|s| match s {
                Slot::Idle(_) => WorkerState::Idle,
                Slot::Busy => WorkerState::Busy,
                Slot::Dead => WorkerState::Dead,
            })
            .collect()
    }

    /// Starts recording every message the coordinator sends.
    pub fn enable_tap(&self) {
        *self.tap.lock().unwrap_or_else(|e| e.into_inner()) = Some(Vec::new());
    }

    pub fn tap_entries(&self) -> Vec<TapEntry> {
        self.tap.lock().unwrap_or_else(|e| e.into_inner()).clone().unwrap_or_default()
    }

    fn lock(&self) -> MutexGuard<'_, Slots> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn checkout(&self, which: Option<usize>) -> Result<Box<WorkerHandle>> {
        let mut s = self.lock();
        loop {
            if s.closed {
                return Err(Error::PoolClosed);
            }
            let candidates: Vec<usize> = match which {
                Some(i) if i >= s.slots.len() => {
                    return Err(Error::Validation(format!("no worker {i} in a pool of {}", s.slots.len())))
                }
                Some(i) => vec![i],
                None => (0..s.slots.len()).collect(),
            };
            if candidates.iter().all(|&i| matches!(s.slots[i], Slot::Dead)) {
                return Err(Error::Transport("no live workers".into()));
            }
            if let Some(&i) = candidates.iter().find(|&&i| matches!(s.slots[i], Slot::Idle(_))) {
                let Slot::Idle(w) = std::mem::replace(&mut s.slots[i], Slot::Busy) else {
                    unreachable!()
                };
                return Ok(w);
            }
            s = self.changed.wait(s).unwrap_or_else(|e| e.into_inner());
        }
    }

    fn checkin(&self, mut w: Box<WorkerHandle>, alive: bool) {
        let id = w.id;
        let slot = if alive {
            Slot::Idle(w)
        } else {
            log::warn!("worker {id} marked dead");
            let _ = w.child.kill();
            let _ = w.child.wait();
            Slot::Dead
        };
        self.lock().slots[id] = slot;
        self.changed.notify_all();
    }

    /// Runs `f` on a checked-out worker; transport failures retire it.
    fn with_worker<T>(&self, which: Option<usize>, f: impl FnOnce(&mut WorkerHandle) -> Result<T>) -> Result<T> {
        let mut w = self.checkout(which)?;
        let r = f(&mut w);
        let alive = !matches!(r, Err(Error::Transport(_)));
        self.checkin(w, alive);
        r
    }

    fn send(&self, w: &mut WorkerHandle, msg: Message) -> Result<()> {
        let r = write_message(&mut w.input, &msg);
        if let Some(tap) = self.tap.lock().unwrap_or_else(|e| e.into_inner()).as_mut() {
            tap.push(TapEntry { worker: w.id, message: msg });
        }
        r
    }

    fn receive(&self, w: &mut WorkerHandle) -> Result<Message> {
        read_message(&mut w.output)?.ok_or_else(|| Error::Transport(format!("worker {} closed its output", w.id)))
    }

    fn ensure_on(&self, w: &mut WorkerHandle, tree: &TypeNode) -> Result<usize> {
        let mut sent = 0;
        for u in self.global.post_order(tree)? {
            if w.known_contexts.contains(&u) {
                continue;
            }
            let doc = self.global.ref_document(u)?;
            self.send(w, Message::LoadContext { uuid: u, doc })?;
            match self.receive(w)? {
                Message::Result { id: ACK_ID, .. } => {}
                Message::Failure { error, .. } => return Err(Error::Remote(error)),
                other => return Err(Error::Transport(format!("unexpected {:?} reply to LoadContext", other.kind()))),
            }
            w.known_contexts.insert(u);
            sent += 1;
        }
        Ok(sent)
    }

    /// Sends every context reachable from `tree` that worker `worker` lacks,
    /// dependencies first. Returns the number of LoadContext messages sent.
    pub fn ensure_contexts(&self, worker: usize, tree: &TypeNode) -> Result<usize> {
        self.with_worker(Some(worker), |w| self.ensure_on(w, tree))
    }

    /// Calls `function` on the lowest-numbered idle worker.
    pub fn remote_call(&self, function: &str, args: &[Value]) -> Result<Value> {
        let args = Value::Tuple(args.to_vec());
        for c in args.contexts() {
            self.global.register_context(&c);
        }
        let doc = save_value(&args, Mode::Ipc, &self.global)?;
        self.with_worker(None, |w| {
            self.ensure_on(w, &doc.type_tree)?;
            let id = self.next_call.fetch_add(1, Ordering::Relaxed);
            self.send(w, Message::Call { id, function: function.to_string(), args: doc })?;
            match self.receive(w)? {
                Message::Result { id: rid, result, refs } if rid == id => {
                    for (u, ref_doc) in &refs {
                        if self.global.context(*u).is_none() {
                            let ctx = context_from_document(ref_doc, &format!("/_refs/{u}"), &mut |dep| {
                                self.global.context(dep).ok_or(Error::DanglingReference(dep))
                            })?;
                            self.global.bind(*u, &ctx)?;
                        }
                        w.known_contexts.insert(*u);
                    }
                    load_value(&result, &self.global)
                }
                Message::Failure { id: rid, error } if rid == id => Err(Error::Remote(error)),
                other => Err(Error::Transport(format!("unexpected {:?} reply to call {id}", other.kind()))),
            }
        })
    }

    /// Applies `function` to every argument list, dispatching dynamically to
    /// idle workers. Results keep input order. The first failure (by index)
    /// is reported once all in-flight calls have finished.
    pub fn parallel_map(&self, function: &str, items: &[Vec<Value>]) -> Result<Vec<Value>> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Value>>> = Mutex::new(vec![None; items.len()]);
        let failure: Mutex<Option<(usize, Error)>> = Mutex::new(None);
        let threads = self.size.min(items.len());
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(|| loop {
                    if failure.lock().unwrap().is_some() {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() {
                        break;
                    }
                    match self.remote_call(function, &items[i]) {
                        Ok(v) => results.lock().unwrap()[i] = Some(v),
                        Err(e) => {
                            let mut f = failure.lock().unwrap();
                            if f.as_ref().is_none_or(|(j, _)| i < *j) {
                                *f = Some((i, e));
                            }
                            break;
                        }
                    }
                });
            }
        });
        if let Some((index, e)) = failure.into_inner().unwrap() {
            return Err(match e {
                Error::PoolClosed => Error::PoolClosed,
                e => Error::MapItem { index, message: e.to_string() },
            });
        }
        Ok(results.into_inner().unwrap().into_iter().map(|v| v.expect("every item ran")).collect())
    }

    /// Waits for in-flight calls, then stops every worker. Idempotent.
    pub fn shutdown(&self) {
        let mut s = self.lock();
        s.closed = true;
        self.changed.notify_all();
        while s.slots.iter().any(|x| matches!(x, Slot::Busy)) {
            s = self.changed.wait(s).unwrap_or_else(|e| e.into_inner());
        }
        if s.stopped {
            return;
        }
        s.stopped = true;
        let workers: Vec<Box<WorkerHandle>> = s
            .slots
            .iter_mut()
            .filter_map(|x| match std::mem::replace(x, Slot::Dead) {
                Slot::Idle(w) => Some(w),
                _ => None,
            })
            .collect();
        drop(s);
        for mut w in workers {
            let _ = self.send(&mut w, Message::Shutdown);
            drop(w.input);
            let deadline = Instant::now() + SHUTDOWN_GRACE;
            loop {
                match w.child.try_wait() {
                    Ok(Some(_)) => break,
                    Ok(None) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(5)),
                    _ => {
                        log::warn!("worker {} unresponsive, killing", w.id);
                        let _ = w.child.kill();
                        let _ = w.child.wait();
                        break;
                    }
                }
            }
        }
    }
}

/// Free-function form of [`WorkerPool::shutdown`].
pub fn shutdown_pool(pool: &WorkerPool) {
    pool.shutdown()
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn spawn_worker(id: usize, command: &WorkerCommand) -> Result<WorkerHandle> {
    let mut child = Command::new(&command.program)
        .args(&command.args)
        .envs(command.env.iter().map(|(k, v)| (k, v)))
        .env(WORKER_ID_ENV, id.to_string())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::Transport(format!("cannot spawn {}: {e}", command.program.display())))?;
    let input = BufWriter::new(child.stdin.take().expect("piped stdin"));
    let output = BufReader::new(child.stdout.take().expect("piped stdout"));
    Ok(WorkerHandle {
        id,
        child,
        input,
        output,
        known_contexts: HashSet::new(),
    })
}
