//! The `mrdi` command-line front end.
//!
//! Exit codes: 0 success, 1 semantic failure, 2 bad input, 3 distributed
//! failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::algebra::{ExactMatrix, MonomialMap};
use crate::error::Error;
use crate::ipc::{WorkerCommand, WorkerPool};
use crate::mrdi::{
    load_value, parse_text, parse_text_unchecked, save_bytes, validate_document, GlobalSerializerState, Mode, Value,
};
use crate::workloads::{self, DetOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SEMANTIC: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_DISTRIBUTED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mrdi", version, about = "Serialize exact algebraic objects and run parallel workloads on them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load and re-save a file, checking the bytes are unchanged.
    Roundtrip { path: PathBuf },
    /// Check a file's structure and references.
    Validate { path: PathBuf },
    /// Determinant of a matrix over ZZ[t] by primes and CRT.
    Detcrt {
        #[arg(long)]
        matrix: PathBuf,
        /// Worker processes; 0 runs serially.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Stop when two further primes leave the result unchanged.
        #[arg(long)]
        heuristic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Kernel components of a monomial map up to a total degree.
    Kernel {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Emit every kernel basis vector instead of dropping those generated
        /// by lower degrees.
        #[arg(long)]
        no_minimalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run a seeded synthetic instance at several worker counts.
    Bench {
        /// `detcrt-synthetic` or `kernel-synthetic`.
        #[arg(long)]
        suite: String,
        /// Comma-separated worker counts.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = workloads::SYNTHETIC_SEED)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

/// One timed workload run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub workload: String,
    pub input_digest: String,
    pub workers: usize,
    pub wall_seconds: f64,
    pub result_digest: String,
    pub result_path: Option<PathBuf>,
}

impl RunReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "workload": self.workload,
            "input_digest": self.input_digest,
            "workers": self.workers,
            "wall_seconds": self.wall_seconds,
            "result_digest": self.result_digest,
            "result_path": self.result_path.as_ref().map(|p| p.display().to_string()),
        })
    }

    pub fn header() -> String {
        format!("{:<18} {:>7} {:>10}  {:<16} {:<16} {}", "workload", "workers", "wall_s", "input", "result", "path")
    }

    pub fn line(&self) -> String {
        format!(
            "{:<18} {:>7} {:>10.3}  {:<16} {:<16} {}",
            self.workload,
            self.workers,
            self.wall_seconds,
            &self.input_digest[..16],
            &self.result_digest[..16],
            self.result_path.as_ref().map_or("-".into(), |p| p.display().to_string())
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_BAD_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_distributed() { EXIT_DISTRIBUTED } else { EXIT_SEMANTIC };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_BAD_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let worker = match WorkerCommand::current_exe() {
        Ok(w) => w,
        Err(e) => {
            let _ = writeln!(err, "error: cannot locate worker executable: {e}");
            return EXIT_DISTRIBUTED;
        }
    };
    run_command(&cli.command, &worker, out, err)
}

/// Runs an already-parsed command with an explicit worker executable.
pub fn run_command(cmd: &Command, worker: &WorkerCommand, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let r = match cmd {
        Command::Roundtrip { path } => cmd_roundtrip(path, out),
        Command::Validate { path } => cmd_validate(path, out),
        Command::Detcrt { matrix, workers, heuristic, out: dest, json } => {
            cmd_detcrt(matrix, *workers, *heuristic, dest.as_deref(), *json, worker, out)
        }
        Command::Kernel { map, degree, workers, no_minimalize, out: dest, json } => {
            cmd_kernel(map, *degree, *workers, !*no_minimalize, dest.as_deref(), *json, worker, out)
        }
        Command::Bench { suite, workers, seed, json } => cmd_bench(suite, workers, *seed, *json, worker, out),
    };
    match r {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_file(path: &Path, global: &GlobalSerializerState) -> std::result::Result<(Vec<u8>, Value), Failure> {
    let bytes = read(path)?;
    let doc = parse_text(&bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let value = load_value(&doc, global).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok((bytes, value))
}

fn cmd_roundtrip(path: &Path, out: &mut dyn Write) -> CmdResult {
    let global = GlobalSerializerState::new();
    let (original, value) = load_file(path, &global)?;
    let again = save_bytes(&value, Mode::LongTerm, &global)?;
    if again == original {
        return Ok(());
    }
    let a = String::from_utf8_lossy(&original);
    let b = String::from_utf8_lossy(&again);
    let (line, left, right) = a
        .lines()
        .chain(std::iter::repeat(""))
        .zip(b.lines().chain(std::iter::repeat("")))
        .enumerate()
        .take(a.lines().count().max(b.lines().count()) + 1)
        .find(|(_, (x, y))| x != y)
        .map(|(i, (x, y))| (i + 1, x.to_string(), y.to_string()))
        .unwrap_or((0, String::new(), String::new()));
    let _ = writeln!(out, "not canonical: first difference at line {line}");
    let _ = writeln!(out, "- {left}");
    let _ = writeln!(out, "+ {right}");
    Err(Failure { code: EXIT_SEMANTIC, message: format!("{} does not round-trip byte-identically", path.display()) })
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> CmdResult {
    let bytes = read(path)?;
    let doc = match parse_text_unchecked(&bytes) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(out, "/: {e}");
            return Err(Failure { code: EXIT_SEMANTIC, message: format!("{} is not a valid document", path.display()) });
        }
    };
    match validate_document(&doc) {
        Ok(()) => Ok(()),
        Err(issues) => {
            for i in &issues {
                let _ = writeln!(out, "{i}");
            }
            Err(Failure {
                code: EXIT_SEMANTIC,
                message: format!("{}: {} problem(s)", path.display(), issues.len()),
            })
        }
    }
}

fn spawn(workers: usize, command: &WorkerCommand, global: &Arc<GlobalSerializerState>) -> std::result::Result<Option<WorkerPool>, Failure> {
    if workers == 0 {
        return Ok(None);
    }
    WorkerPool::spawn(workers, command, global.clone())
        .map(Some)
        .map_err(|e| Failure { code: EXIT_DISTRIBUTED, message: e.to_string() })
}

fn write_result(dest: Option<&Path>, bytes: &[u8]) -> CmdResult {
    if let Some(p) = dest {
        std::fs::write(p, bytes).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn print_reports(reports: &[RunReport], json: bool, out: &mut dyn Write) {
    if json {
        let arr: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
        let _ = writeln!(out, "{}", serde_json::Value::Array(arr));
    } else {
        let _ = writeln!(out, "{}", RunReport::header());
        for r in reports {
            let _ = writeln!(out, "{}", r.line());
        }
    }
}

fn expect_det_input(v: Value) -> std::result::Result<ExactMatrix, Failure> {
    let m = match v {
        Value::Matrix(m) => m,
        other => return Err(Failure::input(format!("expected a matrix, found a {}", other.kind()))),
    };
    workloads::degree_bound(&m).map_err(|e| Failure::input(e.to_string()))?;
    Ok(m)
}

fn run_det(
    m: &ExactMatrix,
    pool: Option<&WorkerPool>,
    heuristic: bool,
    global: &GlobalSerializerState,
) -> std::result::Result<(Vec<u8>, f64), Failure> {
    let start = Instant::now();
    let options = DetOptions { heuristic, ..DetOptions::default() };
    let (det, _) = workloads::modular_determinant_with(m, pool, &options)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((save_bytes(&Value::Polynomial(det), Mode::LongTerm, global)?, secs))
}

fn cmd_detcrt(
    path: &Path,
    workers: usize,
    heuristic: bool,
    dest: Option<&Path>,
    json: bool,
    command: &WorkerCommand,
    out: &mut dyn Write,
) -> CmdResult {
    let global = Arc::new(GlobalSerializerState::new());
    let (input, value) = load_file(path, &global)?;
    let m = expect_det_input(value)?;
    let pool = spawn(workers, command, &global)?;
    let (bytes, secs) = run_det(&m, pool.as_ref(), heuristic, &global)?;
    write_result(dest, &bytes)?;
    let report = RunReport {
        workload: "detcrt".into(),
        input_digest: sha256_hex(&input),
        workers,
        wall_seconds: secs,
        result_digest: sha256_hex(&bytes),
        result_path: dest.map(Path::to_path_buf),
    };
    print_reports(&[report], json, out);
    Ok(())
}

fn expect_map(v: Value) -> std::result::Result<MonomialMap, Failure> {
    match v {
        Value::MonomialMap(m) => Ok(m),
        other => Err(Failure::input(format!("expected a monomial map, found a {}", other.kind()))),
    }
}

fn run_kernel(
    phi: &MonomialMap,
    degree: u32,
    pool: Option<&WorkerPool>,
    minimalize: bool,
    global: &GlobalSerializerState,
) -> std::result::Result<(Vec<u8>, f64), Failure> {
    let start = Instant::now();
    let comps = workloads::components_of_kernel(phi, degree, pool, minimalize)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((save_bytes(&workloads::components_to_value(&comps), Mode::LongTerm, global)?, secs))
}

#[allow(clippy::too_many_arguments)]
fn cmd_kernel(
    path: &Path,
    degree: u32,
    workers: usize,
    minimalize: bool,
    dest: Option<&Path>,
    json: bool,
    command: &WorkerCommand,
    out: &mut dyn Write,
) -> CmdResult {
    if degree == 0 {
        return Err(Failure::input("--degree must be at least 1"));
    }
    let global = Arc::new(GlobalSerializerState::new());
    let (input, value) = load_file(path, &global)?;
    let phi = expect_map(value)?;
    let pool = spawn(workers, command, &global)?;
    let (bytes, secs) = run_kernel(&phi, degree, pool.as_ref(), minimalize, &global)?;
    write_result(dest, &bytes)?;
    let report = RunReport {
        workload: "kernel".into(),
        input_digest: sha256_hex(&input),
        workers,
        wall_seconds: secs,
        result_digest: sha256_hex(&bytes),
        result_path: dest.map(Path::to_path_buf),
    };
    print_reports(&[report], json, out);
    Ok(())
}

/// Binds the contexts of `v` to UUIDs drawn from `seed`, so that synthetic
/// instances and their results serialize identically across runs.
pub fn bind_seeded_uuids(v: &Value, seed: u64, global: &GlobalSerializerState) -> crate::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7575_6964);
    for c in v.contexts() {
        if global.uuid_of(&c).is_some() || !crate::mrdi::state::needs_ref(&c) {
            continue;
        }
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        global.bind(uuid::Builder::from_random_bytes(bytes).into_uuid(), &c)?;
    }
    Ok(())
}

/// Runs a synthetic suite once per worker count. Pools are started before
/// the clock and stopped after it.
pub fn bench_reports(
    suite: &str,
    worker_counts: &[usize],
    seed: u64,
    command: &WorkerCommand,
) -> crate::Result<Option<Vec<RunReport>>> {
    let global = Arc::new(GlobalSerializerState::new());
    let (name, instance) = match suite {
        "detcrt-synthetic" => ("detcrt-synthetic", Value::Matrix(workloads::detcrt_synthetic(seed)?)),
        "kernel-synthetic" => ("kernel-synthetic", Value::MonomialMap(workloads::kernel_synthetic(seed)?)),
        _ => return Ok(None),
    };
    bind_seeded_uuids(&instance, seed, &global)?;
    let input_digest = sha256_hex(&save_bytes(&instance, Mode::LongTerm, &global)?);
    let mut reports = Vec::new();
    for &n in worker_counts {
        let pool = if n == 0 { None } else { Some(WorkerPool::spawn(n, command, global.clone())?) };
        let r = match &instance {
            Value::Matrix(m) => run_det(m, pool.as_ref(), false, &global),
            Value::MonomialMap(phi) => run_kernel(phi, workloads::synthetic::KERNEL_DEGREE, pool.as_ref(), true, &global),
            _ => unreachable!(),
        };
        let (bytes, secs) = r.map_err(|f| match f.code {
            EXIT_DISTRIBUTED => Error::Transport(f.message),
            _ => Error::Validation(f.message),
        })?;
        reports.push(RunReport {
            workload: name.into(),
            input_digest: input_digest.clone(),
            workers: n,
            wall_seconds: secs,
            result_digest: sha256_hex(&bytes),
            result_path: None,
        });
    }
    Ok(Some(reports))
}

fn cmd_bench(
    suite: &str,
    workers: &[usize],
    seed: u64,
    json: bool,
    command: &WorkerCommand,
    out: &mut dyn Write,
) -> CmdResult {
    let mut counts = workers.to_vec();
    counts.sort_unstable();
    counts.dedup();
    match bench_reports(suite, &counts, seed, command)? {
        None => Err(Failure::input(format!(
            "unknown suite `{suite}` (expected detcrt-synthetic or kernel-synthetic)"
        ))),
        Some(reports) => {
            print_reports(&reports, json, out);
            Ok(())
        }
    }
}
