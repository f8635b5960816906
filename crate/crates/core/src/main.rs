use std::io::{self, BufReader, BufWriter};

use mrdi_core::ipc::{init_worker_logging, run_worker, FunctionRegistry};

fn main() {
    if std::env::args_os().nth(1).is_some_and(|a| a == "--worker") {
        init_worker_logging();
        let mut input = BufReader::new(io::stdin().lock());
        let mut output = BufWriter::new(io::stdout().lock());
        if let Err(e) = run_worker(FunctionRegistry::builtin(), &mut input, &mut output) {
            eprintln!("worker: {e}");
            std::process::exit(mrdi_core::cli::EXIT_DISTRIBUTED);
        }
        return;
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = mrdi_core::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
