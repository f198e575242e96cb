use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;
mod commands;

#[derive(Parser)]
#[command(
    name = "qmlcha",
    version,
    about = "Separable or entangled? Convex hull approximation plus bagged trees."
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QMLCHA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample random states, label them and write a QSDS file.
    GenData(commands::GenData),
    /// Sample pure product states and write a QHUL file.
    BuildHull(commands::BuildHull),
    /// Per-state alpha and label, CHA alone or BCHA with a model.
    Classify(commands::Classify),
    /// Train a BCHA committee and report its held-out error.
    Train(commands::Train),
    /// Iterative hull refinement around one state.
    CriticalPoint(commands::CriticalPoint),
    /// Regenerate one of the benchmark tables.
    Bench(bench::Bench),
}

/// Exit codes: 1 I/O, 2 invalid input, 3 numerical failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<qmlcha::Error>() {
            return match e {
                qmlcha::Error::Io(_) => 1,
                e if e.is_numerical() => 3,
                _ => 2,
            };
        }
        if cause.is::<commands::UsageError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        // Fails only if the pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = match cli.command {
        Command::GenData(a) => commands::gen_data(a),
        Command::BuildHull(a) => commands::build_hull(a),
        Command::Classify(a) => commands::classify(a),
        Command::Train(a) => commands::train(a),
        Command::CriticalPoint(a) => commands::critical_point(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
