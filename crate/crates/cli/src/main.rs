use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geophase_cli::{acceptance, execute, registry, CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "geophase", version, about = "Geometric phase and holonomy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file and write a CSV table.
    Run {
        config: PathBuf,
        /// Overrides the seed in the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweep points.
        #[arg(long)]
        workers: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show the registered experiments and their parameters.
    List {
        /// Print the registry as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the quick acceptance checks.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}

fn list(json: bool) {
    if json {
        let entries: Vec<_> = registry()
            .iter()
            .map(|e| serde_json::json!({ "name": e.name, "summary": e.summary, "params": e.params }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&entries).expect("registry serializes"));
        return;
    }
    for e in registry() {
        println!("{}\n    {}", e.name, e.summary);
        for p in e.params {
            let default = p.default.map(|d| format!(" (default {d})")).unwrap_or_default();
            println!("    {:<20} {}{}: {}", p.name, p.kind, default, p.doc);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, workers, out } => {
            let result = RunConfig::load(&config).and_then(|c| execute(c, &Overrides { seed, workers, out })).and_then(|o| o.write());
            match result {
                Ok(path) => {
                    println!("{}", serde_json::json!({ "status": "ok", "output": path }));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::List { json } => {
            list(json);
            ExitCode::SUCCESS
        }
        Command::Selftest { seed, workers } => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build() {
                Ok(p) => p,
                Err(e) => return fail(&CliError::Io(e.to_string())),
            };
            let checks = pool.install(|| acceptance::selftest(seed.unwrap_or(geophase_cli::runner::DEFAULT_SEED)));
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
