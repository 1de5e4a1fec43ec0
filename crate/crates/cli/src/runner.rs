use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::experiments::find;
use crate::table::Table;

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Command-line values that take precedence over the run file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// The run file with every override and default filled in.
    pub config: RunConfig,
    pub table: Table,
    pub metadata: Vec<(String, String)>,
}

impl RunOutcome {
    pub fn output_path(&self) -> PathBuf {
        self.config.output.clone().expect("resolved by execute")
    }

    pub fn write(&self) -> Result<PathBuf, CliError> {
        let path = self.output_path();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        let file = std::fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.table.write_csv(std::io::BufWriter::new(file), &self.metadata)?;
        Ok(path)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Validates the run file, runs the experiment on a pool of the requested
/// size and assembles the metadata block. Nothing is written.
pub fn execute(config: RunConfig, overrides: &Overrides) -> Result<RunOutcome, CliError> {
    let experiment = find(&config.experiment)?;
    let seed = overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let workers = overrides.workers.or(config.workers).unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(CliError::Schema("workers must be at least 1".into()));
    }
    let output = overrides.out.clone().or(config.output.clone()).unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name)));
    let effective = RunConfig { seed: Some(seed), workers: Some(workers), output: Some(output), ..config };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let table = pool.install(|| experiment.run(&effective.params, seed))?;

    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let metadata = vec![
        ("tool".to_string(), format!("geophase {}", env!("CARGO_PKG_VERSION"))),
        ("experiment".to_string(), experiment.name.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("workers".to_string(), workers.to_string()),
        ("created_unix".to_string(), created.to_string()),
        ("rows".to_string(), table.rows.len().to_string()),
        ("config".to_string(), serde_json::to_string(&effective).expect("config serializes")),
    ];
    Ok(RunOutcome { config: effective, table, metadata })
}
