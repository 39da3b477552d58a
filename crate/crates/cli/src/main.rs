mod config;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{read_config_file, CliError, Command, RunConfig, THREADS_ENV};

/// Family sweeps of L'/L(1/2+eps, chi_D) and the random Euler product model.
///
/// Settings come from flags, optionally layered over a `key = value` file
/// given with --config (flags win). Exit status: 1 bad configuration,
/// 2 resource limit, 3 I/O failure.
#[derive(Debug, Parser)]
#[command(name = "quadlab", version)]
struct Cli {
    command: Command,
    /// Offset from the central point, in (0, 1/2) [default: 0.25]
    #[arg(long)]
    eps: Option<String>,
    /// Family size, or an increasing comma-separated list [default: 10000]
    #[arg(long = "N")]
    n: Option<String>,
    /// Cutoff policy: `default` (N^0.6), `pow:<a>` (N^a), or a half-integer
    #[arg(long)]
    lambda: Option<String>,
    /// Largest prime in the model [default: 100000]
    #[arg(long = "prime-cutoff")]
    prime_cutoff: Option<String>,
    /// Model sample count [default: 100000]
    #[arg(long)]
    samples: Option<String>,
    /// [default: 42]
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads; falls back to QUADLAB_THREADS
    #[arg(long)]
    threads: Option<String>,
    /// Artifact directory [default: quadlab-out]
    #[arg(long)]
    out: Option<String>,
    /// Keep D = 1 in the family (true/false) [default: true]
    #[arg(long = "include-d1")]
    include_d1: Option<String>,
    /// Comma-separated tau values for `charfn`
    #[arg(long)]
    tau: Option<String>,
    /// Comma-separated moment orders for `moments` [default: 1,2,3,4]
    #[arg(long)]
    k: Option<String>,
    /// Density grid: left end [default: -12]
    #[arg(long = "x-min")]
    x_min: Option<String>,
    /// Density grid: right end [default: 12]
    #[arg(long = "x-max")]
    x_max: Option<String>,
    /// Density grid: number of points [default: 1201]
    #[arg(long = "x-points")]
    x_points: Option<String>,
    /// Inversion cutoff for `density`; searched for when absent
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn values(&self) -> Result<BTreeMap<String, String>, CliError> {
        let mut values = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("eps", &self.eps),
            ("N", &self.n),
            ("lambda", &self.lambda),
            ("prime-cutoff", &self.prime_cutoff),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("include-d1", &self.include_d1),
            ("tau", &self.tau),
            ("k", &self.k),
            ("x-min", &self.x_min),
            ("x-max", &self.x_max),
            ("x-points", &self.x_points),
            ("T", &self.t),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(values)
    }
}

fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let env = std::env::var(THREADS_ENV).ok();
    let config = RunConfig::resolve(cli.command, &cli.values()?, env.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Lab(quadlab::Error::ResourceLimit(format!("thread pool: {e}"))))?;
    pool.install(|| run::run(&config))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(&cli) {
        Ok(lines) => match run::print_lines(&lines) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("quadlab: stdout: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("quadlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
