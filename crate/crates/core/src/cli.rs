//! The `replaylab` command line.
//!
//! Exit codes: 0 on success, 1 for usage, configuration or map errors, 2 for
//! I/O failures. Results go to stdout as `key=value` lines; diagnostics go to
//! stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::env::{grid_optimal_steps, load_grid_map, MapError};
use crate::experiment::aggregate::aggregate;
use crate::experiment::config::{load_config, ConfigError, ExperimentConfig};
use crate::experiment::csv::{render_aggregate, render_rows, rows_for, write_text, CsvError};
use crate::experiment::runner::{run_experiment, ExperimentError};
use crate::replay::{replay_within_monte_carlo, replay_within_prob};
use crate::rng::{stream, Stream};

/// Environment variable that overrides every experiment's `base_seed`.
pub const SEED_ENV: &str = "REPLAYLAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "replaylab",
    version,
    about = "Q-learning experience replay experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every experiment in a config file and write runs.csv and aggregate.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-run each experiment once per buffer size and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated capacities, e.g. 100,10000,1000000.
        #[arg(long)]
        buffer_sizes: String,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Probability that a new transition is replayed within k steps.
    Prob {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: u64,
        /// Also estimate the probability by simulation with this many trials.
        #[arg(long = "monte-carlo")]
        monte_carlo: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Shortest-path length and optimal return for a grid map.
    Oracle {
        #[arg(long)]
        map: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. }
            | ConfigError::Map {
                source: MapError::Io { .. },
                ..
            } => Self::io(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Io { .. } => Self::io(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(c) => c.into(),
            ExperimentError::Map(m) => m.into(),
            other => Self::usage(other.to_string()),
        }
    }
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        Self::io(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

fn load(config: &Path, seed_override: Option<&str>) -> Result<Vec<ExperimentConfig>, Failure> {
    let mut configs = load_config(config)?;
    if let Some(raw) = seed_override {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
        for cfg in &mut configs {
            cfg.base_seed = seed;
        }
    }
    Ok(configs)
}

fn cmd_run(
    config: &Path,
    out_dir: &Path,
    jobs: usize,
    seed_override: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let configs = load(config, seed_override)?;
    let mut runs_csv = Vec::new();
    let mut aggregate_csv = String::new();
    for (i, cfg) in configs.iter().enumerate() {
        let records = run_experiment(cfg, jobs)?;
        let curve = aggregate(&records).map_err(|e| Failure::usage(e.to_string()))?;
        runs_csv.extend(rows_for(cfg, &records));
        aggregate_csv.push_str(&render_aggregate(cfg, &curve, i == 0));
        let last = curve.points.last().map_or(f64::NAN, |p| p.mean);
        writeln!(
            out,
            "experiment={} runs={} episodes={} final_mean_return={}",
            cfg.id,
            records.len(),
            cfg.episodes,
            crate::experiment::csv::format_float(last)
        )?;
    }
    let runs_path = out_dir.join("runs.csv");
    let aggregate_path = out_dir.join("aggregate.csv");
    write_text(&runs_path, &render_rows(&runs_csv))?;
    write_text(&aggregate_path, &aggregate_csv)?;
    writeln!(out, "runs_csv={}", runs_path.display())?;
    writeln!(out, "aggregate_csv={}", aggregate_path.display())?;
    Ok(())
}

fn parse_sizes(raw: &str) -> Result<Vec<usize>, Failure> {
    let sizes: Vec<usize> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::usage(format!("invalid buffer size {s:?}"))),
        })
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() {
        return Err(Failure::usage("--buffer-sizes needs at least one size"));
    }
    Ok(sizes)
}

fn cmd_sweep(
    config: &Path,
    sizes: &str,
    out_dir: &Path,
    jobs: usize,
    seed_override: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let sizes = parse_sizes(sizes)?;
    let configs = load(config, seed_override)?;
    let mut rows = Vec::new();
    for base in &configs {
        for size in &sizes {
            let cfg = ExperimentConfig {
                buffer_capacity: *size,
                ..base.clone()
            };
            let records = run_experiment(&cfg, jobs)?;
            rows.extend(rows_for(&cfg, &records));
            writeln!(
                out,
                "experiment={} buffer_size={} runs={}",
                cfg.id,
                size,
                records.len()
            )?;
        }
    }
    let path = out_dir.join("sweep.csv");
    write_text(&path, &render_rows(&rows))?;
    writeln!(out, "sweep_csv={}", path.display())?;
    Ok(())
}

fn cmd_prob(
    m: u64,
    k: u64,
    trials: Option<u64>,
    seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    if m == 0 || k == 0 {
        return Err(Failure::usage("--m and --k must be at least 1"));
    }
    if k > m {
        writeln!(err, "warning: k > m; the formula assumes k <= m")?;
    }
    let analytic = replay_within_prob(m, k).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out, "analytic={analytic:?}")?;
    if let Some(trials) = trials {
        if k > m {
            writeln!(err, "warning: skipping Monte Carlo estimate because k > m")?;
            return Ok(());
        }
        let (m, k) = (
            usize::try_from(m).map_err(|_| Failure::usage("--m too large"))?,
            usize::try_from(k).map_err(|_| Failure::usage("--k too large"))?,
        );
        let mut rng = stream(seed, Stream::Agent);
        let est =
            replay_within_monte_carlo(m, k, trials, &mut rng).map_err(|e| Failure::usage(e.to_string()))?;
        writeln!(
            out,
            "monte_carlo={:?} std_error={:?} trials={} z={:?}",
            est.probability,
            est.std_error,
            est.trials,
            est.z_score(analytic)
        )?;
    }
    Ok(())
}

fn cmd_oracle(map: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = load_grid_map(map)?;
    let steps = grid_optimal_steps(&spec)?;
    writeln!(out, "optimal_steps={steps} optimal_return=-{steps}")?;
    Ok(())
}

/// Runs the CLI on `args` (including the program name). `seed_override` is
/// the value of [`SEED_ENV`], if set.
pub fn run<I, T>(args: I, seed_override: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out: dir,
            jobs,
        } => cmd_run(&config, &dir, jobs, seed_override, out),
        Command::Sweep {
            config,
            buffer_sizes,
            out: dir,
            jobs,
        } => cmd_sweep(&config, &buffer_sizes, &dir, jobs, seed_override, out),
        Command::Prob {
            m,
            k,
            monte_carlo,
            seed,
        } => cmd_prob(m, k, monte_carlo, seed, out, err),
        Command::Oracle { map } => cmd_oracle(&map, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary: reads `std::env`, writes to the real streams.
pub fn main_from_env() -> i32 {
    let seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        seed.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("replaylab").chain(args.iter().copied()),
            None,
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn prob_prints_analytic_value() {
        let (code, out, _) = call(&["prob", "--m", "1", "--k", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "analytic=1.0\n");
        let (_, out, _) = call(&["prob", "--m", "100", "--k", "100"]);
        assert!(out.starts_with("analytic=0.6339676"), "{out}");
    }

    #[test]
    fn prob_warns_when_k_exceeds_m() {
        let (code, out, err) = call(&["prob", "--m", "2", "--k", "5", "--monte-carlo", "10"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("analytic="));
        assert!(err.contains("warning"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["prob", "--m", "0", "--k", "1"]).0, EXIT_USAGE);
        assert_eq!(call(&["prob", "--k", "1"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn size_lists() {
        assert_eq!(
            parse_sizes("100,10000, 1000000").ok(),
            Some(vec![100, 10_000, 1_000_000])
        );
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes(",").is_err());
        assert!(parse_sizes("10,x").is_err());
        assert!(parse_sizes("0").is_err());
    }
}
