//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{default_output, Experiment, ExperimentConfig, Settings, OUTPUT_DIR_ENV};
use crate::error::{CliError, Result};
use crate::experiment::{run, sweep, Artifact, SweepParam};
use crate::results::ResultTable;

#[derive(Debug, Parser)]
#[command(name = "nlsim", version, about = "Seeded Bell-test, prover-discrimination and CTC experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the CHSH value of a shared state
    Chsh(CommonArgs),
    /// Compare separable-prover transcripts against a second machine
    Discriminate(CommonArgs),
    /// Solve a Deutsch CTC fixed point
    Ctc(CommonArgs),
    /// Maximum bipartition entanglement entropy of a pure state
    Entropy(CommonArgs),
    /// Run one experiment over a list of parameter values
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for results when --output is absent
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Experiment to sweep (default: config file, then chsh)
    #[arg(long)]
    pub experiment: Option<String>,
    /// p | strength | rounds | alpha | seed | angle-a1 | angle-a2 | angle-b1 | angle-b2
    #[arg(long)]
    pub param: Option<String>,
    /// Comma-separated values; empty for an empty table
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// What an invocation wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub table: ResultTable,
    pub seed: u64,
    pub seed_drawn: bool,
}

fn merged(common: &CommonArgs) -> Result<Settings> {
    let file = match &common.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    Ok(common.settings.clone().overlay(file))
}

fn resolve_output(common: &CommonArgs, s: &Settings, stem: &str) -> PathBuf {
    s.output
        .clone()
        .unwrap_or_else(|| default_output(common.output_dir.as_deref(), stem))
}

fn configure_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::config("threads must be at least 1"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn artifact_path(output: &Path, a: &Artifact) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.{}", a.suffix))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn sweep_values(raw: Option<String>, file: Option<Vec<toml::Value>>) -> Result<Vec<String>> {
    if let Some(raw) = raw {
        return Ok(raw
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect());
    }
    let values = file.ok_or_else(|| CliError::config("sweep needs --values"))?;
    values
        .into_iter()
        .map(|v| match v {
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            toml::Value::String(s) => Ok(s),
            other => Err(CliError::config(format!("sweep value `{other}` is not a number"))),
        })
        .collect()
}

pub fn execute(cli: Cli) -> Result<Outcome> {
    let (experiment, common, sweep_spec) = match cli.command {
        Command::Chsh(c) => (Some(Experiment::Chsh), c, None),
        Command::Discriminate(c) => (Some(Experiment::Discriminate), c, None),
        Command::Ctc(c) => (Some(Experiment::Ctc), c, None),
        Command::Entropy(c) => (Some(Experiment::Entropy), c, None),
        Command::Sweep(s) => (
            s.experiment.as_deref().map(str::parse).transpose()?,
            s.common,
            Some((s.param, s.values)),
        ),
    };
    let settings = merged(&common)?;
    let experiment = match experiment {
        Some(e) => e,
        None => settings.experiment.as_deref().unwrap_or("chsh").parse()?,
    };
    configure_threads(settings.threads)?;
    let seed_drawn = settings.seed.is_none();

    match sweep_spec {
        None => {
            let config = ExperimentConfig::from_settings(experiment, &settings)?;
            let output = resolve_output(&common, &settings, experiment.name());
            let report = run(&config)?;
            let table = ResultTable {
                rows: vec![report.row],
            };
            write_file(&output, &table.to_text())?;
            let mut artifacts = Vec::new();
            for a in &report.artifacts {
                let p = artifact_path(&output, a);
                write_file(&p, &a.contents)?;
                artifacts.push(p);
            }
            Ok(Outcome {
                output,
                artifacts,
                table,
                seed: config.seed,
                seed_drawn,
            })
        }
        Some((param, values)) => {
            let file_sweep = settings.sweep.clone().unwrap_or_default();
            let param: SweepParam = param
                .or(file_sweep.param)
                .ok_or_else(|| CliError::config("sweep needs --param"))?
                .parse()?;
            let values = sweep_values(values, file_sweep.values)?;
            let base = ExperimentConfig::from_settings(experiment, &settings)?;
            let output = resolve_output(&common, &settings, &format!("{experiment}-sweep-{param}"));
            let table = sweep(&base, param, &values)?;
            write_file(&output, &table.to_text())?;
            Ok(Outcome {
                output,
                artifacts: Vec::new(),
                table,
                seed: base.seed,
                seed_drawn,
            })
        }
    }
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code != 0 {
                eprintln!("{}", CliError::config(e.kind().to_string()).machine_line());
            }
            return code;
        }
    };
    let start = Instant::now();
    match execute(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if out.seed_drawn {
                let _ = writeln!(stdout, "seed {} drawn from OS entropy", out.seed);
            }
            let _ = writeln!(
                stdout,
                "wrote {} ({} rows) in {:.3}s",
                out.output.display(),
                out.table.rows.len(),
                start.elapsed().as_secs_f64()
            );
            for a in &out.artifacts {
                let _ = writeln!(stdout, "wrote {}", a.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.machine_line());
            e.exit_code()
        }
    }
}
