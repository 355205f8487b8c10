//! Argument parsing and exit-code mapping.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use pgan_core::Error as CoreError;

use crate::commands::{self, RunOptions};
use crate::config::{ConfigError, ExperimentConfig, OUT_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pgan", version, about = "Class rebalancing experiments with hull-constrained GANs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Override a config key, e.g. `--set training.epochs=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for `--set training.seed=N`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shorthand for `--set training.epochs=N`.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Shorthand for `--set method=NAME`.
    #[arg(long)]
    pub method: Option<String>,
    /// Output directory; defaults to the config, then `$PGAN_OUT_DIR/<name>`, then `runs/<name>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave wall-clock fields at zero so reruns are byte-identical.
    #[arg(long)]
    pub no_timestamps: bool,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(s) = self.seed {
            o.push(format!("training.seed={s}"));
        }
        if let Some(e) = self.epochs {
            o.push(format!("training.epochs={e}"));
        }
        if let Some(m) = &self.method {
            o.push(format!("method=\"{m}\""));
        }
        o
    }

    fn load(&self) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::load(&self.config, &self.overrides())
    }

    fn options(&self) -> RunOptions {
        RunOptions { out: self.out.clone(), timestamps: !self.no_timestamps }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the train/test splits and the priors table.
    Prepare(Common),
    /// Train the configured method; writes the checkpoint and loss curve.
    Train(Common),
    /// Score a checkpoint on the held-out split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to score; defaults to the run's `checkpoint.pgck`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run several configs end to end and tabulate them.
    Compare {
        /// Experiment configs, run in the order given.
        #[arg(short, long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Expand each config across these methods (comma separated).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Table directory; runs go into `<out>/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timestamps: bool,
    },
    /// Finite-difference check of the network gradients.
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(CoreError::Divergence(_)) = cause.downcast_ref::<CoreError>() {
            return EXIT_DIVERGENCE;
        }
    }
    EXIT_OTHER
}

fn compare_configs(
    configs: &[PathBuf],
    methods: &[String],
    set: &[String],
) -> Result<Vec<ExperimentConfig>, ConfigError> {
    let mut out = Vec::new();
    for path in configs {
        if methods.is_empty() {
            out.push(ExperimentConfig::load(path, set)?);
            continue;
        }
        for m in methods {
            let base = ExperimentConfig::load(path, set)?;
            let mut o = set.to_vec();
            o.push(format!("method=\"{m}\""));
            o.push(format!("name=\"{}-{m}\"", base.name));
            out.push(ExperimentConfig::load(path, &o)?);
        }
    }
    Ok(out)
}

/// Runs one command, printing a short report to stdout.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(c) => {
            let p = commands::prepare(&c.load()?, &c.options())?;
            println!(
                "prepared {} train / {} test rows in {} (manifest {})",
                p.train.len(),
                p.test.len(),
                p.dir.display(),
                &p.manifest_hash[..12]
            );
        }
        Command::Train(c) => {
            let t = commands::train(&c.load()?, &c.options())?;
            let last = t.trained.curve.records().last().map(|r| r.iteration).unwrap_or(0);
            println!("trained {} for {last} iterations; artifacts in {}", t.trained.method.name(), t.dir.display());
        }
        Command::Evaluate { common, checkpoint } => {
            let e = commands::evaluate(&common.load()?, &common.options(), checkpoint.as_deref())?;
            print!(
                "{}",
                crate::csvio::summary_text(e.method.name(), &e.evaluation.metrics, &e.evaluation.uncertainty)
            );
        }
        Command::Compare { configs, methods, set, out, no_timestamps } => {
            let cfgs = compare_configs(&configs, &methods, &set)?;
            let table_dir = out.clone().unwrap_or_else(|| match std::env::var_os(OUT_DIR_ENV) {
                Some(r) if !r.is_empty() => PathBuf::from(r).join("compare"),
                _ => PathBuf::from("runs").join("compare"),
            });
            let opts = RunOptions { out, timestamps: !no_timestamps };
            commands::compare(&cfgs, &opts, &table_dir)?;
            print!("{}", std::fs::read_to_string(table_dir.join("comparison.txt"))?);
        }
        Command::Gradcheck { seeds } => {
            let r = commands::gradcheck(seeds);
            println!("{} cases, worst relative error {:.3e}", r.cases, r.worst);
            if !r.failures.is_empty() {
                anyhow::bail!("gradient check failed:\n{}", r.failures.join("\n"));
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs, and returns the exit code; errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
