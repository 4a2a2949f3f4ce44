//! Command-line front end for `nmwalk`.
//!
//! Every command resolves a [`RunConfig`] (flags over an optional JSON
//! file), runs on a worker pool and writes one table as CSV or JSON.

// `!(x > 0.0)` is the NaN-rejecting form used for parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axis;
pub mod config;
pub mod error;
pub mod run;
pub mod table;

use clap::Parser;

pub use config::{Command, Flags, Format, RunConfig, WORKERS_ENV};
pub use error::{CliError, CliResult};
pub use table::{write_table, Meta, Table};

#[derive(Debug, Parser)]
#[command(
    name = "nmwalk",
    version,
    about = "Non-Markovian dissipative quantum walk"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl Cli {
    pub fn resolve(&self, env_workers: Option<&str>) -> CliResult<RunConfig> {
        let file = self
            .flags
            .config
            .as_deref()
            .map(config::load_file)
            .transpose()?;
        RunConfig::resolve(self.command, &self.flags, file, env_workers)
    }
}

/// Resolves, runs and writes one invocation.
pub fn run_cli(cli: &Cli, env_workers: Option<&str>) -> CliResult<()> {
    let cfg = cli.resolve(env_workers)?;
    log::info!("running {:?}", cfg.command);
    let table = run::execute(&cfg)?;
    write_table(
        &table,
        cfg.format(),
        cfg.output.path.as_deref(),
        &Meta::new(&cfg),
    )
}
