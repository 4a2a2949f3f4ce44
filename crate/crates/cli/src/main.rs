use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::Parser;

use nmwalk_cli::{run_cli, Cli, CliError, WORKERS_ENV};

fn report(err: &anyhow::Error) -> u8 {
    let (code, record) = match err.downcast_ref::<CliError>() {
        Some(e) => (
            e.exit_code(),
            serde_json::to_value(e.record()).unwrap_or_default(),
        ),
        None => (
            1,
            serde_json::json!({"kind": "internal", "class": "internal", "exit_code": 1, "message": format!("{err:#}")}),
        ),
    };
    eprintln!("{}", serde_json::json!({ "error": record }));
    code
}

fn real_main(cli: Cli) -> anyhow::Result<()> {
    let env_workers = std::env::var(WORKERS_ENV).ok();
    run_cli(&cli, env_workers.as_deref()).map_err(anyhow::Error::from)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = anyhow::Error::from(CliError::Usage(e.to_string().trim_end().to_string()));
            return ExitCode::from(report(&err));
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match real_main(cli).context("nmwalk failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(report(&e)),
    }
}
