use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use demon_sim::cli::{self, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("demon: computed values outside their expected windows");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("demon: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> anyhow::Result<bool> {
    cli::validate(args)?;
    let report = cli::run(args)?;
    let text = cli::render(&report.table, args.format);
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(trace) = &report.trace {
        trace.write_csv(std::io::stderr())?;
    }
    Ok(report.ok)
}
