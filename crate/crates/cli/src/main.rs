//! `chargeplan` command-line tool.
//!
//! Artifacts go to `--out-dir` (or `CHARGEPLAN_OUT_DIR`). A one-line JSON
//! summary is printed on success; on failure a JSON error object goes to
//! stderr and the exit code is 2 for infeasible problems, 3 for bad input
//! and 1 for anything else.

mod args;
mod commands;
mod error;
mod experiment;
mod ingest;
mod pipeline;
mod run;
mod synth;

use clap::Parser;

use crate::error::EXIT_OK;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = args::Cli::parse();
    let code = match commands::run(cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
