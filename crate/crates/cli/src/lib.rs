//! Command-line front end: argument parsing, output files, manifests.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult, EXIT_OK};
use crate::manifest::Manifest;

/// Runs the tool on a full argument vector (program name first) and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match execute(&argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = e.to_string();
            if msg.starts_with("error:") {
                eprint!("{msg}");
                if !msg.ends_with('\n') {
                    eprintln!();
                }
            } else {
                eprintln!("error: {msg}");
            }
            e.exit_code()
        }
    }
}

fn execute(argv: &[OsString]) -> CliResult<()> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?
            .install(|| dispatch(&cli.command, &recorded)),
        None => dispatch(&cli.command, &recorded),
    }
}

fn dispatch(command: &Command, argv: &[String]) -> CliResult<()> {
    match command {
        Command::Sweep(a) => commands::sweep(a, argv),
        Command::Harmonic(a) => commands::harmonic(a, argv),
        Command::Edge(a) => commands::edge(a, argv),
        Command::Exact(a) => commands::exact(a),
        Command::Fit(a) => commands::fit(a),
        Command::Bitmap(a) => commands::bitmap(a, argv),
        Command::Rerun(a) => {
            let m = Manifest::read(&a.manifest)?;
            let args = m.get_all("arg");
            if args.is_empty() {
                return Err(CliError::Usage(format!("{} records no arguments", a.manifest.display())));
            }
            if args.contains(&"rerun") {
                return Err(CliError::Usage("a manifest cannot replay another rerun".into()));
            }
            execute(&std::iter::once("rebvoter").chain(args).map(OsString::from).collect::<Vec<_>>())
        }
    }
}
