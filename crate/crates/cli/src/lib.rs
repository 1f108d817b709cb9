//! Command-line frontend for `fockfade-core`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
//! 3 numerical failure (truncation, positivity, solver).

pub mod args;
pub mod commands;
pub mod format;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use args::Resolved;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<fockfade_core::Error> for CliError {
    fn from(e: fockfade_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

/// A subcommand with its layered configuration.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub subcommand: String,
    pub resolved: Resolved,
    pub out: Option<String>,
    pub config_file: Option<String>,
}

fn invocation<I, T>(argv: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = args::command().try_get_matches_from(argv)?;
    let (name, sub) = m.subcommand().expect("a subcommand is required");
    let to_clap = |e: CliError| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n"));
    if name == "rerun" {
        let path = sub.get_one::<String>("manifest").expect("required");
        let manifest = output::read_manifest(Path::new(path)).map_err(to_clap)?;
        let keys = args::keys_of(&manifest.subcommand)
            .ok_or_else(|| to_clap(CliError::Usage(format!("cannot re-run '{}'", manifest.subcommand))))?;
        let resolved = Resolved::restore(keys, &manifest.config, &manifest.sources).map_err(to_clap)?;
        return Ok(Invocation {
            subcommand: manifest.subcommand,
            resolved,
            out: sub.get_one::<String>("out").cloned().or(Some(manifest.out)),
            config_file: manifest.config_file,
        });
    }
    let keys = args::keys_of(name).expect("every non-rerun subcommand has a key table");
    let config_file = m.get_one::<String>("config").cloned();
    let file = match &config_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| to_clap(CliError::Usage(format!("config file {p}: {e}"))))?;
            args::parse_config(&text).map_err(to_clap)?
        }
        None => BTreeMap::new(),
    };
    let resolved = Resolved::layer(keys, &Resolved::flags_of(sub, keys), &file).map_err(to_clap)?;
    Ok(Invocation {
        subcommand: name.to_string(),
        resolved,
        out: sub.get_one::<String>("out").cloned(),
        config_file,
    })
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match invocation(argv) {
        Ok(inv) => inv,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::execute(&inv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fockfade: error: {e}");
            e.exit_code()
        }
    }
}
