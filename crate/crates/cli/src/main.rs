mod args;
mod commands;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::{dispatch, Failure};

const EXIT_VALIDATION: u8 = 2;

/// Finds `--config <path>` or `--config=<path>` in raw arguments.
fn config_path(argv: &[OsString]) -> Option<String> {
    let mut it = argv.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Drops every occurrence of `flag` (with its value, if any) from `argv`.
fn drop_flag(argv: Vec<OsString>, flag: &str) -> Vec<OsString> {
    let mut out = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter().peekable();
    let prefix = format!("{flag}=");
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == flag {
            if it.peek().is_some_and(|n| !n.to_string_lossy().starts_with("--")) {
                it.next();
            }
        } else if !s.starts_with(&prefix) {
            out.push(a);
        }
    }
    out
}

/// Applies the JSON object in the `--config` file on top of `argv`.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("cannot read {path}: {e}")))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {path}: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Failure::Usage(format!("config {path} must hold a JSON object of flag values")))?;
    let mut argv = drop_flag(argv, "--config");
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        argv = drop_flag(argv, &flag);
        match v {
            serde_json::Value::Bool(true) => argv.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => argv.push(format!("{flag}={s}").into()),
            serde_json::Value::Number(n) => argv.push(format!("{flag}={n}").into()),
            _ => return Err(Failure::Usage(format!("config key `{key}` must be a string, number or boolean"))),
        }
    }
    Ok(argv)
}

fn threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MAXDIQ_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("MAXDIQ_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Error(format!("cannot size the thread pool: {e}")))
}

fn run() -> Result<bool, Failure> {
    let argv = merge_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(true);
        }
        Err(e) => {
            let _ = e.print();
            return Err(Failure::Usage(String::new()));
        }
    };
    threads()?;
    dispatch(&cli)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code() as u8)
        }
    }
}
