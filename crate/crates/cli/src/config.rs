//! Flat key/value config files, spliced into the argument list as flags.
//!
//! `hidden = "64,32"` in a file becomes `--hidden 64,32` right after the
//! subcommand name, so anything given on the command line wins.

use anyhow::{bail, Context, Result};
use std::ffi::OsString;
use std::path::PathBuf;

/// Globals that take a value, so their value is not mistaken for the
/// subcommand name.
const VALUE_GLOBALS: [&str; 2] = ["--config", "--seed"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn subcommand_position(args: &[OsString], names: &[&str]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if VALUE_GLOBALS.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if names.contains(&s.as_ref()) {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Flags for every entry of a flat TOML document.
pub fn flags_from_toml(text: &str) -> Result<Vec<OsString>> {
    let table: toml::Table = text.parse().context("config file is not valid TOML")?;
    let mut out = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let rendered = match value {
            toml::Value::Boolean(true) => {
                out.push(flag.into());
                continue;
            }
            toml::Value::Boolean(false) => continue,
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => bail!("config key '{key}' has an unsupported value {other}"),
        };
        out.push(flag.into());
        out.push(rendered.into());
    }
    Ok(out)
}

/// The argument list with config-file flags spliced in after the
/// subcommand. Without `--config`, the list is returned unchanged.
pub fn expand_args(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read config file {}", path.display()))?;
    let flags = flags_from_toml(&text).with_context(|| format!("in config file {}", path.display()))?;
    let at = subcommand_position(&args, subcommands).map_or(args.len(), |i| i + 1);
    let mut out = args;
    out.splice(at..at, flags);
    Ok(out)
}
