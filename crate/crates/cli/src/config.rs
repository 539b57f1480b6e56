//! `--config` files: `key = value` lines, `#` comments. Each key names a
//! long flag (`_` and `-` are interchangeable); entries are appended to the
//! argument list unless that flag was given on the command line.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context};

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--" {
            return None;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn given(argv: &[OsString], flag: &str) -> bool {
    argv.iter().skip(1).any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.strip_prefix(flag).is_some_and(|rest| rest.starts_with('='))
    })
}

/// Parses a config file body into `(flag, value)` pairs in file order.
pub fn parse(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", i + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("line {}: invalid key `{}`", i + 1, key);
        }
        out.push((format!("--{key}"), value.trim().to_string()));
    }
    Ok(out)
}

/// Returns `argv` with the config file entries appended.
pub fn expand(mut argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let entries = parse(&text).with_context(|| format!("in config {}", path.display()))?;
    let extra: Vec<OsString> = entries
        .into_iter()
        .filter(|(flag, _)| !given(&argv, flag))
        .flat_map(|(flag, value)| [flag.into(), value.into()])
        .collect();
    argv.extend(extra);
    Ok(argv)
}
