//! `key=value` config files whose keys mirror long flags. Flags given on
//! the command line win over config values.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::CommandFactory;
use spvt_core::SpvtError;

use crate::cli::Cli;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, SpvtError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SpvtError::Parse(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(SpvtError::Parse(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Removes `--config <path>` from `args` and appends config entries for
/// flags that the selected subcommand accepts but the user did not pass.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, SpvtError> {
    let mut args: Vec<String> = args
        .into_iter()
        .map(|a| {
            a.into_string()
                .map_err(|_| SpvtError::InvalidArgument("non-UTF-8 argument".into()))
        })
        .collect::<Result<_, _>>()?;
    let mut path = None;
    if let Some(pos) = args
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    {
        let arg = args.remove(pos);
        path = match arg.split_once('=') {
            Some((_, p)) => Some(p.to_string()),
            None if pos < args.len() => Some(args.remove(pos)),
            None => return Err(SpvtError::InvalidArgument("--config needs a path".into())),
        };
    }
    let Some(path) = path else {
        return Ok(args.into_iter().map(OsString::from).collect());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| SpvtError::InvalidArgument(format!("cannot read config {path}: {e}")))?;
    let entries = parse_config(&text)?;

    let mut cmd = Cli::command();
    for token in args.iter().skip(1).filter(|a| !a.starts_with('-')) {
        match cmd.find_subcommand(token) {
            Some(sub) => cmd = sub.clone(),
            None => break,
        }
    }
    let accepted: Vec<String> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let given = |key: &str| {
        let flag = format!("--{key}");
        args.iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        if !accepted.contains(&key) {
            return Err(SpvtError::InvalidArgument(format!(
                "config key {key:?} is not a flag of this command"
            )));
        }
        if !given(&key) {
            extra.push(format!("--{key}"));
            extra.push(value);
        }
    }
    args.extend(extra);
    Ok(args.into_iter().map(OsString::from).collect())
}
