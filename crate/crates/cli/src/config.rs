//! Merging a JSON config file into argv.
//!
//! Config keys become long flags inserted right after the subcommand, ahead
//! of the user's own flags. Every command sets `args_override_self`, so a
//! flag given on the command line replaces the config value.

use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::Value;

use crate::error::{config, CliResult};

const GLOBAL_VALUE_FLAGS: &[&str] = &["--config", "--seed", "--workers", "--out"];

/// Value of `--config` if present, without a full parse.
pub fn find_config(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Index just past the subcommand path, or `None` when there is no
/// subcommand or it is `simulate`, whose config is not a flag file.
pub fn subcommand_end(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    let mut path: Vec<String> = Vec::new();
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if GLOBAL_VALUE_FLAGS.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if s.starts_with('-') {
            i += 1;
            continue;
        }
        path.push(s.into_owned());
        let done = match path[0].as_str() {
            "simulate" => return None,
            "diagnose" => path.len() == 2,
            _ => true,
        };
        if done {
            return Some(i + 1);
        }
        i += 1;
    }
    None
}

/// Flags for every key of a JSON object. `true` becomes a bare flag,
/// `false` and `null` are skipped, arrays are comma-joined.
pub fn config_args(value: &Value) -> CliResult<Vec<OsString>> {
    let Value::Object(map) = value else {
        return Err(config("config file must hold a JSON object"));
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            return Err(config("config file cannot name another config"));
        }
        let scalar = |v: &Value| -> CliResult<String> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(config(format!("config key {key}: unsupported value {v}"))),
            }
        };
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.into()),
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<CliResult<Vec<_>>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(other)?.into());
            }
        }
    }
    Ok(out)
}

/// `argv` with the config's flags spliced in after the subcommand.
pub fn merge(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let (Some(path), Some(end)) = (find_config(&argv), subcommand_end(&argv)) else {
        return Ok(argv);
    };
    let bytes = std::fs::read(&path)
        .map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| config(format!("config {}: {e}", path.display())))?;
    let extra = config_args(&value)?;
    let mut out = argv[..end].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[end..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn finds_subcommand_path() {
        assert_eq!(
            subcommand_end(&argv("t --seed 3 match --corpus c")),
            Some(4)
        );
        assert_eq!(
            subcommand_end(&argv("t --out match diagnose intra --x")),
            Some(5)
        );
        assert_eq!(subcommand_end(&argv("t simulate --config j")), None);
        assert_eq!(subcommand_end(&argv("t --workers 2")), None);
    }

    #[test]
    fn config_values_become_flags() {
        let v: Value = serde_json::json!({
            "threshold": 0.82, "drop_nsfw": true, "drop_multi_label": false, "k": [1, 5]
        });
        let got: Vec<String> = config_args(&v)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(got, ["--drop-nsfw", "--k", "1,5", "--threshold", "0.82"]);
        assert!(config_args(&serde_json::json!([1])).is_err());
        assert!(config_args(&serde_json::json!({"x": {"y": 1}})).is_err());
    }
}
