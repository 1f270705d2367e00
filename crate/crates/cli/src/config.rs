//! Flat `key = value` configuration files. Keys are long flag names; a key
//! given on the command line wins over the file.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::Path;

/// Path given with `--config`, if any.
fn config_path(argv: &[String]) -> Result<Option<String>> {
    let mut found = None;
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--config" {
            let v = argv.get(i + 1).context("--config needs a file")?;
            found = Some(v.clone());
            i += 1;
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
        i += 1;
    }
    Ok(found)
}

fn has_flag(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let eq = format!("{flag}=");
    argv.iter().any(|a| *a == flag || a.starts_with(&eq))
}

/// Command-line words for one config entry.
fn entry_args(key: &str, value: &toml::Value) -> Result<Vec<String>> {
    let flag = format!("--{key}");
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => Vec::new(),
        toml::Value::String(s) => vec![flag, s.clone()],
        toml::Value::Integer(i) => vec![flag, i.to_string()],
        toml::Value::Float(f) => vec![flag, f.to_string()],
        toml::Value::Array(items) => {
            let mut out = vec![flag];
            for item in items {
                out.push(match item {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Float(f) => f.to_string(),
                    other => bail!("config key `{key}`: unsupported list item {other}"),
                });
            }
            out
        }
        toml::Value::Table(_) => bail!("config key `{key}`: nested tables are not allowed"),
        toml::Value::Datetime(_) => bail!("config key `{key}`: dates are not allowed"),
    })
}

pub fn parse_config(text: &str) -> Result<toml::Table> {
    let table: toml::Table = text.parse().context("config is not valid key = value text")?;
    for (key, value) in &table {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        entry_args(key, value)?;
    }
    Ok(table)
}

/// Appends the entries of the `--config` file that the command line leaves unset.
pub fn merge_config(mut argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let table = parse_config(&text).with_context(|| format!("in config {path}"))?;
    let mut extra = Vec::new();
    for (key, value) in &table {
        if !has_flag(&argv, key) {
            extra.extend(entry_args(key, value)?);
        }
    }
    argv.extend(extra);
    Ok(argv)
}

/// Effective parameters of a run, with unset options left out.
pub fn echo<T: Serialize>(args: &T) -> Map<String, Value> {
    match serde_json::to_value(args).expect("arguments serialize") {
        Value::Object(map) => map.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => unreachable!("argument structs serialize to objects"),
    }
}

fn to_toml_value(v: &Value) -> Result<toml::Value> {
    Ok(match v {
        Value::Bool(b) => toml::Value::Boolean(*b),
        Value::String(s) => toml::Value::String(s.clone()),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => toml::Value::Integer(i),
            // Beyond the signed range; clap reads the string back as a number.
            (None, Some(u), _) => toml::Value::String(u.to_string()),
            (_, _, Some(f)) => toml::Value::Float(f),
            _ => bail!("unrepresentable number {n}"),
        },
        Value::Array(items) => toml::Value::Array(items.iter().map(to_toml_value).collect::<Result<_>>()?),
        other => bail!("cannot write {other} to a flat config"),
    })
}

/// Config file text that reproduces `echo`.
pub fn config_text(echo: &Map<String, Value>) -> Result<String> {
    let mut table = toml::Table::new();
    for (k, v) in echo {
        table.insert(k.clone(), to_toml_value(v)?);
    }
    Ok(toml::to_string(&table)?)
}

pub fn save_config(echo: &Map<String, Value>, path: &Path) -> Result<()> {
    std::fs::write(path, config_text(echo)?).with_context(|| format!("writing config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn words(s: &[&str]) -> Vec<String> {
        s.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn entries_become_flags() {
        let t = parse_config("n = 4\nexhaustive = true\nquiet = false\ndelta = 0.25\nlambda = [1, 2]\nout = \"a b\"").unwrap();
        let mut got = Vec::new();
        for (k, v) in &t {
            got.extend(entry_args(k, v).unwrap());
        }
        assert_eq!(
            got,
            words(&["--delta", "0.25", "--exhaustive", "--lambda", "1", "2", "--n", "4", "--out", "a b"])
        );
    }

    #[test]
    fn nested_tables_are_rejected() {
        assert!(parse_config("[pmd]\nn = 4").is_err());
        assert!(parse_config("config = \"x\"").is_err());
        assert!(parse_config("n = ").is_err());
    }

    #[test]
    fn command_line_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "n = 6\nlambda = 3\n").unwrap();
        let argv = words(&["pmdkit", "pmd", "verify", "--n=4", "--config", path.to_str().unwrap()]);
        let merged = merge_config(argv.clone()).unwrap();
        assert_eq!(&merged[..argv.len()], &argv[..]);
        assert_eq!(&merged[argv.len()..], &words(&["--lambda", "3"])[..]);
    }

    #[test]
    fn echo_text_parses_back() {
        let echo: Map<String, Value> = [
            ("n", json!(4)),
            ("delta", json!(0.1 + 0.2)),
            ("seed", json!(u64::MAX)),
            ("lambda", json!([1, 2, 3])),
            ("exhaustive", json!(true)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let text = config_text(&echo).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(back["delta"].as_float(), Some(0.1 + 0.2));
        assert_eq!(back["seed"].as_str(), Some(u64::MAX.to_string().as_str()));
        assert_eq!(config_text(&echo).unwrap(), text);
    }
}
