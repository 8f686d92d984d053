//! TOML experiment files, `key=value` overrides and the `DSTAR_SEED` variable.
//!
//! Precedence, lowest first: file values, `DSTAR_SEED`, `--set` overrides.

use std::path::Path;

use dstar_core::simulator::{DatasetSpec, ExperimentConfig};
use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "DSTAR_SEED";

/// Reads, overrides and validates a configuration file.
pub fn parse_config(path: &Path, overrides: &[String]) -> CliResult<ExperimentConfig> {
    resolve_config(path, overrides, None)
}

/// [`parse_config`] plus an optional `DSTAR_SEED` value.
pub fn resolve_config(path: &Path, overrides: &[String], env_seed: Option<&str>) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(path.display().to_string(), format!("cannot read config: {e}")))?;
    parse_config_str(&text, overrides, env_seed)
}

pub fn parse_config_str(text: &str, overrides: &[String], env_seed: Option<&str>) -> CliResult<ExperimentConfig> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config {
        key: None,
        message: e.message().to_string(),
    })?;
    if let Some(raw) = env_seed {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::config(SEED_ENV, format!("expected an unsigned 64-bit integer, got `{raw}`")))?;
        // TOML integers are signed; store the bit pattern's value if it fits
        let value = i64::try_from(seed)
            .map_err(|_| CliError::config(SEED_ENV, format!("{seed} exceeds the largest TOML integer")))?;
        table.insert("seed".into(), Value::Integer(value));
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let config = deserialize(table)?;
    config.validate()?;
    Ok(config)
}

/// Applies one `dotted.key=value` override. The value is read as a TOML
/// value when it parses as one and as a bare string otherwise.
pub fn apply_override(table: &mut Table, raw: &str) -> CliResult<()> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config(raw, "override must have the form key=value"))?;
    let key = key.trim();
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));

    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty key segment"));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(key, format!("`{part}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

fn deserialize(table: Table) -> CliResult<ExperimentConfig> {
    let dataset = table.get("dataset").cloned();
    serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        let field = ["missing field `", "unknown field `", "unknown variant `"]
            .iter()
            .find_map(|p| message.strip_prefix(p))
            .and_then(|rest| rest.split('`').next());
        let key = match field {
            // unknown variants name the value, not the key
            Some(_) if message.starts_with("unknown variant") => path,
            Some(f) if path == f || path.ends_with(&format!(".{f}")) => path,
            Some(f) if path == "." => f.to_string(),
            Some(f) => format!("{path}.{f}"),
            None if path == "dataset" => dataset
                .as_ref()
                .and_then(|d| culprit_field(d, &message))
                .map_or(path, |f| format!("dataset.{f}")),
            None => path,
        };
        CliError::Config {
            key: Some(key),
            message,
        }
    })
}

/// The tagged dataset table is buffered before its variant is chosen, so
/// errors inside it carry no field path. Find the field whose removal makes
/// the original error go away.
fn culprit_field(dataset: &Value, message: &str) -> Option<String> {
    let first_line = |m: &str| m.lines().next().unwrap_or_default().to_string();
    let original = first_line(message);
    let table = dataset.as_table()?;
    table.keys().filter(|k| k.as_str() != "kind").find_map(|k| {
        let mut probe = table.clone();
        probe.remove(k);
        match DatasetSpec::deserialize(Value::Table(probe)) {
            Ok(_) => Some(k.clone()),
            Err(e) if first_line(&e.to_string()) != original => Some(k.clone()),
            Err(_) => None,
        }
    })
}

/// TOML text that [`parse_config_str`] reads back to an equal config.
pub fn to_toml(config: &ExperimentConfig) -> CliResult<String> {
    toml::to_string(config).map_err(CliError::runtime)
}
