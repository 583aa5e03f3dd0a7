//! Merging of the optional `--config` TOML table with command-line flags.
//!
//! Flags win. Every resolved value is recorded so the output header can
//! echo the complete effective configuration, and config keys a run never
//! consulted are rejected as typos.

use crate::emit::fmt_f64;
use crate::errors::CliError;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;

pub struct Resolver {
    table: toml::Table,
    consulted: BTreeSet<String>,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> Result<Self, CliError> {
        let table = match config_path {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::usage(format!("cannot read config file {}: {e}", p.display()))
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::usage(format!("config file {}: {e}", p.display())))?
            }
        };
        Ok(Resolver {
            table,
            consulted: BTreeSet::new(),
            echo: BTreeMap::new(),
        })
    }

    /// The effective string for `key`: the flag when present, else the
    /// config-table entry. Records the result for the header echo.
    pub fn resolve(
        &mut self,
        key: &str,
        flag: &Option<String>,
    ) -> Result<Option<String>, CliError> {
        self.consulted.insert(key.to_string());
        let value = match flag {
            Some(s) => Some(s.clone()),
            None => match self.table.get(key) {
                None => None,
                Some(v) => Some(stringify(key, v)?),
            },
        };
        if let Some(v) = &value {
            self.echo.insert(key.to_string(), v.clone());
        }
        Ok(value)
    }

    /// Like [`resolve`], but missing values are an error.
    pub fn require(&mut self, key: &str, flag: &Option<String>) -> Result<String, CliError> {
        self.resolve(key, flag)?.ok_or_else(|| {
            CliError::usage(format!(
                "missing required parameter --{key} (or config key \"{key}\")"
            ))
        })
    }

    /// Like [`resolve`], but falls back to (and echoes) a default.
    pub fn resolve_or(
        &mut self,
        key: &str,
        flag: &Option<String>,
        default: impl Display,
    ) -> Result<String, CliError> {
        match self.resolve(key, flag)? {
            Some(v) => Ok(v),
            None => {
                let v = default.to_string();
                self.echo.insert(key.to_string(), v.clone());
                Ok(v)
            }
        }
    }

    /// Records a derived value in the header echo.
    pub fn record(&mut self, key: impl Into<String>, value: impl Display) {
        self.echo.insert(key.into(), value.to_string());
    }

    /// Rejects config keys this run never consulted.
    pub fn finish(&self) -> Result<(), CliError> {
        for key in self.table.keys() {
            if !self.consulted.contains(key) {
                return Err(CliError::usage(format!(
                    "config key \"{key}\" is not used by this command invocation"
                )));
            }
        }
        Ok(())
    }

    /// The effective configuration, sorted by key.
    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.echo
    }
}

/// Renders a TOML scalar (or flat scalar array) exactly as the equivalent
/// flag string, so config values and flag values share one parser.
fn stringify(key: &str, v: &toml::Value) -> Result<String, CliError> {
    use toml::Value;
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => fmt_f64(*f),
        Value::Boolean(b) => b.to_string(),
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|x| match x {
                    Value::Array(_) | Value::Table(_) => Err(CliError::usage(format!(
                        "config key \"{key}\": only flat scalar arrays are supported"
                    ))),
                    other => stringify(key, other),
                })
                .collect::<Result<_, _>>()?;
            parts.join(",")
        }
        other => {
            return Err(CliError::usage(format!(
                "config key \"{key}\": unsupported TOML type \"{}\"",
                other.type_str()
            )))
        }
    })
}

/// Memory cap from `ENTSPEC_BUDGET_MB`, converted to bytes and echoed.
pub fn resolve_budget(r: &mut Resolver) -> Result<Option<u64>, CliError> {
    match std::env::var("ENTSPEC_BUDGET_MB") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::usage(format!("ENTSPEC_BUDGET_MB: {e}"))),
        Ok(s) => {
            let mb: u64 = s.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "ENTSPEC_BUDGET_MB must be a positive integer (megabytes), got \"{s}\""
                ))
            })?;
            if mb == 0 {
                return Err(CliError::usage(
                    "ENTSPEC_BUDGET_MB must be at least 1".to_string(),
                ));
            }
            r.record("budget_mb", mb);
            Ok(Some(mb.saturating_mul(1024 * 1024)))
        }
    }
}
