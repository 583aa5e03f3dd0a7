//! Output rendering: headers, float formatting, CSV assembly, file/stdout
//! writing. All numeric output uses '.' as the decimal separator (Rust's
//! float formatting is locale-independent) and shortest-roundtrip decimals,
//! so identical runs emit byte-identical files.

use crate::errors::CliError;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Shortest decimal that round-trips to the same binary64; `-0` collapses
/// to `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x}")
}

/// Provenance header echoed at the top of CSV (`#`) and DOT (`//`)
/// outputs: the command, units where meaningful, then every effective
/// parameter in sorted order.
pub fn header(
    prefix: &str,
    command: &str,
    units: Option<&str>,
    echo: &BTreeMap<String, String>,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("{prefix} entspec {command}\n"));
    if let Some(u) = units {
        out.push_str(&format!("{prefix} units = {u}\n"));
    }
    for (k, v) in echo {
        out.push_str(&format!("{prefix} {k} = {v}\n"));
    }
    out
}

/// The effective configuration as a JSON object (string values, sorted
/// keys), for embedding into JSON reports.
pub fn echo_json(echo: &BTreeMap<String, String>) -> serde_json::Value {
    serde_json::Value::Object(
        echo.iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect(),
    )
}

/// In-memory CSV table; comment headers are prepended by the caller since
/// CSV itself has no comment syntax.
pub struct Csv {
    w: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(columns).expect("in-memory csv");
        Csv { w }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.w.write_record(fields).expect("in-memory csv");
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory csv"))
            .expect("csv output is utf-8")
    }
}

/// Writes the rendered output to `--out`, or stdout when absent.
pub fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Io(format!("writing stdout: {e}"))),
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", p.display()))),
    }
}
