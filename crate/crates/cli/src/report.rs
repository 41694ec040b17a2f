//! Experiment reports: canonical JSON (sorted keys) or CSV, with a config hash.

use std::io::Write;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Descriptive probes carry no verdict.
    None,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::None => "none",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Fail => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a subcommand produces before it is wrapped into a report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub table: Option<Table>,
    pub verdict: Verdict,
    pub tolerances: Value,
    pub summary: String,
}

impl Outcome {
    pub fn new(results: Value, verdict: Verdict, summary: impl Into<String>) -> Self {
        Self { results, table: None, verdict, tolerances: json!({}), summary: summary.into() }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_tolerances(mut self, tolerances: Value) -> Self {
        self.tolerances = tolerances;
        self
    }
}

/// Rebuilds every object with its keys in sorted order.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonical(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

/// SHA-256 of the canonical compact JSON of the command and its parameters.
pub fn config_hash(command: &str, config: &Value) -> String {
    let text = serde_json::to_string(&canonical(json!({ "command": command, "config": config }))).unwrap();
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn report(command: &str, config: Value, outcome: &Outcome, wall_seconds: f64) -> Value {
    canonical(json!({
        "command": command,
        "config_hash": config_hash(command, &config),
        "config": config,
        "results": outcome.results,
        "tolerances": outcome.tolerances,
        "verdict": outcome.verdict.label(),
        "timings": { "wall_seconds": wall_seconds },
        "version": env!("CARGO_PKG_VERSION"),
    }))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// The subcommand's table, or the flattened report as key,value rows.
pub fn write_csv<W: Write>(out: W, report: &Value, table: Option<&Table>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match table {
        Some(t) => {
            w.write_record(&t.header)?;
            for row in &t.rows {
                w.write_record(row)?;
            }
        }
        None => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sorts_keys() {
        let v = canonical(json!({"b": 1, "a": {"d": 2, "c": 3}}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":{"c":3,"d":2},"b":1}"#);
    }

    #[test]
    fn hash_is_stable_and_order_free() {
        let h1 = config_hash("eigencheck", &json!({"a": 0.5, "s": "1"}));
        let h2 = config_hash("eigencheck", &json!({"s": "1", "a": 0.5}));
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 64);
        assert_ne!(h1, config_hash("eigencheck", &json!({"a": 0.25, "s": "1"})));
    }

    #[test]
    fn flattened_csv() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &json!({"x": {"y": [1, 2]}, "z": "ok"}), None).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "key,value\nx.y.0,1\nx.y.1,2\nz,ok\n");
    }
}
