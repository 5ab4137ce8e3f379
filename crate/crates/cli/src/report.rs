//! Versioned report documents with JSON and CSV renderings.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "mcf-lab/1";

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub claim: String,
    pub inputs: Map<String, Value>,
    pub estimates: Map<String, Value>,
    pub verdict: Option<String>,
}

impl Record {
    pub fn new(claim: &str) -> Self {
        Self { claim: claim.to_string(), inputs: Map::new(), estimates: Map::new(), verdict: None }
    }

    pub fn input(mut self, key: &str, v: impl Serialize) -> Self {
        self.inputs.insert(key.to_string(), serde_json::to_value(v).expect("serializable input"));
        self
    }

    pub fn estimate(mut self, key: &str, v: impl Serialize) -> Self {
        self.estimates.insert(key.to_string(), serde_json::to_value(v).expect("serializable estimate"));
        self
    }

    pub fn verdict(mut self, v: impl Into<String>) -> Self {
        self.verdict = Some(v.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub records: Vec<Record>,
    pub timings: Timings,
}

impl ReportDocument {
    pub fn new(command: String, seed: u64) -> Self {
        Self {
            schema: SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            records: Vec::new(),
            timings: Timings { total_ms: 0.0 },
        }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn finish(&mut self, started: Instant) {
        self.timings.total_ms = started.elapsed().as_secs_f64() * 1e3;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per record; the columns are the union of input and estimate
    /// keys, nested values as compact JSON.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let inputs: BTreeSet<&String> = self.records.iter().flat_map(|r| r.inputs.keys()).collect();
        let estimates: BTreeSet<&String> = self.records.iter().flat_map(|r| r.estimates.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["claim".to_string()];
        header.extend(inputs.iter().map(|k| format!("input.{k}")));
        header.extend(estimates.iter().map(|k| format!("estimate.{k}")));
        header.push("verdict".into());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.claim.clone()];
            row.extend(inputs.iter().map(|k| cell(r.inputs.get(*k))));
            row.extend(estimates.iter().map(|k| cell(r.estimates.get(*k))));
            row.push(r.verdict.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_mirrors_records() {
        let mut doc = ReportDocument::new("x".into(), 1);
        doc.push(Record::new("a").input("digits", "1,2").estimate("value", 0.5).verdict("ok"));
        doc.push(Record::new("b").input("n", 2).estimate("z", 1.5));
        let csv = doc.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "claim,input.digits,input.n,estimate.value,estimate.z,verdict");
        assert_eq!(lines[1], "a,\"1,2\",,0.5,,ok");
        assert_eq!(lines[2], "b,,2,,1.5,");
    }

    #[test]
    fn json_has_schema() {
        let doc = ReportDocument::new("list".into(), 42);
        let v: Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(v["schema"], "mcf-lab/1");
        assert_eq!(v["seed"], 42);
    }
}
