//! Reports: canonical JSON with a fingerprint over everything but the timing.

use std::collections::BTreeMap;

use ranklab::{Fraction, TOOL_VERSION};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    pub tool_version: String,
    pub spec_fingerprint: Option<String>,
    pub inputs: Value,
    pub result: Value,
    pub evidence: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    pub duration_ms: u64,
    pub report_fingerprint: String,
}

impl Report {
    pub fn new(
        command: &str,
        spec_fingerprint: Option<String>,
        inputs: Value,
        result: Value,
        evidence: Value,
    ) -> Self {
        let mut report = Report {
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            spec_fingerprint,
            inputs,
            result,
            evidence,
            approx: None,
            error: None,
            duration_ms: 0,
            report_fingerprint: String::new(),
        };
        report.seal();
        report
    }

    pub fn failure(command: &str, kind: &str, message: &str) -> Self {
        let mut report = Report::new(command, None, Value::Null, Value::Null, Value::Null);
        report.error = Some(json!({ "kind": kind, "message": message }));
        report.seal();
        report
    }

    /// Adds truncated decimal renderings of every rational in `result`.
    pub fn with_approx(mut self) -> Self {
        let mut values = BTreeMap::new();
        collect_rationals(&self.result, String::new(), &mut values);
        self.approx = Some(json!({
            "authoritative": false,
            "digits": APPROX_DIGITS,
            "values": values,
        }));
        self.seal();
        self
    }

    /// Recomputes the fingerprint; call after any field changes.
    pub fn seal(&mut self) {
        self.report_fingerprint = fingerprint(&self.to_value());
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }
}

const APPROX_DIGITS: usize = 12;

/// SHA-256 of the compact sorted-key JSON with `durationMs` and the
/// fingerprint itself removed.
pub fn fingerprint(report: &Value) -> String {
    let mut v = report.clone();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("durationMs");
        obj.remove("reportFingerprint");
    }
    let bytes = serde_json::to_vec(&v).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// An object with exactly the string keys `num` and `den`.
pub fn as_rational(v: &Value) -> Option<(&str, &str)> {
    let obj = v.as_object()?;
    if obj.len() != 2 {
        return None;
    }
    Some((obj.get("num")?.as_str()?, obj.get("den")?.as_str()?))
}

fn collect_rationals(v: &Value, path: String, out: &mut BTreeMap<String, String>) {
    if as_rational(v).is_some() {
        if let Ok(f) = serde_json::from_value::<Fraction>(v.clone()) {
            out.insert(path, f.to_decimal(APPROX_DIGITS));
        }
        return;
    }
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                collect_rationals(x, format!("{path}/{k}"), out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                collect_rationals(x, format!("{path}/{i}"), out);
            }
        }
        _ => {}
    }
}
