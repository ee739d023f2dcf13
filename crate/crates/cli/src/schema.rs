//! Structural validator for the published report schema.

use serde_json::Value;

use crate::report::fingerprint;
use crate::COMMANDS;

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

const REQUIRED: [&str; 8] = [
    "command",
    "toolVersion",
    "specFingerprint",
    "inputs",
    "result",
    "evidence",
    "durationMs",
    "reportFingerprint",
];
const OPTIONAL: [&str; 2] = ["approx", "error"];

fn is_sha256(v: &Value) -> bool {
    v.as_str().is_some_and(|s| {
        s.len() == 64
            && s.bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    })
}

fn is_integer_string(s: &str, signed: bool) -> bool {
    let digits = if signed {
        s.strip_prefix('-').unwrap_or(s)
    } else {
        s
    };
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Rejects fractional numbers anywhere and malformed `{num, den}` pairs.
fn check_numbers(v: &Value, path: &str, errors: &mut Vec<String>) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            errors.push(format!("{path}: non-integer number {n}"));
        }
        Value::Object(map) => {
            let keys: Vec<&str> = map.keys().map(String::as_str).collect();
            if keys == ["den", "num"] {
                let num = map["num"].as_str().filter(|s| is_integer_string(s, true));
                let den = map["den"]
                    .as_str()
                    .filter(|s| is_integer_string(s, false) && s.bytes().any(|b| b != b'0'));
                if num.is_none() || den.is_none() {
                    errors.push(format!("{path}: malformed rational"));
                }
                return;
            }
            for (k, x) in map {
                check_numbers(x, &format!("{path}/{k}"), errors);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                check_numbers(x, &format!("{path}/{i}"), errors);
            }
        }
        _ => {}
    }
}

/// Every violation found, or `Ok` when the report conforms.
pub fn validate_report(report: &Value) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    let Some(obj) = report.as_object() else {
        return Err(vec!["report is not an object".into()]);
    };
    for key in REQUIRED {
        if !obj.contains_key(key) {
            errors.push(format!("missing {key}"));
        }
    }
    for key in obj.keys() {
        if !REQUIRED.contains(&key.as_str()) && !OPTIONAL.contains(&key.as_str()) {
            errors.push(format!("unknown key {key}"));
        }
    }
    match obj.get("command").and_then(Value::as_str) {
        Some(c) if COMMANDS.contains(&c) || c == "usage" => {}
        _ => errors.push("command is not a known subcommand".into()),
    }
    if !obj.get("toolVersion").is_some_and(Value::is_string) {
        errors.push("toolVersion is not a string".into());
    }
    if let Some(fp) = obj.get("specFingerprint") {
        if !fp.is_null() && !is_sha256(fp) {
            errors.push("specFingerprint is not a SHA-256 hex digest".into());
        }
    }
    if !obj.get("durationMs").is_some_and(Value::is_u64) {
        errors.push("durationMs is not a nonnegative integer".into());
    }
    if let Some(approx) = obj.get("approx") {
        if approx.get("authoritative") != Some(&Value::Bool(false)) {
            errors.push("approx must be marked non-authoritative".into());
        }
        if !approx.get("values").is_some_and(|v| {
            v.as_object()
                .is_some_and(|m| m.values().all(Value::is_string))
        }) {
            errors.push("approx values must be strings".into());
        }
    }
    if let Some(err) = obj.get("error") {
        if !err.get("kind").is_some_and(Value::is_string)
            || !err.get("message").is_some_and(Value::is_string)
        {
            errors.push("error needs string kind and message".into());
        }
    }
    check_numbers(report, "", &mut errors);
    match obj.get("reportFingerprint") {
        Some(fp) if is_sha256(fp) => {
            if fp.as_str() != Some(fingerprint(report).as_str()) {
                errors.push("reportFingerprint does not match the content".into());
            }
        }
        _ => errors.push("reportFingerprint is not a SHA-256 hex digest".into()),
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Report;
    use serde_json::json;

    #[test]
    fn published_schema_is_json() {
        let v: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        assert_eq!(v["required"].as_array().unwrap().len(), REQUIRED.len());
    }

    #[test]
    fn accepts_reports_and_rejects_tampering() {
        let r = Report::new(
            "heights",
            None,
            json!({"stages": 2}),
            json!({"m": {"num": "65", "den": "81"}}),
            json!(null),
        )
        .with_approx();
        let v = r.to_value();
        assert_eq!(validate_report(&v), Ok(()));
        let mut t = v.clone();
        t["result"]["m"]["num"] = json!("66");
        assert!(validate_report(&t)
            .unwrap_err()
            .iter()
            .any(|e| e.contains("does not match")));
        let mut f = v.clone();
        f["result"] = json!(0.5);
        assert!(validate_report(&f).is_err());
        let mut z = v;
        z["result"]["m"]["den"] = json!("0");
        assert!(validate_report(&z).is_err());
    }
}
