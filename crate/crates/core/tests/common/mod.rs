#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

pub mod map_ops;

use affordance_core::td_affordances::{parse_td_with, validate_td, Mode, ParseOptions, TdError, TdViolation};
use serde_json::Value;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(rel: &str) -> String {
    fs::read_to_string(fixtures().join(rel)).unwrap()
}

fn summarize(v: &[TdViolation]) -> Value {
    Value::Array(
        v.iter()
            .map(|v| serde_json::json!({"path": v.path, "severity": v.severity, "code": v.code}))
            .collect(),
    )
}

/// Checks every TD fixture against the committed manifest in both modes and
/// returns one line per disagreement.
pub fn td_manifest_mismatches() -> (usize, Vec<String>) {
    let manifest: Value = serde_json::from_str(&read_fixture("td/manifest.json")).unwrap();
    let entries = manifest["fixtures"].as_array().unwrap();
    let mut bad = Vec::new();
    for entry in entries {
        let file = entry["file"].as_str().unwrap();
        let doc = read_fixture(&format!("td/{file}"));
        for (mode, key) in [(Mode::Strict, "strict"), (Mode::Lenient, "lenient")] {
            let want = &entry[key];
            let validated = validate_td(&doc, mode);
            let (outcome, parse_violations, counts) = match parse_td_with(&doc, &ParseOptions::new(mode)) {
                Ok(p) => {
                    let c = &p.catalog;
                    let counts = serde_json::json!({
                        "properties": c.properties.len(), "actions": c.actions.len(), "events": c.events.len()
                    });
                    ("ok", p.warnings, Some(counts))
                }
                Err(e @ TdError::Json { .. }) => ("json_error", e.violations(), None),
                Err(e) => ("td_error", e.violations(), None),
            };
            if outcome != want["outcome"] {
                bad.push(format!(
                    "{file} [{key}]: outcome {outcome}, manifest {}",
                    want["outcome"]
                ));
            }
            if summarize(&validated) != want["violations"] {
                bad.push(format!("{file} [{key}]: validate gave {}", summarize(&validated)));
            }
            if summarize(&parse_violations) != want["violations"] {
                bad.push(format!(
                    "{file} [{key}]: parse reported {}",
                    summarize(&parse_violations)
                ));
            }
            if let (Some(got), Some(exp)) = (&counts, want.get("catalog")) {
                if got != exp {
                    bad.push(format!("{file} [{key}]: catalog {got}, manifest {exp}"));
                }
            }
            if outcome != "json_error" {
                let value: Value = serde_json::from_str(&doc).unwrap();
                for v in &validated {
                    if value.pointer(&v.path).is_none() {
                        bad.push(format!("{file} [{key}]: unresolvable path {}", v.path));
                    }
                }
            }
        }
    }
    (entries.len(), bad)
}
