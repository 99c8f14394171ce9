//! Report rendering and exit codes.

use courant_core::report::Report;
use serde_json::{json, Value};

use crate::run::Artifact;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

pub fn exit_code(report: &Report) -> i32 {
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn report_json(report: &Report) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let witness = c
                .witness
                .as_ref()
                .map(|w| json!({"identity": w.identity, "indices": w.indices, "residual": w.residual}));
            json!({"name": c.name, "status": c.status.as_str(), "witness": witness})
        })
        .collect();
    json!({"version": 1, "checks": checks, "exit": exit_code(report)})
}

/// Text mode prints the report lines followed by any artifacts; JSON mode
/// prints only the report object.
pub fn emit_report(report: &Report, artifacts: &[Artifact], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report_json(report)).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = report.to_string();
            for a in artifacts {
                s.push_str(&format!("\n# {}\n{}", a.title, a.body));
            }
            s
        }
    }
}
