use std::path::Path;
use std::process::ExitCode;

use margolis_core::steenrod::Verdict;
use margolis_core::Error;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub verdict: Verdict,
    pub result: T,
}

/// What a command hands back to `main`: the verdict, the JSON payload and a
/// few lines for the terminal.
pub struct Outcome {
    pub verdict: Verdict,
    pub result: serde_json::Value,
    pub summary: Vec<String>,
}

pub fn exit_code(v: Verdict) -> ExitCode {
    ExitCode::from(match v {
        Verdict::Pass => 0,
        Verdict::Fail => 2,
        Verdict::Inconclusive => 3,
    })
}

/// 1 for bad input, 2 for a mathematically invalid object, 3 for a window
/// that cannot decide the question.
pub fn error_code(e: &anyhow::Error) -> ExitCode {
    let code = match e.downcast_ref::<Error>() {
        Some(Error::InvalidModule(_)) => 2,
        Some(Error::Window(_) | Error::OutsideWindow { .. }) => 3,
        _ => 1,
    };
    ExitCode::from(code)
}

pub fn worst(a: Verdict, b: Verdict) -> Verdict {
    use Verdict::*;
    match (a, b) {
        (Fail, _) | (_, Fail) => Fail,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Pass,
    }
}

pub fn write(path: &Path, report: &Report<serde_json::Value>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}
