//! Script mode: one statement per line, one JSON document per line out.

use std::io::{BufRead, Write};

use iolap::SessionManager;
use serde_json::json;

/// Counts of a script run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub ok: usize,
    pub failed: usize,
}

/// Blank lines and lines starting with `#` or `--` are skipped. Failures are
/// printed as `{"error": {...}}` and do not stop the run.
pub fn run_script(sessions: &SessionManager, input: impl BufRead, mut out: impl Write) -> std::io::Result<Outcome> {
    let id = sessions.create();
    let mut outcome = Outcome::default();
    for line in input.lines() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') || text.starts_with("--") {
            continue;
        }
        match sessions.submit(id, text) {
            Ok(doc) => {
                outcome.ok += 1;
                writeln!(out, "{doc}")?;
            }
            Err(e) => {
                outcome.failed += 1;
                writeln!(out, "{}", json!({"text": text, "error": e.to_json()}))?;
            }
        }
    }
    Ok(outcome)
}
