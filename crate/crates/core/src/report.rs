//! Stable plain-text reports for scenario verifiers and the CLI.
//!
//! Report bodies are byte-identical across runs for identical inputs: no
//! timestamps, no machine-dependent data. Every scenario report carries a
//! model-deviations section naming the hypotheses of the geometric setting
//! that fail in the finite model.

use std::fmt;

/// A line-oriented report with a pass/fail verdict and deviation notes.
#[derive(Debug, Clone)]
pub struct Report {
    pub title: String,
    pub lines: Vec<String>,
    pub passed: bool,
    pub deviations: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Report {
        Report { title: title.into(), lines: Vec::new(), passed: true, deviations: Vec::new() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Record a named check; a failure flips the verdict.
    pub fn check(&mut self, name: &str, ok: bool) {
        self.lines.push(format!("check {}: {}", name, if ok { "PASS" } else { "FAIL" }));
        self.passed &= ok;
    }

    pub fn deviation(&mut self, s: impl Into<String>) {
        self.deviations.push(s.into());
    }

    /// Key=value rendering for scripting.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut out = vec![format!("scenario={}", self.title)];
        for l in &self.lines {
            if let Some(rest) = l.strip_prefix("check ") {
                if let Some((name, verdict)) = rest.rsplit_once(": ") {
                    out.push(format!(
                        "check.{}={}",
                        name.replace([' ', ':'], "_"),
                        verdict
                    ));
                    continue;
                }
            }
            if let Some((k, v)) = l.split_once(": ") {
                out.push(format!("{}={}", k.replace(' ', "_"), v));
            }
        }
        out.push(format!("result={}", if self.passed { "PASS" } else { "FAIL" }));
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}", self.title)?;
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        writeln!(f, "result: {}", if self.passed { "PASS" } else { "FAIL" })?;
        writeln!(f, "model deviations:")?;
        for d in &self.deviations {
            writeln!(f, "  - {d}")?;
        }
        Ok(())
    }
}

/// Invariant factors rendered as `Z/d1 x Z/d2 x ...`, or `trivial`.
pub fn format_factors(factors: &[u64]) -> String {
    if factors.is_empty() {
        "trivial".to_string()
    } else {
        factors.iter().map(|d| format!("Z/{d}")).collect::<Vec<_>>().join(" x ")
    }
}
