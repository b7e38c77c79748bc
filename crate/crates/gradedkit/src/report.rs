//! Deterministic verification reports.
//!
//! Reports collect per-check entries with a verdict and the nonzero
//! residuals in canonical text. JSON output is byte-stable for a fixed
//! input: objects carry sorted keys and entries follow declaration order.
//! Timing never enters the report body; the CLI prints it to stderr.

use serde_json::{json, Map, Value};
use std::fmt;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotChecked,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::NotChecked => write!(f, "not-checked"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckEntry {
    pub id: String,
    pub verdict: Verdict,
    /// Nonzero residuals, as (label, canonical expression text).
    pub residuals: Vec<(String, String)>,
    /// Failed or informational weight audits.
    pub weight_audits: Vec<String>,
    /// Number of exact identities evaluated for this check.
    pub identities_checked: usize,
    /// Identities that were skipped (e.g. associativity without a triple
    /// parametrisation).
    pub not_checked: Vec<String>,
}

impl CheckEntry {
    pub fn new(id: impl Into<String>) -> CheckEntry {
        CheckEntry {
            id: id.into(),
            verdict: Verdict::Pass,
            residuals: Vec::new(),
            weight_audits: Vec::new(),
            identities_checked: 0,
            not_checked: Vec::new(),
        }
    }

    /// Record a batch of residuals: zero ones only count, nonzero ones are
    /// kept and fail the entry.
    pub fn residuals<S: fmt::Display>(
        &mut self,
        label: &str,
        items: impl IntoIterator<Item = (String, S)>,
        is_zero: impl Fn(&S) -> bool,
    ) {
        for (name, value) in items {
            self.identities_checked += 1;
            if !is_zero(&value) {
                self.verdict = Verdict::Fail;
                self.residuals
                    .push((format!("{label}.{name}"), value.to_string()));
            }
        }
    }

    pub fn audit(&mut self, message: Option<String>) {
        self.identities_checked += 1;
        if let Some(m) = message {
            self.verdict = Verdict::Fail;
            self.weight_audits.push(m);
        }
    }

    pub fn skip(&mut self, what: &str) {
        self.not_checked.push(what.to_string());
    }

    pub fn fail(&mut self, label: &str, value: impl fmt::Display) {
        self.verdict = Verdict::Fail;
        self.residuals.push((label.to_string(), value.to_string()));
    }

    fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("id".into(), json!(self.id));
        m.insert("verdict".into(), json!(self.verdict.to_string()));
        m.insert(
            "residuals".into(),
            Value::Array(
                self.residuals
                    .iter()
                    .map(|(k, v)| {
                        let mut r = Map::new();
                        r.insert("name".into(), json!(k));
                        r.insert("value".into(), json!(v));
                        Value::Object(r)
                    })
                    .collect(),
            ),
        );
        m.insert("weight_audits".into(), json!(self.weight_audits));
        m.insert("identities_checked".into(), json!(self.identities_checked));
        m.insert("not_checked".into(), json!(self.not_checked));
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<CheckEntry>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut m = Map::new();
        m.insert("version".into(), json!(REPORT_VERSION));
        m.insert(
            "checks".into(),
            Value::Array(self.checks.iter().map(|c| c.to_value()).collect()),
        );
        serde_json::to_string_pretty(&Value::Object(m)).expect("report serialises")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {} ({} identities)",
                c.verdict, c.id, c.identities_checked
            )?;
            for (name, value) in &c.residuals {
                writeln!(f, "    residual {name} = {value}")?;
            }
            for a in &c.weight_audits {
                writeln!(f, "    audit: {a}")?;
            }
            for s in &c.not_checked {
                writeln!(f, "    not checked: {s}")?;
            }
        }
        Ok(())
    }
}
