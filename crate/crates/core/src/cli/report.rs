//! Report records: one NDJSON line per sample, one aggregate line, and a
//! plain-text summary for humans.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::jets::TangentSample;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Info = BTreeMap<String, Value>;

/// How a check's value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Equals,
}

impl Comparison {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Equals => value == threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Equals => "==",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            threshold,
            comparison,
            // NaN fails every comparison.
            pass: comparison.holds(value, threshold),
        }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, threshold)
    }

    pub fn equals(name: &str, value: usize, expected: usize) -> Self {
        Self::new(name, value as f64, Comparison::Equals, expected as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord<'a> {
    pub record: &'static str,
    pub scenario: &'static str,
    pub index: usize,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub checks: &'a [Check],
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub info: &'a Info,
    pub engine_version: &'static str,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord<'a> {
    pub record: &'static str,
    pub scenario: &'static str,
    pub index: usize,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub error: String,
    pub engine_version: &'static str,
    pub seed: u64,
}

/// Worst case of one named check over all samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub comparison: Comparison,
    pub threshold: f64,
    pub worst: f64,
    pub evaluated: usize,
    pub failures: usize,
    pub pass: bool,
}

impl CheckSummary {
    fn start(c: &Check) -> Self {
        CheckSummary {
            name: c.name.clone(),
            comparison: c.comparison,
            threshold: c.threshold,
            worst: c.value,
            evaluated: 0,
            failures: 0,
            pass: true,
        }
    }

    fn absorb(&mut self, c: &Check) {
        self.evaluated += 1;
        if !c.pass {
            self.failures += 1;
            self.pass = false;
        }
        if self.worst.is_nan() {
            return;
        }
        self.worst = match self.comparison {
            _ if c.value.is_nan() => f64::NAN,
            Comparison::AtMost => self.worst.max(c.value),
            Comparison::AtLeast => self.worst.min(c.value),
            // Report the value furthest from the target.
            Comparison::Equals => {
                if (c.value - c.threshold).abs() > (self.worst - c.threshold).abs() {
                    c.value
                } else {
                    self.worst
                }
            }
        };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRecord {
    pub record: &'static str,
    pub scenario: &'static str,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<String>,
    pub pass: bool,
    pub exit_status: i32,
    pub accepted: usize,
    pub rejected: usize,
    pub drawn: usize,
    pub checks: Vec<CheckSummary>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub info: Info,
    pub engine_version: &'static str,
    pub seed: u64,
}

/// Accumulates records in sample order.
#[derive(Debug)]
pub struct Collector {
    scenario: &'static str,
    seed: u64,
    lines: Vec<String>,
    summaries: Vec<CheckSummary>,
    pub accepted: usize,
    pub errored: usize,
}

impl Collector {
    pub fn new(scenario: &'static str, seed: u64) -> Self {
        Collector {
            scenario,
            seed,
            lines: Vec::new(),
            summaries: Vec::new(),
            accepted: 0,
            errored: 0,
        }
    }

    fn absorb(&mut self, checks: &[Check]) {
        for c in checks {
            let pos = match self.summaries.iter().position(|s| s.name == c.name) {
                Some(i) => i,
                None => {
                    self.summaries.push(CheckSummary::start(c));
                    self.summaries.len() - 1
                }
            };
            self.summaries[pos].absorb(c);
        }
    }

    pub fn sample(&mut self, index: usize, p: &TangentSample, checks: Vec<Check>, info: Info) {
        self.absorb(&checks);
        self.accepted += 1;
        let rec = SampleRecord {
            record: "sample",
            scenario: self.scenario,
            index,
            x: p.x(),
            y: p.y(),
            checks: &checks,
            info: &info,
            engine_version: ENGINE_VERSION,
            seed: self.seed,
        };
        self.lines
            .push(serde_json::to_string(&rec).expect("records serialize"));
    }

    pub fn error(&mut self, index: usize, p: &TangentSample, error: impl ToString) {
        self.errored += 1;
        let rec = ErrorRecord {
            record: "error",
            scenario: self.scenario,
            index,
            x: p.x(),
            y: p.y(),
            error: error.to_string(),
            engine_version: ENGINE_VERSION,
            seed: self.seed,
        };
        self.lines
            .push(serde_json::to_string(&rec).expect("records serialize"));
    }

    /// A check that is evaluated once for the whole run rather than per sample.
    pub fn global(&mut self, check: Check) {
        self.absorb(std::slice::from_ref(&check));
    }

    pub fn all_checks_pass(&self) -> bool {
        self.summaries.iter().all(|s| s.pass)
    }

    pub fn summaries(&self) -> &[CheckSummary] {
        &self.summaries
    }

    pub fn finish(self, aggregate: &AggregateRecord) -> String {
        let mut out = String::new();
        for line in self.lines {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(aggregate).expect("records serialize"));
        out.push('\n');
        out
    }
}

/// Human-readable digest of an aggregate record.
pub fn summary(agg: &AggregateRecord, dimension: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "spraylab {} | scenario {} | n = {} | seed {}",
        agg.engine_version, agg.scenario, dimension, agg.seed
    );
    let _ = writeln!(
        s,
        "samples: {} evaluated, {} rejected, {} drawn",
        agg.accepted, agg.rejected, agg.drawn
    );
    for c in &agg.checks {
        let _ = writeln!(
            s,
            "  [{}] {:<28} worst {:>12.4e} {} {:.1e} ({} of {} failed)",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.comparison.symbol(),
            c.threshold,
            c.failures,
            c.evaluated
        );
    }
    let _ = writeln!(s, "verdict: {}", describe_verdict(&agg.verdict));
    if let Some(e) = &agg.expected_verdict {
        let _ = writeln!(s, "expected verdict: {e}");
    }
    let _ = writeln!(
        s,
        "result: {} (exit status {})",
        if agg.pass { "PASS" } else { "FAIL" },
        agg.exit_status
    );
    s
}

fn describe_verdict(v: &str) -> String {
    let text = match v {
        "METRIZABLE_CFC" => "metrizable by a constant flag curvature metric",
        "FAILS_I" => "condition (i) fails: d_J α ≠ 0",
        "FAILS_II" => "condition (ii) fails: d_h ρ ≠ 0",
        "FAILS_III" => "condition (iii) fails: dd_J ρ is degenerate",
        "INCONCLUSIVE" => "ρ vanishes at every sample",
        "LIOUVILLE_IN_SPAN" => "not metrizable: Liouville in holonomy span",
        "LIOUVILLE_NOT_IN_SPAN" => "undecided: Liouville not in holonomy span",
        "LIOUVILLE_MIXED" => "Liouville membership differs between samples",
        "METRIZES" => "the energy solves the metrizability system and is regular",
        "SINGULAR_HESSIAN" => "the energy solves the system but its Hessian is singular",
        "NOT_A_SOLUTION" => "the energy does not solve the metrizability system",
        "REALIZABLE" => "an affine pullback of the Klein metric",
        "NOT_REALIZABLE" => "not an affine pullback of the Klein metric",
        "STRAIGHT" => "all geodesics are straight lines",
        "NOT_STRAIGHT" => "some geodesic bends",
        "NO_SAMPLES" => "no sample could be evaluated",
        _ => "",
    };
    if text.is_empty() {
        v.to_string()
    } else {
        format!("{v} ({text})")
    }
}
