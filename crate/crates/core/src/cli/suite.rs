//! The nine worked examples, run end to end against their published values.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::closedform::Sign;
use crate::quad::ser_ext;

use super::analysis::{analyze, AnalyzeSettings, IntegralKind, PathOutcome};
use super::document::parse_spec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    Finite(f64),
    Infinite(Sign),
}

impl Expected {
    fn as_f64(self) -> f64 {
        match self {
            Expected::Finite(v) => v,
            Expected::Infinite(s) => s.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub document: &'static str,
    pub kind: IntegralKind,
    pub expected: Expected,
    /// Allowed closed-form deviation from `expected`.
    pub tolerance: f64,
}

pub const WORKED_EXAMPLES: [SuiteEntry; 9] = [
    SuiteEntry {
        name: "ct_p_case1",
        document: include_str!("../../examples/ct_p_case1.json"),
        kind: IntegralKind::P,
        expected: Expected::Finite(0.0101),
        tolerance: 5e-4,
    },
    SuiteEntry {
        name: "ct_p_case2",
        document: include_str!("../../examples/ct_p_case2.json"),
        kind: IntegralKind::P,
        expected: Expected::Finite(-0.5015),
        tolerance: 5e-4,
    },
    SuiteEntry {
        name: "ct_p_case3",
        document: include_str!("../../examples/ct_p_case3.json"),
        kind: IntegralKind::P,
        expected: Expected::Finite(0.3991),
        tolerance: 5e-4,
    },
    SuiteEntry {
        name: "ct_p_case4",
        document: include_str!("../../examples/ct_p_case4.json"),
        kind: IntegralKind::P,
        expected: Expected::Infinite(Sign::PosInf),
        tolerance: 0.0,
    },
    SuiteEntry {
        name: "ct_m_balanced",
        document: include_str!("../../examples/ct_m_balanced.json"),
        kind: IntegralKind::M,
        expected: Expected::Finite(-28.6667),
        tolerance: 1e-3,
    },
    SuiteEntry {
        name: "ct_m_unbalanced",
        document: include_str!("../../examples/ct_m_unbalanced.json"),
        kind: IntegralKind::M,
        expected: Expected::Infinite(Sign::NegInf),
        tolerance: 0.0,
    },
    SuiteEntry {
        name: "dt_p_case1",
        document: include_str!("../../examples/dt_p_case1.json"),
        kind: IntegralKind::P,
        expected: Expected::Finite(1.0512),
        tolerance: 5e-4,
    },
    SuiteEntry {
        name: "dt_p_case2",
        document: include_str!("../../examples/dt_p_case2.json"),
        kind: IntegralKind::P,
        expected: Expected::Finite(-1.1255),
        tolerance: 5e-4,
    },
    SuiteEntry {
        name: "dt_m",
        document: include_str!("../../examples/dt_m.json"),
        kind: IntegralKind::M,
        expected: Expected::Finite(0.5443),
        tolerance: 5e-4,
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSettings {
    pub quadrature: bool,
    pub quad_tol: Option<f64>,
    pub eps_gain: Option<f64>,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self { quadrature: true, quad_tol: None, eps_gain: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub name: &'static str,
    pub integral: IntegralKind,
    #[serde(serialize_with = "ser_ext")]
    pub expected: f64,
    /// `NaN` (serialized as `null`) when the closed form failed.
    #[serde(serialize_with = "ser_ext")]
    pub closed_form: f64,
    #[serde(serialize_with = "ser_opt_ext")]
    pub quadrature: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

fn ser_opt_ext<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_ext(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub passed: usize,
    pub total: usize,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.passed == self.total
    }
}

/// Agreement required between quadrature and the closed form.
pub fn quadrature_tolerance(value: f64) -> f64 {
    1e-3f64.max(1e-3 * value.abs())
}

pub fn paper_suite(settings: &SuiteSettings) -> SuiteReport {
    let analyze_settings = AnalyzeSettings {
        quadrature: Some(settings.quadrature),
        lemma1: Some(false),
        quad_tol: settings.quad_tol,
        eps_gain: settings.eps_gain,
        ..AnalyzeSettings::default()
    };
    let rows: Vec<SuiteRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = WORKED_EXAMPLES.iter().map(|e| scope.spawn(|| run_entry(e, &analyze_settings))).collect();
        handles.into_iter().map(|h| h.join().expect("suite worker panicked")).collect()
    });
    let passed = rows.iter().filter(|r| r.pass).count();
    SuiteReport { total: rows.len(), rows, passed }
}

fn run_entry(entry: &SuiteEntry, settings: &AnalyzeSettings) -> SuiteRow {
    let mut row = SuiteRow {
        name: entry.name,
        integral: entry.kind,
        expected: entry.expected.as_f64(),
        closed_form: f64::NAN,
        quadrature: None,
        pass: false,
        detail: String::new(),
    };
    let doc = match parse_spec(entry.document) {
        Ok(d) => d,
        Err(e) => {
            row.detail = e.to_string();
            return row;
        }
    };
    let report = analyze(&doc, settings);
    let Some(ir) = report.integral(entry.kind) else {
        row.detail = format!("validation failed: {}", report.validation.diagnostics.join("; "));
        return row;
    };
    let closed = match &ir.closed_form {
        PathOutcome::Ok(o) => o,
        PathOutcome::Failed { error } => {
            row.detail = error.clone();
            return row;
        }
    };
    row.closed_form = closed.as_f64();
    let mut problems = Vec::new();
    match entry.expected {
        Expected::Finite(v) => {
            if !((row.closed_form - v).abs() <= entry.tolerance) {
                problems.push(format!("closed form off by more than {:.0e}", entry.tolerance));
            }
        }
        Expected::Infinite(s) => {
            if closed.sign_if_unbounded != Some(s) {
                problems.push(format!("closed form should be {s}"));
            }
        }
    }
    if let Some(q) = &ir.quadrature {
        match q {
            PathOutcome::Ok(q) => {
                row.quadrature = Some(q.value);
                match entry.expected {
                    Expected::Finite(_) => {
                        if q.diverged {
                            problems.push("quadrature diverged".into());
                        } else if !((q.value - row.closed_form).abs() <= quadrature_tolerance(row.closed_form)) {
                            problems.push("quadrature disagrees with closed form".into());
                        }
                    }
                    Expected::Infinite(s) => {
                        if !q.diverged || q.divergence_sign != Some(s) {
                            problems.push(format!("quadrature should diverge to {s}"));
                        }
                    }
                }
            }
            PathOutcome::Failed { error } => problems.push(format!("quadrature: {error}")),
        }
    }
    row.pass = problems.is_empty();
    row.detail = if row.pass { closed.case.to_string() } else { problems.join("; ") };
    row
}

fn cell(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "+inf" } else { "-inf" }.to_string()
    } else if v.is_nan() {
        "-".to_string()
    } else {
        format!("{v:.6}")
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<17}{:<5}{:>12}{:>14}{:>14}  {:<8}detail",
            "system", "int", "expected", "closed form", "quadrature", "result"
        );
        for r in &self.rows {
            let kind = match r.integral {
                IntegralKind::P => "P",
                IntegralKind::M => "M",
            };
            let _ = writeln!(
                s,
                "{:<17}{:<5}{:>12}{:>14}{:>14}  {:<8}{}",
                r.name,
                kind,
                cell(r.expected),
                cell(r.closed_form),
                r.quadrature.map(cell).unwrap_or_else(|| "-".into()),
                if r.pass { "pass" } else { "FAIL" },
                r.detail
            );
        }
        let _ = writeln!(s, "{}/{} passed", self.passed, self.total);
        f.write_str(&s)
    }
}
