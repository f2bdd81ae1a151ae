//! Full pipeline for one system: validation, both integrals by every route, cross-checks.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::closedform::{
    ct_m_integral, ct_p_integral, dt_m_integral, dt_p_integral, lemma1_crosscheck, lemma_direct_ct, lemma_direct_dt,
    CaseTag, IntegralOutcome, Lemma1Result, Sign,
};
use crate::error::{Error, Result};
use crate::quad::{ct_log_integral, ct_weighted_log_integral, dt_log_integral, QuadratureResult};
use crate::rational::{RationalTF, TimeDomain};
use crate::sysmodel::{
    boundary_scan, build_m, build_p, complementarity_check, validate, FilteringSystem, ValidationReport, DEFAULT_SEED,
};

use super::document::SystemSpecDocument;

pub const COMPLEMENTARITY_SAMPLES: usize = 100;

/// Command-line overrides; `None` defers to the document's options.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeSettings {
    pub quadrature: Option<bool>,
    pub lemma1: Option<bool>,
    pub quad_tol: Option<f64>,
    pub eps_gain: Option<f64>,
    pub seed: u64,
}

impl Default for AnalyzeSettings {
    fn default() -> Self {
        Self { quadrature: None, lemma1: None, quad_tol: None, eps_gain: None, seed: DEFAULT_SEED }
    }
}

/// Result of one evaluation route: its value, or the error it raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PathOutcome<T> {
    Ok(T),
    Failed { error: String },
}

impl<T> PathOutcome<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => PathOutcome::Ok(v),
            Err(e) => PathOutcome::Failed { error: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            PathOutcome::Ok(v) => Some(v),
            PathOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntegralKind {
    P,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralReport {
    pub kind: IntegralKind,
    pub case: Option<CaseTag>,
    pub closed_form: PathOutcome<IntegralOutcome>,
    pub lemma_direct: PathOutcome<IntegralOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma1: Option<PathOutcome<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<PathOutcome<QuadratureResult>>,
    /// Largest disagreement among the bounded routes that produced a value.
    pub max_pairwise_delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deltas {
    pub p: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub domain: TimeDomain,
    pub validation: ValidationReport,
    pub p_integral: Option<IntegralReport>,
    pub m_integral: Option<IntegralReport>,
    pub deltas: Deltas,
    pub complementarity_deviation: Option<f64>,
    pub findings: Vec<String>,
}

impl AnalysisReport {
    /// 0 when the analysis ran, 2 when validation rejected the system.
    pub fn exit_code(&self) -> i32 {
        if self.validation.all_ok() {
            0
        } else {
            2
        }
    }

    pub fn integral(&self, kind: IntegralKind) -> Option<&IntegralReport> {
        match kind {
            IntegralKind::P => self.p_integral.as_ref(),
            IntegralKind::M => self.m_integral.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Verdict {
    Finite(f64),
    Infinite(Sign),
}

impl IntegralReport {
    fn verdicts(&self) -> Vec<(&'static str, Verdict)> {
        let mut out = Vec::new();
        let outcome = |o: &IntegralOutcome| match (o.value, o.sign_if_unbounded) {
            (Some(v), _) => Some(Verdict::Finite(v)),
            (None, Some(s)) => Some(Verdict::Infinite(s)),
            _ => None,
        };
        if let Some(v) = self.closed_form.ok().and_then(outcome) {
            out.push(("closed form", v));
        }
        if let Some(v) = self.lemma_direct.ok().and_then(outcome) {
            out.push(("lemma direct", v));
        }
        if let Some(v) = self.lemma1.as_ref().and_then(|p| p.ok()) {
            out.push(("lemma1", Verdict::Finite(*v)));
        }
        if let Some(q) = self.quadrature.as_ref().and_then(|p| p.ok()) {
            let v = match q.divergence_sign {
                Some(s) if q.diverged => Verdict::Infinite(s),
                _ => Verdict::Finite(q.value),
            };
            out.push(("quadrature", v));
        }
        out
    }

    fn finish(&mut self, findings: &mut Vec<String>) {
        let label = match self.kind {
            IntegralKind::P => "P-integral",
            IntegralKind::M => "M-integral",
        };
        self.case = self.closed_form.ok().map(|o| o.case);
        let verdicts = self.verdicts();
        let finite: Vec<f64> =
            verdicts.iter().filter_map(|(_, v)| if let Verdict::Finite(x) = v { Some(*x) } else { None }).collect();
        self.max_pairwise_delta = if finite.len() >= 2 {
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            Some(hi - lo)
        } else {
            None
        };
        for (name, v) in &verdicts[1.min(verdicts.len())..] {
            let (first_name, first) = verdicts[0];
            let agree = match (first, *v) {
                (Verdict::Finite(_), Verdict::Finite(_)) => true,
                (Verdict::Infinite(a), Verdict::Infinite(b)) => a == b,
                _ => false,
            };
            if !agree {
                findings.push(format!("{label}: {first_name} gives {} but {name} gives {}", show(first), show(*v)));
            }
        }
        if let Some(Verdict::Infinite(s)) = verdicts.first().map(|v| v.1) {
            if verdicts.iter().all(|(_, v)| *v == Verdict::Infinite(s)) {
                findings.push(format!("{label} is unbounded ({s}); all routes agree"));
            }
        }
        if let PathOutcome::Failed { error } = &self.closed_form {
            findings.push(format!("{label}: {error}"));
        }
        if let Some(o) = self.closed_form.ok() {
            for n in &o.notes {
                findings.push(format!("{label}: {n}"));
            }
        }
    }
}

fn show(v: Verdict) -> String {
    match v {
        Verdict::Finite(x) => format!("{x:.6}"),
        Verdict::Infinite(s) => s.to_string(),
    }
}

pub fn analyze(doc: &SystemSpecDocument, settings: &AnalyzeSettings) -> AnalysisReport {
    let mut tol = doc.tolerances();
    if let Some(g) = settings.eps_gain {
        tol.eps_gain = g;
    }
    let quad_tol = settings.quad_tol.unwrap_or_else(|| doc.quad_tol());
    let run_quad = settings.quadrature.unwrap_or_else(|| doc.run_quadrature());
    let run_lemma1 = settings.lemma1.unwrap_or_else(|| doc.run_lemma1());

    let mut report = AnalysisReport {
        name: doc.name.clone(),
        domain: doc.domain,
        validation: ValidationReport::default(),
        p_integral: None,
        m_integral: None,
        deltas: Deltas { p: None, m: None },
        complementarity_deviation: None,
        findings: Vec::new(),
    };

    let (gx, gy, f) = match doc.transfer_functions() {
        Ok(t) => t,
        Err(e) => {
            report.validation = ValidationReport::rejected(&e, Vec::new());
            return report;
        }
    };
    let sys = match validate(gx.clone(), gy.clone(), f.clone(), tol) {
        Ok((sys, validation)) => {
            report.validation = validation;
            sys
        }
        Err(e) => {
            let boundary = boundary_scan(&gx, &gy, &f, None, tol.eps_class).into_iter().map(|(_, r)| r).collect();
            report.validation = ValidationReport::rejected(&e, boundary);
            return report;
        }
    };
    if !report.validation.all_ok() {
        return report;
    }

    if sys.k() == 0.0 {
        report.findings.push("F G_y = 0: P = 1 and M = 0".into());
    }
    report.complementarity_deviation = complementarity_check(&sys, COMPLEMENTARITY_SAMPLES, settings.seed).ok();

    let lemma1 = (run_lemma1 && sys.domain() == TimeDomain::Continuous).then(|| lemma1_crosscheck(&sys));
    let p_tf = build_p(&sys);
    let m_tf = build_m(&sys);
    let mut p = integral_report(&sys, IntegralKind::P, &p_tf, quad_tol, run_quad, lemma1.as_ref());
    let mut m = integral_report(&sys, IntegralKind::M, &m_tf, quad_tol, run_quad, lemma1.as_ref());
    if let Some(Ok(l)) = &lemma1 {
        for n in &l.notes {
            report.findings.push(format!("lemma1: {n}"));
        }
    }
    p.finish(&mut report.findings);
    m.finish(&mut report.findings);
    report.deltas = Deltas { p: p.max_pairwise_delta, m: m.max_pairwise_delta };
    report.p_integral = Some(p);
    report.m_integral = Some(m);
    report
}

fn integral_report(
    sys: &FilteringSystem,
    kind: IntegralKind,
    tf: &Result<RationalTF>,
    quad_tol: f64,
    run_quad: bool,
    lemma1: Option<&Result<Lemma1Result>>,
) -> IntegralReport {
    let ct = sys.domain() == TimeDomain::Continuous;
    let closed = match (ct, kind) {
        (true, IntegralKind::P) => ct_p_integral(sys),
        (true, IntegralKind::M) => ct_m_integral(sys),
        (false, IntegralKind::P) => dt_p_integral(sys),
        (false, IntegralKind::M) => dt_m_integral(sys),
    };
    let weighted = kind == IntegralKind::M;
    let with_tf = |f: &dyn Fn(&RationalTF) -> Result<_>| match tf {
        Ok(t) => f(t),
        Err(e) => Err(e.clone()),
    };
    let direct = with_tf(&|t| if ct { lemma_direct_ct(t, weighted) } else { lemma_direct_dt(t) });
    let quadrature = run_quad.then(|| {
        PathOutcome::from(match tf {
            Ok(t) if ct && weighted => ct_weighted_log_integral(t, quad_tol),
            Ok(t) if ct => ct_log_integral(t, quad_tol),
            Ok(t) => dt_log_integral(t, quad_tol),
            Err(e) => Err(e.clone()),
        })
    });
    let lemma1 = lemma1.map(|r| match r {
        Ok(l) => {
            let v = if kind == IntegralKind::P { l.p_value } else { l.m_value };
            PathOutcome::from(v.ok_or_else(|| Error::PreconditionUnmet(l.notes.join("; "))))
        }
        Err(e) => PathOutcome::Failed { error: e.to_string() },
    });
    IntegralReport {
        kind,
        case: None,
        closed_form: PathOutcome::from(closed),
        lemma_direct: PathOutcome::from(direct),
        lemma1,
        quadrature,
        max_pairwise_delta: None,
    }
}

fn fmt_outcome(o: &PathOutcome<IntegralOutcome>) -> String {
    match o {
        PathOutcome::Ok(o) => match (o.value, o.sign_if_unbounded, o.converted) {
            (Some(v), _, Some(c)) => format!("{v:.6} {} ({:.6} {})", unit(o.unit), c.value, unit(c.unit)),
            (Some(v), _, None) => format!("{v:.6} {}", unit(o.unit)),
            (None, Some(s), _) => format!("{s}"),
            _ => "undefined".into(),
        },
        PathOutcome::Failed { error } => format!("error: {error}"),
    }
}

fn unit(u: crate::closedform::Unit) -> &'static str {
    match u {
        crate::closedform::Unit::Nats => "nats",
        crate::closedform::Unit::Bits => "bits",
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        let _ = writeln!(s, "system: {} ({})", self.name.as_deref().unwrap_or("<unnamed>"), self.domain.label());
        let v = &self.validation;
        let _ = writeln!(
            s,
            "assumptions: A1 {}  A2 {}  A3 {}  A4 {}",
            flag(v.a1_ok),
            flag(v.a2_ok),
            flag(v.a3_ok),
            flag(v.a4_ok)
        );
        for d in &v.diagnostics {
            let _ = writeln!(s, "  ! {d}");
        }
        for r in &v.boundary_roots {
            let _ = writeln!(s, "  ! boundary root {r}");
        }
        if let Some(c) = self.complementarity_deviation {
            let _ = writeln!(s, "complementarity max|P+M-1|: {c:.3e}");
        }
        for ir in [&self.p_integral, &self.m_integral].into_iter().flatten() {
            let name = match ir.kind {
                IntegralKind::P => "P-integral",
                IntegralKind::M => "M-integral",
            };
            let (case, cond) = match ir.closed_form.ok() {
                Some(o) => (o.case.to_string(), o.condition.clone()),
                None => ("-".into(), String::new()),
            };
            let _ = writeln!(s, "{name} [{case}] {cond}");
            let _ = writeln!(s, "  {:<14}{}", "closed form", fmt_outcome(&ir.closed_form));
            if let Some(o) = ir.closed_form.ok() {
                for t in &o.terms {
                    let _ = writeln!(s, "    {:<32}{:>14.6}", t.name, t.value);
                }
            }
            let _ = writeln!(s, "  {:<14}{}", "lemma direct", fmt_outcome(&ir.lemma_direct));
            match &ir.lemma1 {
                Some(PathOutcome::Ok(v)) => {
                    let _ = writeln!(s, "  {:<14}{v:.6}", "lemma1");
                }
                Some(PathOutcome::Failed { error }) => {
                    let _ = writeln!(s, "  {:<14}skipped: {error}", "lemma1");
                }
                None => {}
            }
            match &ir.quadrature {
                Some(PathOutcome::Ok(q)) if q.diverged => {
                    let sign = q.divergence_sign.map(|x| x.to_string()).unwrap_or_default();
                    let _ = writeln!(s, "  {:<14}diverged {sign} ({} evals)", "quadrature", q.n_evaluations);
                }
                Some(PathOutcome::Ok(q)) => {
                    let _ = writeln!(
                        s,
                        "  {:<14}{:.6} (err {:.1e}, {} evals)",
                        "quadrature", q.value, q.abs_error_estimate, q.n_evaluations
                    );
                }
                Some(PathOutcome::Failed { error }) => {
                    let _ = writeln!(s, "  {:<14}error: {error}", "quadrature");
                }
                None => {}
            }
            if let Some(d) = ir.max_pairwise_delta {
                let _ = writeln!(s, "  {:<14}{d:.3e}", "max delta");
            }
        }
        if !self.findings.is_empty() {
            let _ = writeln!(s, "findings:");
            for x in &self.findings {
                let _ = writeln!(s, "  - {x}");
            }
        }
        f.write_str(&s)
    }
}
