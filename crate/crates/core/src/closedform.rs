//! Closed-form values of the log-sensitivity integrals.
//!
//! Three independent routes are provided: case formulas expressed in the roots of the
//! `G_x - F G_y` numerator, direct per-factor evaluation of a factored `P` or `M`,
//! and a residue-style evaluation driven by polynomial coefficients.

use std::f64::consts::LN_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{optimal_assignment, root_distance, Polynomial};
use crate::rational::{classify, match_roots, RationalTF, RootClass, TimeDomain, DEFAULT_EPS_CLASS};
use crate::sysmodel::{build_m, build_p, FilteringSystem};

/// Match tolerance between a shared unstable pole and a root of Gamma.
const SHARED_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    #[serde(rename = "CT_P_Case1")]
    CtPCase1,
    #[serde(rename = "CT_P_Case2")]
    CtPCase2,
    #[serde(rename = "CT_P_Case3_Bounded")]
    CtPCase3Bounded,
    #[serde(rename = "CT_P_Unbounded")]
    CtPUnbounded,
    /// `F G_y = 0` with equal relative degrees: `P = 1`.
    #[serde(rename = "CT_P_Trivial")]
    CtPTrivial,
    #[serde(rename = "CT_M_Bounded")]
    CtMBounded,
    #[serde(rename = "CT_M_Unbounded")]
    CtMUnbounded,
    #[serde(rename = "DT_P_Case1")]
    DtPCase1,
    #[serde(rename = "DT_P_Case2")]
    DtPCase2,
    #[serde(rename = "DT_M")]
    DtM,
    /// Result of a direct per-factor evaluation rather than a case formula.
    #[serde(rename = "Direct")]
    Direct,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    PosInf,
    NegInf,
}

impl Sign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::PosInf
        } else {
            Sign::NegInf
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::PosInf => f64::INFINITY,
            Sign::NegInf => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::PosInf => "+inf",
            Sign::NegInf => "-inf",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn of(domain: TimeDomain) -> Self {
        match domain {
            TimeDomain::Continuous => Unit::Nats,
            TimeDomain::Discrete => Unit::Bits,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Unit::Nats => Unit::Bits,
            Unit::Bits => Unit::Nats,
        }
    }

    /// Converts a value expressed in `self` into `target`.
    pub fn convert(self, value: f64, target: Unit) -> f64 {
        match (self, target) {
            (Unit::Nats, Unit::Bits) => value / LN_2,
            (Unit::Bits, Unit::Nats) => value * LN_2,
            _ => value,
        }
    }
}

/// One named sum of a closed-form expression and its signed contribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Converted {
    pub unit: Unit,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralOutcome {
    pub case: CaseTag,
    pub bounded: bool,
    pub value: Option<f64>,
    pub sign_if_unbounded: Option<Sign>,
    pub unit: Unit,
    /// The same value in the other logarithm base.
    pub converted: Option<Converted>,
    pub terms: Vec<Term>,
    /// The branch condition that selected `case`.
    pub condition: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl IntegralOutcome {
    fn bounded(case: CaseTag, unit: Unit, terms: Vec<Term>, condition: impl Into<String>) -> Self {
        let value: f64 = terms.iter().map(|t| t.value).sum();
        Self {
            case,
            bounded: true,
            value: Some(value),
            sign_if_unbounded: None,
            unit,
            converted: Some(Converted { unit: unit.other(), value: unit.convert(value, unit.other()) }),
            terms,
            condition: condition.into(),
            notes: Vec::new(),
        }
    }

    fn unbounded(case: CaseTag, unit: Unit, sign: Sign, condition: impl Into<String>) -> Self {
        Self {
            case,
            bounded: false,
            value: None,
            sign_if_unbounded: Some(sign),
            unit,
            converted: None,
            terms: Vec::new(),
            condition: condition.into(),
            notes: Vec::new(),
        }
    }

    /// Value as an extended real: finite, `+inf` or `-inf`.
    pub fn as_f64(&self) -> f64 {
        match (self.value, self.sign_if_unbounded) {
            (Some(v), _) => v,
            (None, Some(s)) => s.as_f64(),
            (None, None) => f64::NAN,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

impl fmt::Display for IntegralOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match self.unit {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        };
        match (self.value, self.sign_if_unbounded) {
            (Some(v), _) => write!(f, "{v:.6} {unit} [{}]", self.case),
            (None, Some(s)) => write!(f, "{s} [{}]", self.case),
            (None, None) => write!(f, "undefined [{}]", self.case),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaFactorization {
    pub gamma: Polynomial,
    pub lead: f64,
    /// The shared unstable poles, each of which was located among Gamma's roots.
    pub matched_shared_poles: Vec<Complex64>,
    pub residual_roots: Vec<Complex64>,
    pub nmp_residual: Vec<Complex64>,
    /// Largest root distance between a shared pole and the Gamma root assigned to it.
    pub max_match_error: f64,
}

impl GammaFactorization {
    /// Sum of all Gamma roots recovered from its two highest coefficients.
    pub fn root_sum_from_coefficients(&self) -> Complex64 {
        let c = self.gamma.coeffs();
        let n = self.gamma.degree();
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        -c[n - 1] / c[n]
    }
}

/// Degree Gamma must have absent leading-coefficient cancellation.
fn predicted_gamma_degree(sys: &FilteringSystem) -> usize {
    let shared = sys.shared_unstable().len();
    let first = sys.gx().zeros().len() + sys.fgy().poles().len() - shared;
    let second = sys.gx().poles().len() - shared + sys.fgy().zeros().len();
    first.max(second)
}

/// Factors the `G_x - F G_y` numerator and separates the shared unstable poles.
pub fn gamma_factorization(sys: &FilteringSystem) -> Result<GammaFactorization> {
    factor_gamma(sys, false)
}

/// `allow_collapse` accepts a Gamma whose leading coefficients cancelled (`K = K_x`
/// with equal relative degrees); the strict form reports it as `DegreeCollapse`.
pub(crate) fn factor_gamma(sys: &FilteringSystem, allow_collapse: bool) -> Result<GammaFactorization> {
    sys.require_valid()?;
    let shared = sys.shared_unstable().to_vec();
    let expected = predicted_gamma_degree(sys);

    if sys.k() == 0.0 {
        // Gamma = K_x num(G_x) den(F G_y minus shared); the shared list is empty because
        // with F G_y = 0 validation only passes when G_x has no unstable poles.
        let gamma = sys.gamma_polynomial();
        let mut residual = sys.gx().zeros().to_vec();
        residual.extend(sys.fgy_poles_unshared());
        return Ok(finish(sys, gamma, sys.kx(), shared, residual, 0.0));
    }

    let degenerate = sys.degree_gap() == 0 && (sys.kx() - sys.k()).abs() <= sys.tolerances().eps_gain * sys.kx().abs();
    let gamma = sys.gamma_polynomial();
    if !allow_collapse && (degenerate || gamma.degree() < expected || gamma.is_zero()) {
        return Err(Error::DegreeCollapse { expected, actual: if gamma.is_zero() { 0 } else { gamma.degree() } });
    }
    if gamma.is_zero() {
        return Ok(finish(sys, gamma, 0.0, shared, Vec::new(), 0.0));
    }
    let lead = gamma.leading().re;
    let roots = gamma.find_roots()?;
    if shared.is_empty() {
        return Ok(finish(sys, gamma, lead, shared, roots, 0.0));
    }
    if roots.len() < shared.len() {
        return Err(Error::SharedPoleNotCancelled { pole: shared[roots.len()] });
    }

    let cost: Vec<Vec<f64>> = shared.iter().map(|p| roots.iter().map(|r| root_distance(*p, *r)).collect()).collect();
    let assignment = optimal_assignment(&cost);
    let mut max_err = 0.0f64;
    for (i, &j) in assignment.iter().enumerate() {
        let multiplicity =
            shared.iter().filter(|q| root_distance(**q, shared[i]) <= sys.tolerances().eps_cancel).count();
        // a k-fold root is only resolved to about the k-th root of working precision
        let tol = SHARED_MATCH_TOL.powf(1.0 / multiplicity as f64);
        if cost[i][j] > tol {
            return Err(Error::SharedPoleNotCancelled { pole: shared[i] });
        }
        max_err = max_err.max(cost[i][j]);
    }
    let residual = roots.iter().enumerate().filter(|(j, _)| !assignment.contains(j)).map(|(_, r)| *r).collect();
    Ok(finish(sys, gamma, lead, shared, residual, max_err))
}

fn finish(
    sys: &FilteringSystem,
    gamma: Polynomial,
    lead: f64,
    matched: Vec<Complex64>,
    residual: Vec<Complex64>,
    max_match_error: f64,
) -> GammaFactorization {
    let nmp_residual = classify(&residual, sys.domain(), DEFAULT_EPS_CLASS).nmp;
    GammaFactorization {
        gamma,
        lead,
        matched_shared_poles: matched,
        residual_roots: residual,
        nmp_residual,
        max_match_error,
    }
}

fn require_domain(sys: &FilteringSystem, domain: TimeDomain) -> Result<()> {
    if sys.domain() == domain {
        Ok(())
    } else {
        Err(Error::WrongDomain { expected: domain.label() })
    }
}

fn sum_re(roots: &[Complex64]) -> f64 {
    roots.iter().map(|r| r.re).sum()
}

fn sum_log2_abs(roots: &[Complex64]) -> f64 {
    roots.iter().map(|r| r.norm().log2()).sum()
}

fn term(name: &'static str, value: f64) -> Term {
    // an empty float sum is -0.0
    Term { name, value: value + 0.0 }
}

/// `(1/2pi) * integral of ln|P(jw)| dw` in nats.
pub fn ct_p_integral(sys: &FilteringSystem) -> Result<IntegralOutcome> {
    require_domain(sys, TimeDomain::Continuous)?;
    sys.require_valid()?;
    let (kx, k) = (sys.kx(), sys.k());
    let d = sys.degree_gap();
    let eps_class = sys.tolerances().eps_class;

    if d == 0 && k == 0.0 {
        return Ok(IntegralOutcome::bounded(
            CaseTag::CtPTrivial,
            Unit::Nats,
            vec![term("zero_filter", 0.0)],
            "K = 0 (P = 1)",
        ));
    }
    if d == 0 && (k - 2.0 * kx).abs() > sys.tolerances().eps_gain * (2.0 * kx).abs() {
        let log_ratio = ((kx - k) / kx).abs().ln();
        return Ok(IntegralOutcome::unbounded(
            CaseTag::CtPUnbounded,
            Unit::Nats,
            Sign::of(log_ratio),
            format!("m_x+n = n_x+m and K != 2K_x (ln|(K_x-K)/K_x| = {log_ratio:.6})"),
        ));
    }

    let gamma = gamma_factorization(sys)?;
    let r_bar = term("sum_Re_r_bar", sum_re(&gamma.nmp_residual));
    let p_bar = term("sum_Re_p_bar", sum_re(sys.shared_unstable()));
    let gx_zeros = sys.gx().classify_zeros(eps_class);
    let mut out = if d >= 2 {
        IntegralOutcome::bounded(
            CaseTag::CtPCase1,
            Unit::Nats,
            vec![r_bar, p_bar, term("minus_sum_Re_z_bar", -sum_re(&gx_zeros.nmp))],
            "m_x+n > n_x+m+1",
        )
    } else if d == 1 {
        IntegralOutcome::bounded(
            CaseTag::CtPCase2,
            Unit::Nats,
            vec![
                r_bar,
                p_bar,
                term("minus_sum_Re_z_bar", -sum_re(&gx_zeros.nmp)),
                term("minus_K_over_2Kx", -k / (2.0 * kx)),
            ],
            "m_x+n = n_x+m+1",
        )
    } else {
        IntegralOutcome::bounded(
            CaseTag::CtPCase3Bounded,
            Unit::Nats,
            vec![
                r_bar,
                term("sum_Re_z_i_mp", sum_re(&gx_zeros.mp)),
                p_bar,
                term("minus_sum_Re_p_i_stable", -sum_re(&sys.gx_poles_unshared())),
                term("minus_sum_Re_z_j", -sum_re(sys.fgy().zeros())),
                term("sum_Re_p_j", sum_re(&sys.fgy_poles_unshared())),
            ],
            "m_x+n = n_x+m and K = 2K_x",
        )
    };
    if gamma.max_match_error > 0.0 {
        out.notes.push(format!("shared-pole match error {:.2e}", gamma.max_match_error));
    }
    Ok(out)
}

/// `ln|M(0)|` from the root lists, robust to extreme products.
fn ln_abs_m_at_zero(sys: &FilteringSystem) -> f64 {
    let ln_sum = |v: &[Complex64]| v.iter().map(|r| r.norm().ln()).sum::<f64>();
    (sys.k() / sys.kx()).abs().ln() + ln_sum(&sys.gx_poles_unshared()) + ln_sum(sys.fgy().zeros())
        - ln_sum(sys.gx().zeros())
        - ln_sum(&sys.fgy_poles_unshared())
}

/// `(1/2pi) * integral of ln|M(jw)| / w^2 dw` in nats.
pub fn ct_m_integral(sys: &FilteringSystem) -> Result<IntegralOutcome> {
    require_domain(sys, TimeDomain::Continuous)?;
    sys.require_valid()?;
    let eps_class = sys.tolerances().eps_class;
    let origin = |v: &[Complex64]| v.iter().any(|r| r.norm() <= eps_class);
    if origin(&sys.gx_poles_unshared()) || origin(sys.fgy().zeros()) {
        return Err(Error::OriginRoot { which: "M numerator".into() });
    }
    if origin(sys.gx().zeros()) || origin(&sys.fgy_poles_unshared()) {
        return Err(Error::OriginRoot { which: "M denominator".into() });
    }

    if sys.k() == 0.0 {
        return Err(Error::ZeroGain);
    }
    let ln_m0 = ln_abs_m_at_zero(sys);
    // |M(0)| = 1 within eps_gain relative
    if !(ln_m0.abs() <= sys.tolerances().eps_gain) {
        return Ok(IntegralOutcome::unbounded(
            CaseTag::CtMUnbounded,
            Unit::Nats,
            Sign::of(ln_m0),
            format!("|M(0)| != 1 (ln|M(0)| = {ln_m0:.6})"),
        ));
    }
    let inv_re = |v: &[Complex64]| v.iter().map(|r| r.inv().re).sum::<f64>();
    let inv_abs_re = |v: &[Complex64]| v.iter().map(|r| r.inv().re.abs()).sum::<f64>();
    Ok(IntegralOutcome::bounded(
        CaseTag::CtMBounded,
        Unit::Nats,
        vec![
            term("half_sum_inv_p_j", 0.5 * inv_re(&sys.fgy_poles_unshared())),
            term("minus_half_sum_inv_p_i", -0.5 * inv_re(&sys.gx_poles_unshared())),
            term("half_sum_abs_Re_inv_z_j", 0.5 * inv_abs_re(sys.fgy().zeros())),
            term("minus_half_sum_abs_Re_inv_z_i", -0.5 * inv_abs_re(sys.gx().zeros())),
        ],
        "|K prod p_i prod z_j| = |K_x prod z_i prod p_j|",
    ))
}

/// `(1/2pi) * integral over [-pi, pi] of log2|P(e^jw)| dw` in bits.
pub fn dt_p_integral(sys: &FilteringSystem) -> Result<IntegralOutcome> {
    require_domain(sys, TimeDomain::Discrete)?;
    sys.require_valid()?;
    let (kx, k) = (sys.kx(), sys.k());
    let d = sys.degree_gap();
    if d == 0 && (kx - k).abs() <= sys.tolerances().eps_gain * kx.abs() {
        let direct_value =
            build_p(sys).ok().filter(|p| p.gain() != 0.0).and_then(|p| lemma_direct_dt(&p).ok()).and_then(|o| o.value);
        return Err(Error::DegenerateGain { direct_value });
    }
    let gamma = gamma_factorization(sys)?;
    let z_bar = sys.gx().classify_zeros(sys.tolerances().eps_class).nmp;
    let mut terms = vec![
        term("sum_log2_p_bar", sum_log2_abs(sys.shared_unstable())),
        term("minus_sum_log2_z_bar", -sum_log2_abs(&z_bar)),
        term("sum_log2_r_bar", sum_log2_abs(&gamma.nmp_residual)),
    ];
    if d >= 1 {
        Ok(IntegralOutcome::bounded(CaseTag::DtPCase1, Unit::Bits, terms, "m_x+n >= n_x+m+1"))
    } else {
        terms.push(term("log2_gain_ratio", ((kx - k) / kx).abs().log2()));
        Ok(IntegralOutcome::bounded(CaseTag::DtPCase2, Unit::Bits, terms, "m_x+n = n_x+m"))
    }
}

/// `(1/2pi) * integral over [-pi, pi] of log2|M(e^jw)| dw` in bits.
pub fn dt_m_integral(sys: &FilteringSystem) -> Result<IntegralOutcome> {
    require_domain(sys, TimeDomain::Discrete)?;
    sys.require_valid()?;
    if sys.k() == 0.0 {
        return Err(Error::ZeroGain);
    }
    let eps_class = sys.tolerances().eps_class;
    Ok(IntegralOutcome::bounded(
        CaseTag::DtM,
        Unit::Bits,
        vec![
            term("sum_log2_z_bar_j", sum_log2_abs(&sys.fgy().classify_zeros(eps_class).nmp)),
            term("minus_sum_log2_z_bar_i", -sum_log2_abs(&sys.gx().classify_zeros(eps_class).nmp)),
            term("log2_K_over_Kx", (sys.k() / sys.kx()).abs().log2()),
        ],
        "always bounded",
    ))
}

fn reject_boundary(tf: &RationalTF, which: &str) -> Result<()> {
    match tf.boundary_roots(DEFAULT_EPS_CLASS).first() {
        Some(root) => Err(Error::BoundaryRoot { which: which.into(), root: *root }),
        None => Ok(()),
    }
}

/// Per-factor evaluation of the CT integral of `ln|g(jw)|` (or `ln|g(jw)|/w^2` when weighted).
pub fn lemma_direct_ct(g: &RationalTF, weighted: bool) -> Result<IntegralOutcome> {
    if g.domain() != TimeDomain::Continuous {
        return Err(Error::WrongDomain { expected: TimeDomain::Continuous.label() });
    }
    reject_boundary(g, "transfer function")?;
    if !weighted {
        return Ok(direct_ct_unweighted(g.gain(), g.zeros(), g.poles()));
    }
    if g.zeros().iter().chain(g.poles()).any(|r| r.norm() <= DEFAULT_EPS_CLASS) {
        return Err(Error::OriginRoot { which: "transfer function".into() });
    }
    // w -> 1/w turns the weighted integral into an unweighted one of g(1/s), whose
    // constant is g(0) and whose roots are the inverses plus origin zeros (which add nothing)
    if g.gain() == 0.0 {
        return Err(Error::ZeroGain);
    }
    let ln_g0 = g.gain().abs().ln() + g.zeros().iter().map(|z| z.norm().ln()).sum::<f64>()
        - g.poles().iter().map(|p| p.norm().ln()).sum::<f64>();
    let mut zeros: Vec<Complex64> = g.zeros().iter().map(|z| z.inv()).collect();
    zeros.resize(g.poles().len(), Complex64::new(0.0, 0.0));
    let poles: Vec<Complex64> = g.poles().iter().map(|p| p.inv()).collect();
    let gain = if ln_g0.abs() <= DEFAULT_EPS_GAIN_DIRECT { 1.0 } else { ln_g0.exp() };
    let mut out = direct_ct_unweighted(gain, &zeros, &poles);
    out.condition = format!("weighted: |g(0)| = 1 (ln|g(0)| = {ln_g0:.3e})");
    Ok(out)
}

/// Tolerance on `ln|gain|` for unit-modulus tests in the direct routes.
const DEFAULT_EPS_GAIN_DIRECT: f64 = crate::sysmodel::DEFAULT_EPS_GAIN;

fn direct_ct_unweighted(gain: f64, zeros: &[Complex64], poles: &[Complex64]) -> IntegralOutcome {
    if zeros.len() < poles.len() || gain == 0.0 {
        return IntegralOutcome::unbounded(CaseTag::Direct, Unit::Nats, Sign::NegInf, "|g(jw)| -> 0 as w -> inf");
    }
    let ln_gain = gain.abs().ln();
    if ln_gain.abs() > DEFAULT_EPS_GAIN_DIRECT {
        return IntegralOutcome::unbounded(
            CaseTag::Direct,
            Unit::Nats,
            Sign::of(ln_gain),
            format!("|g(inf)| != 1 (ln|g(inf)| = {ln_gain:.6})"),
        );
    }
    let abs_re = |v: &[Complex64]| v.iter().map(|r| r.re.abs()).sum::<f64>();
    IntegralOutcome::bounded(
        CaseTag::Direct,
        Unit::Nats,
        vec![
            term("half_sum_abs_Re_zeros", 0.5 * abs_re(zeros)),
            term("minus_half_sum_abs_Re_poles", -0.5 * abs_re(poles)),
        ],
        "equal degrees and |g(inf)| = 1",
    )
}

/// Per-factor evaluation of the DT integral of `log2|g(e^jw)|`.
pub fn lemma_direct_dt(g: &RationalTF) -> Result<IntegralOutcome> {
    if g.domain() != TimeDomain::Discrete {
        return Err(Error::WrongDomain { expected: TimeDomain::Discrete.label() });
    }
    reject_boundary(g, "transfer function")?;
    if g.gain() == 0.0 {
        return Err(Error::ZeroGain);
    }
    let outside = |v: &[Complex64]| v.iter().filter(|r| r.norm() > 1.0).map(|r| r.norm().log2()).sum::<f64>();
    Ok(IntegralOutcome::bounded(
        CaseTag::Direct,
        Unit::Bits,
        vec![
            term("log2_gain", g.gain().abs().log2()),
            term("sum_log2_zeros_outside", outside(g.zeros())),
            term("minus_sum_log2_poles_outside", -outside(g.poles())),
        ],
        "always bounded",
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Result {
    /// `None` when `|P(inf)| != 1`.
    pub p_value: Option<f64>,
    /// `None` when `|M(0)| != 1` or `M(0) = 0`.
    pub m_value: Option<f64>,
    pub notes: Vec<String>,
}

/// Residue-style evaluation of both CT integrals from polynomial coefficients.
pub fn lemma1_crosscheck(sys: &FilteringSystem) -> Result<Lemma1Result> {
    require_domain(sys, TimeDomain::Continuous)?;
    sys.require_valid()?;
    let eps = sys.tolerances();
    let mut notes = Vec::new();

    // NMP zeros of G_x that are also zeros of F G_y cancel out of both P and M
    let gx_nmp = sys.gx().classify_zeros(eps.eps_class).nmp;
    let common = match_roots(&gx_nmp, sys.fgy().zeros(), eps.eps_cancel);
    let zeta: Vec<Complex64> =
        gx_nmp.iter().enumerate().filter(|(i, _)| !common.iter().any(|c| c.0 == *i)).map(|(_, z)| *z).collect();
    if !common.is_empty() {
        notes.push(format!("{} NMP zero(s) of G_x shared with F G_y excluded from Z_x", common.len()));
    }

    let p_value = lemma1_p(sys, &zeta, &mut notes)?;
    let m_value = lemma1_m(sys, &zeta, &mut notes)?;
    if p_value.is_none() && m_value.is_none() {
        return Err(Error::PreconditionUnmet(notes.join("; ")));
    }
    Ok(Lemma1Result { p_value, m_value, notes })
}

fn lemma1_p(sys: &FilteringSystem, zeta: &[Complex64], notes: &mut Vec<String>) -> Result<Option<f64>> {
    let (kx, k) = (sys.kx(), sys.k());
    let d = sys.degree_gap();
    let p_inf = if d >= 1 { 1.0 } else { (kx - k) / kx };
    if (p_inf.abs().ln()).abs() > sys.tolerances().eps_gain {
        notes.push(format!("|P(inf)| = {:.6} != 1; P-integral check skipped", p_inf.abs()));
        return Ok(None);
    }
    if k == 0.0 {
        return Ok(Some(0.0));
    }
    let gamma = gamma_factorization(sys)?;
    // lim s (P(s) - P(inf)) / (2 P(inf)) = (sum of P poles - sum of P zeros) / 2
    let pole_sum: Complex64 = sys.gx().zeros().iter().chain(&sys.fgy_poles_unshared()).sum();
    let zero_sum = gamma.root_sum_from_coefficients();
    let limit = 0.5 * (pole_sum - zero_sum).re;

    let mut p_zeros = gamma.matched_shared_poles.clone();
    p_zeros.extend(gamma.residual_roots.iter().copied());
    let p_poles: Vec<Complex64> = sys.gx().zeros().iter().copied().chain(sys.fgy_poles_unshared()).collect();
    let reduced =
        RationalTF::from_parts(1.0, p_zeros, p_poles, sys.domain()).cancel_common(sys.tolerances().eps_cancel);
    let xi = reduced.classify_zeros(sys.tolerances().eps_class).nmp;
    Ok(Some(limit + sum_re(&xi) - sum_re(zeta)))
}

fn lemma1_m(sys: &FilteringSystem, zeta: &[Complex64], notes: &mut Vec<String>) -> Result<Option<f64>> {
    if sys.k() == 0.0 {
        notes.push("M(0) = 0; M-integral check skipped".into());
        return Ok(None);
    }
    let m = build_m(sys)?;
    let num = m.numerator();
    let den = m.denominator();
    let (n0, d0) = (num.coeffs()[0], den.coeffs()[0]);
    if n0.norm() == 0.0 || d0.norm() == 0.0 {
        notes.push("M has a root at the origin; M-integral check skipped".into());
        return Ok(None);
    }
    let m0 = n0 / d0;
    if m0.norm().ln().abs() > sys.tolerances().eps_gain {
        notes.push(format!("|M(0)| = {:.6} != 1; M-integral check skipped", m0.norm()));
        return Ok(None);
    }
    let c1 = |p: &Polynomial| p.coeffs().get(1).copied().unwrap_or_default();
    // M'(0)/M(0) from the two lowest coefficients of numerator and denominator
    let log_derivative = c1(&num) / n0 - c1(&den) / d0;
    let reduced = m.cancel_common(sys.tolerances().eps_cancel);
    let delta = reduced.classify_zeros(sys.tolerances().eps_class).nmp;
    let inv_re = |v: &[Complex64]| v.iter().map(|r| r.inv().re).sum::<f64>();
    Ok(Some(0.5 * log_derivative.re + inv_re(&delta) - inv_re(zeta)))
}

/// Classification helper shared with the report layer.
pub fn is_unstable(domain: TimeDomain, root: Complex64) -> bool {
    domain.classify_root(root, DEFAULT_EPS_CLASS) == RootClass::Unstable
}
