//! Numerical evaluation of the log-magnitude integrals, used as an independent oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::closedform::Sign;
use crate::error::{Error, Result};
use crate::rational::{root_angle, RationalTF, TimeDomain, DEFAULT_EPS_CLASS};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

/// Probe radii `R = 10^2 .. 10^6`.
const PROBE_DECADES: std::ops::RangeInclusive<i32> = 2..=6;
const PROBE_FACTOR: f64 = 10.0;
/// Roots this close to the unit circle get a DT breakpoint at their angle.
const DT_BREAK_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_evals: DEFAULT_MAX_EVALS }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Serializes a possibly infinite `f64`, writing infinities as `"+inf"`/`"-inf"`.
pub fn ser_ext<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "+inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    /// Nats (CT) or bits (DT); `+-inf` when diverged.
    #[serde(serialize_with = "ser_ext")]
    pub value: f64,
    #[serde(serialize_with = "ser_ext")]
    pub abs_error_estimate: f64,
    pub n_evaluations: usize,
    pub diverged: bool,
    pub divergence_sign: Option<Sign>,
}

impl QuadratureResult {
    fn divergent(sign: Sign, n_evaluations: usize) -> Self {
        Self {
            value: sign.as_f64(),
            abs_error_estimate: f64::INFINITY,
            n_evaluations,
            diverged: true,
            divergence_sign: Some(sign),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeVerdict {
    Diverged,
    Converging,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub verdict: ProbeVerdict,
    pub sign: Option<Sign>,
    /// Partial integrals over `[1/R, R]` for each probe radius.
    pub partial_integrals: Vec<f64>,
    pub increments: Vec<f64>,
    /// Estimated constant the log-magnitude settles to at the probed tail.
    pub tail_level: f64,
    pub n_evaluations: usize,
}

impl ProbeOutcome {
    pub fn diverged(&self) -> bool {
        self.verdict == ProbeVerdict::Diverged
    }
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest error first; ties broken by position so the order is total and deterministic
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFinite { what: "integrand" });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    if !fc.is_finite() {
        return Err(Error::NonFinite { what: "integrand" });
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * half, resabs * half.abs(), resasc * half.abs());
    let mut error = (resk - resg * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel { a, b, value: resk, error })
}

/// Adaptive integral over the segments between consecutive `breaks` (sorted, at least two).
///
/// Returns `(value, error_estimate, evaluations)`; `Err(NotConverged)` when the
/// budget runs out first.
fn adaptive<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64, max_evals: usize) -> Result<(f64, f64, usize)> {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(f, w[0], w[1])?);
            evals += 15;
        }
    }
    let total_error =
        |heap: &BinaryHeap<Panel>, done: &[Panel]| -> f64 { heap.iter().chain(done).map(|p| p.error).sum() };
    loop {
        let err = total_error(&heap, &done);
        if err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NotConverged { evaluations: evals, error_estimate: err });
        };
        if evals + 30 > max_evals {
            heap.push(worst);
            return Err(Error::NotConverged { evaluations: evals, error_estimate: err });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot bisect further in floating point
            done.push(worst);
            continue;
        }
        heap.push(gk15(f, worst.a, mid)?);
        heap.push(gk15(f, mid, worst.b)?);
        evals += 30;
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|l, r| l.a.total_cmp(&r.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok((value, error, evals))
}

/// `ln|g(x)|`, pairing each zero with a pole so that `|x| -> inf` loses no precision.
fn log_abs(gain: f64, zeros: &[Complex64], poles: &[Complex64], x: Complex64) -> f64 {
    let mut acc = gain.abs().ln();
    let paired = zeros.len().min(poles.len());
    for k in 0..paired {
        let u = (poles[k] - zeros[k]) / (x - poles[k]);
        if u.norm() < 0.5 {
            acc += 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
        } else {
            acc += (x - zeros[k]).norm().ln() - (x - poles[k]).norm().ln();
        }
    }
    for z in &zeros[paired..] {
        acc += (x - z).norm().ln();
    }
    for p in &poles[paired..] {
        acc -= (x - p).norm().ln();
    }
    acc
}

fn reject_boundary(g: &RationalTF) -> Result<()> {
    match g.boundary_roots(DEFAULT_EPS_CLASS).first() {
        Some(r) => Err(Error::BoundaryRoot { which: "integrand".into(), root: *r }),
        None => Ok(()),
    }
}

fn require(g: &RationalTF, domain: TimeDomain) -> Result<()> {
    if g.domain() != domain {
        return Err(Error::WrongDomain { expected: domain.label() });
    }
    Ok(())
}

/// Root-inverted form `g(1/s)`: integrating it unweighted equals the `1/w^2`-weighted
/// integral of `g`. Origin zeros pad the numerator to full degree.
fn inverted(g: &RationalTF) -> Result<(f64, Vec<Complex64>, Vec<Complex64>)> {
    if g.gain() == 0.0 || g.zeros().iter().any(|z| z.norm() <= DEFAULT_EPS_CLASS) {
        return Err(Error::OriginRoot { which: "numerator".into() });
    }
    if g.poles().iter().any(|p| p.norm() <= DEFAULT_EPS_CLASS) {
        return Err(Error::OriginRoot { which: "denominator".into() });
    }
    let g0 = g.eval_at(Complex64::new(0.0, 0.0));
    let mut zeros: Vec<Complex64> = g.zeros().iter().map(|z| z.inv()).collect();
    zeros.resize(g.poles().len(), Complex64::new(0.0, 0.0));
    let poles = g.poles().iter().map(|p| p.inv()).collect();
    Ok((g0.re, zeros, poles))
}

struct CtIntegrand {
    gain: f64,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
}

impl CtIntegrand {
    fn at(&self, w: f64) -> f64 {
        log_abs(self.gain, &self.zeros, &self.poles, Complex64::new(0.0, w))
    }

    /// Breakpoints in the tangent variable at the root moduli and imaginary parts.
    fn theta_breaks(&self) -> Vec<f64> {
        let mut b = vec![0.0, FRAC_PI_2];
        for r in self.zeros.iter().chain(&self.poles) {
            for v in [r.norm(), r.im.abs()] {
                let t = v.atan();
                if t > 1e-12 && t < FRAC_PI_2 - 1e-12 {
                    b.push(t);
                }
            }
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        b
    }

    fn probe(&self, cfg: &QuadConfig) -> Result<ProbeOutcome> {
        // integrate in t = ln w so each decade costs the same
        let f = |t: f64| {
            let w = t.exp();
            self.at(w) * w
        };
        let radii: Vec<f64> = PROBE_DECADES.map(|k| PROBE_FACTOR.powi(k)).collect();
        let piece_tol = cfg.tol;
        let mut evals = 0;
        let (mut partial, _, n) = adaptive(&f, &[-radii[0].ln(), radii[0].ln()], piece_tol, cfg.max_evals)?;
        evals += n;
        partial /= PI;
        let mut partials = vec![partial];
        let mut increments = Vec::new();
        for w in radii.windows(2) {
            let (lo, _, n1) = adaptive(&f, &[-w[1].ln(), -w[0].ln()], piece_tol, cfg.max_evals)?;
            let (hi, _, n2) = adaptive(&f, &[w[0].ln(), w[1].ln()], piece_tol, cfg.max_evals)?;
            evals += n1 + n2;
            let delta = (lo + hi) / PI;
            increments.push(delta);
            partial += delta;
            partials.push(partial);
        }
        let k = increments.len();
        let last = &increments[k - 3..];
        let same_sign = last.iter().all(|d| d.signum() == last[0].signum());
        let large = last.iter().all(|d| d.abs() > 10.0 * cfg.tol);
        let growing = last.windows(2).all(|p| p[1].abs() >= p[0].abs());
        let shrinking =
            last.windows(2).all(|p| p[1].abs() < p[0].abs()) || last.iter().all(|d| d.abs() <= 10.0 * cfg.tol);
        let tail_level = PI * increments[k - 1] / (radii[k] - radii[k - 1]);
        let (verdict, sign) = if same_sign && large && growing {
            (ProbeVerdict::Diverged, Some(if last[0] > 0.0 { Sign::PosInf } else { Sign::NegInf }))
        } else if shrinking {
            (ProbeVerdict::Converging, None)
        } else {
            return Err(Error::Inconclusive { increments });
        };
        Ok(ProbeOutcome { verdict, sign, partial_integrals: partials, increments, tail_level, n_evaluations: evals })
    }

    fn integrate(&self, cfg: &QuadConfig) -> Result<QuadratureResult> {
        let probe = self.probe(cfg);
        let used = match &probe {
            Ok(p) if p.diverged() => {
                return Ok(QuadratureResult::divergent(p.sign.unwrap_or(Sign::NegInf), p.n_evaluations));
            }
            Ok(p) => p.n_evaluations,
            Err(_) => 0,
        };
        let f = |theta: f64| {
            let (s, c) = theta.sin_cos();
            let w = s / c;
            self.at(w) / (c * c)
        };
        let budget = cfg.max_evals.saturating_sub(used);
        match adaptive(&f, &self.theta_breaks(), PI * cfg.tol, budget) {
            Ok((v, e, n)) => Ok(QuadratureResult {
                value: v / PI,
                abs_error_estimate: e / PI,
                n_evaluations: n + used,
                diverged: false,
                divergence_sign: None,
            }),
            Err(err) => Err(probe.err().unwrap_or(err)),
        }
    }
}

/// `(1/2pi) * integral of ln|g(jw)| dw` over the whole axis, in nats.
pub fn ct_log_integral(g: &RationalTF, tol: f64) -> Result<QuadratureResult> {
    ct_log_integral_with(g, &QuadConfig::with_tol(tol))
}

pub fn ct_log_integral_with(g: &RationalTF, cfg: &QuadConfig) -> Result<QuadratureResult> {
    require(g, TimeDomain::Continuous)?;
    reject_boundary(g)?;
    if g.gain() == 0.0 {
        return Ok(QuadratureResult::divergent(Sign::NegInf, 0));
    }
    CtIntegrand { gain: g.gain(), zeros: g.zeros().to_vec(), poles: g.poles().to_vec() }.integrate(cfg)
}

/// `(1/2pi) * integral of ln|g(jw)| / w^2 dw`, in nats.
pub fn ct_weighted_log_integral(g: &RationalTF, tol: f64) -> Result<QuadratureResult> {
    ct_weighted_log_integral_with(g, &QuadConfig::with_tol(tol))
}

pub fn ct_weighted_log_integral_with(g: &RationalTF, cfg: &QuadConfig) -> Result<QuadratureResult> {
    require(g, TimeDomain::Continuous)?;
    reject_boundary(g)?;
    let (gain, zeros, poles) = inverted(g)?;
    CtIntegrand { gain, zeros, poles }.integrate(cfg)
}

/// Partial integrals over growing windows `[1/R, R]`, classifying the tail behaviour.
pub fn divergence_probe(g: &RationalTF, weighted: bool, cfg: &QuadConfig) -> Result<ProbeOutcome> {
    require(g, TimeDomain::Continuous)?;
    reject_boundary(g)?;
    let integrand = if weighted {
        let (gain, zeros, poles) = inverted(g)?;
        CtIntegrand { gain, zeros, poles }
    } else {
        CtIntegrand { gain: g.gain(), zeros: g.zeros().to_vec(), poles: g.poles().to_vec() }
    };
    integrand.probe(cfg)
}

/// `(1/2pi) * integral over [-pi, pi] of log2|g(e^jw)| dw`, in bits.
pub fn dt_log_integral(g: &RationalTF, tol: f64) -> Result<QuadratureResult> {
    dt_log_integral_with(g, &QuadConfig::with_tol(tol))
}

pub fn dt_log_integral_with(g: &RationalTF, cfg: &QuadConfig) -> Result<QuadratureResult> {
    require(g, TimeDomain::Discrete)?;
    reject_boundary(g)?;
    if g.gain() == 0.0 {
        return Ok(QuadratureResult::divergent(Sign::NegInf, 0));
    }
    let f = |w: f64| log_abs(g.gain(), g.zeros(), g.poles(), Complex64::from_polar(1.0, w)) / LN_2;
    let mut breaks = vec![0.0, PI];
    for r in g.zeros().iter().chain(g.poles()) {
        let a = root_angle(*r);
        if (r.norm() - 1.0).abs() <= DT_BREAK_BAND && a > 1e-12 && a < PI - 1e-12 {
            breaks.push(a);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    // conjugate symmetry: the integral over [-pi, 0] mirrors [0, pi]
    let (v, e, n) = adaptive(&f, &breaks, PI * cfg.tol, cfg.max_evals)?;
    Ok(QuadratureResult {
        value: v / PI,
        abs_error_estimate: e / PI,
        n_evaluations: n,
        diverged: false,
        divergence_sign: None,
    })
}
