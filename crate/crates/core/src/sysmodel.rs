//! The plant/filter configuration: assumption checks and the two sensitivity functions.
//!
//! `G_x` maps the process input to the signal being estimated, `G_y` maps it to the
//! noise-free measurement, and `F` produces the estimate from the measurement.
//! `P = (G_x - F G_y) / G_x` is the map from signal to estimation error and
//! `M = F G_y / G_x` the map from signal to estimate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closedform::factor_gamma;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{
    match_roots, product_cancel, remove_matched, RationalTF, TimeDomain, DEFAULT_EPS_CANCEL, DEFAULT_EPS_CLASS,
};

pub const DEFAULT_EPS_GAIN: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0x5eed_f17e;

/// Relative size below which a derivative of Gamma counts as vanishing at a shared pole.
const GAMMA_VANISH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_cancel: f64,
    pub eps_class: f64,
    pub eps_gain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eps_cancel: DEFAULT_EPS_CANCEL, eps_class: DEFAULT_EPS_CLASS, eps_gain: DEFAULT_EPS_GAIN }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub a1_ok: bool,
    pub a2_ok: bool,
    pub a3_ok: bool,
    pub a4_ok: bool,
    pub diagnostics: Vec<String>,
    pub boundary_roots: Vec<Complex64>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.a1_ok && self.a2_ok && self.a3_ok && self.a4_ok
    }

    /// Report for an input rejected before the assumptions could be checked.
    pub fn rejected(err: &Error, boundary_roots: Vec<Complex64>) -> Self {
        Self { diagnostics: vec![err.to_string()], boundary_roots, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct FilteringSystem {
    gx: RationalTF,
    gy: RationalTF,
    f: RationalTF,
    fgy: RationalTF,
    domain: TimeDomain,
    shared_unstable: Vec<Complex64>,
    gy_only_unstable: Vec<Complex64>,
    tolerances: Tolerances,
    report: ValidationReport,
}

impl FilteringSystem {
    pub fn gx(&self) -> &RationalTF {
        &self.gx
    }
    pub fn gy(&self) -> &RationalTF {
        &self.gy
    }
    pub fn f(&self) -> &RationalTF {
        &self.f
    }
    /// `F G_y` after cancelling common factors.
    pub fn fgy(&self) -> &RationalTF {
        &self.fgy
    }
    pub fn domain(&self) -> TimeDomain {
        self.domain
    }
    /// Unstable poles shared by `G_x` and `G_y`.
    pub fn shared_unstable(&self) -> &[Complex64] {
        &self.shared_unstable
    }
    /// Unstable poles of `G_y` absent from `G_x`; `F` must cancel them.
    pub fn gy_only_unstable(&self) -> &[Complex64] {
        &self.gy_only_unstable
    }
    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }
    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn kx(&self) -> f64 {
        self.gx.gain()
    }

    /// Leading coefficient of `F G_y`.
    pub fn k(&self) -> f64 {
        self.fgy.gain()
    }

    /// `(m_x + n) - (n_x + m)`; nonnegative under A3.
    pub fn degree_gap(&self) -> isize {
        self.fgy.relative_degree() - self.gx.relative_degree()
    }

    /// Poles of `G_x` other than the shared unstable ones.
    pub fn gx_poles_unshared(&self) -> Vec<Complex64> {
        remove_matched(self.gx.poles(), &self.shared_unstable, self.tolerances.eps_cancel).0
    }

    /// Poles of `F G_y` other than the shared unstable ones.
    pub fn fgy_poles_unshared(&self) -> Vec<Complex64> {
        remove_matched(self.fgy.poles(), &self.shared_unstable, self.tolerances.eps_cancel).0
    }

    /// Numerator of `G_x - F G_y` over the common denominator.
    pub fn gamma_polynomial(&self) -> Polynomial {
        let first = Polynomial::from_roots(Complex64::new(self.kx(), 0.0), self.gx.zeros())
            .multiply(&Polynomial::from_roots(Complex64::new(1.0, 0.0), &self.fgy_poles_unshared()));
        let second = Polynomial::from_roots(Complex64::new(self.k(), 0.0), &self.gx_poles_unshared())
            .multiply(&Polynomial::from_roots(Complex64::new(1.0, 0.0), self.fgy.zeros()));
        first.subtract(&second)
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        if self.report.all_ok() {
            Ok(())
        } else {
            Err(Error::NotValidated(self.report.diagnostics.join("; ")))
        }
    }
}

/// All zeros and poles of the four functions that sit on the stability boundary.
pub fn boundary_scan(
    gx: &RationalTF,
    gy: &RationalTF,
    f: &RationalTF,
    fgy: Option<&RationalTF>,
    eps_class: f64,
) -> Vec<(&'static str, Complex64)> {
    let mut out = Vec::new();
    let mut named: Vec<(&'static str, &RationalTF)> = vec![("G_x", gx), ("G_y", gy), ("F", f)];
    if let Some(fgy) = fgy {
        named.push(("F G_y", fgy));
    }
    for (name, tf) in named {
        out.extend(tf.boundary_roots(eps_class).into_iter().map(|r| (name, r)));
    }
    out
}

/// Checks assumptions A1-A4 and assembles the system.
///
/// Assumption failures are reported in the returned `ValidationReport`; only inputs
/// the theory cannot even describe (boundary roots, zero `G_x`, mixed domains) are errors.
pub fn validate(
    gx: RationalTF,
    gy: RationalTF,
    f: RationalTF,
    tolerances: Tolerances,
) -> Result<(FilteringSystem, ValidationReport)> {
    let domain = gx.domain();
    if gy.domain() != domain || f.domain() != domain {
        return Err(Error::DomainMismatch);
    }
    if gx.is_zero() {
        return Err(Error::ZeroGx);
    }
    let fgy = product_cancel(&f, &gy, tolerances.eps_cancel)?;
    if let Some((which, root)) = boundary_scan(&gx, &gy, &f, Some(&fgy), tolerances.eps_class).first() {
        return Err(Error::BoundaryRoot { which: which.to_string(), root: *root });
    }

    let mut report = ValidationReport { a1_ok: true, ..ValidationReport::default() };

    report.a2_ok = f.classify_poles(tolerances.eps_class).nmp.is_empty();
    if !report.a2_ok {
        report.diagnostics.push("A2: F has unstable poles".into());
    }

    report.a3_ok = fgy.relative_degree() >= gx.relative_degree();
    if !report.a3_ok {
        report.diagnostics.push(format!(
            "A3: F G_y / G_x is improper (relative degree {} < {})",
            fgy.relative_degree(),
            gx.relative_degree()
        ));
    }

    let gx_unstable = gx.classify_poles(tolerances.eps_class).nmp;
    let gy_unstable = gy.classify_poles(tolerances.eps_class).nmp;
    let pairs = match_roots(&gx_unstable, &gy_unstable, tolerances.eps_cancel);
    let shared_unstable: Vec<Complex64> = pairs.iter().map(|&(i, _)| gx_unstable[i]).collect();
    let gy_only_unstable: Vec<Complex64> =
        gy_unstable.iter().enumerate().filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j)).map(|(_, p)| *p).collect();

    let mut a4 = true;
    for (i, p) in gx_unstable.iter().enumerate() {
        if !pairs.iter().any(|q| q.0 == i) {
            a4 = false;
            report.diagnostics.push(format!("A4: unstable pole {p} of G_x does not appear in G_y"));
        }
    }
    if !fgy.is_zero() {
        let cancelled = match_roots(&gy_only_unstable, f.zeros(), tolerances.eps_cancel);
        for (i, p) in gy_only_unstable.iter().enumerate() {
            if !cancelled.iter().any(|q| q.0 == i) {
                a4 = false;
                report.diagnostics.push(format!("A4: unstable pole {p} of G_y is not cancelled by a zero of F"));
            }
        }
    }

    let mut system = FilteringSystem {
        gx,
        gy,
        f,
        fgy,
        domain,
        shared_unstable,
        gy_only_unstable,
        tolerances,
        report: ValidationReport::default(),
    };

    if a4 && report.a2_ok && report.a3_ok {
        let gamma = system.gamma_polynomial();
        for (pole, multiplicity, order) in unvanished_orders(&gamma, &system.shared_unstable, tolerances.eps_cancel) {
            a4 = false;
            report.diagnostics.push(format!(
                "A4: G_x - F G_y numerator does not vanish to order {multiplicity} at shared unstable pole {pole} (derivative {order} is nonzero)"
            ));
        }
    }
    report.a4_ok = a4 && report.a2_ok && report.a3_ok;
    system.report = report.clone();
    Ok((system, report))
}

/// Shared poles at which Gamma fails to vanish with the pole's multiplicity.
fn unvanished_orders(gamma: &Polynomial, shared: &[Complex64], eps: f64) -> Vec<(Complex64, usize, usize)> {
    let mut failures = Vec::new();
    let mut seen = vec![false; shared.len()];
    for i in 0..shared.len() {
        if seen[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..shared.len())
            .filter(|&k| !seen[k] && crate::poly::root_distance(shared[k], shared[i]) <= eps)
            .collect();
        for &k in &cluster {
            seen[k] = true;
        }
        let multiplicity = cluster.len();
        let mut derivative = gamma.clone();
        for order in 0..multiplicity {
            let scale = derivative.evaluation_scale(shared[i]);
            if derivative.is_zero() {
                break;
            }
            if derivative.evaluate(shared[i]).norm() > GAMMA_VANISH_TOL * scale {
                failures.push((shared[i], multiplicity, order));
                break;
            }
            derivative = derivative.derivative();
        }
    }
    failures
}

/// `P = (G_x - F G_y) / G_x`, with numerator built from the factored Gamma polynomial.
pub fn build_p(sys: &FilteringSystem) -> Result<RationalTF> {
    sys.require_valid()?;
    if sys.k() == 0.0 {
        return Ok(RationalTF::from_parts(1.0, vec![], vec![], sys.domain));
    }
    let gamma = factor_gamma(sys, true)?;
    let mut zeros = gamma.matched_shared_poles.clone();
    zeros.extend(gamma.residual_roots.iter().copied());
    let mut poles = sys.gx.zeros().to_vec();
    poles.extend(sys.fgy_poles_unshared());
    Ok(RationalTF::from_parts(gamma.lead / sys.kx(), zeros, poles, sys.domain))
}

/// `M = F G_y / G_x`.
pub fn build_m(sys: &FilteringSystem) -> Result<RationalTF> {
    sys.require_valid()?;
    let mut zeros = sys.gx_poles_unshared();
    zeros.extend(sys.fgy.zeros().iter().copied());
    let mut poles = sys.gx.zeros().to_vec();
    poles.extend(sys.fgy_poles_unshared());
    Ok(RationalTF::from_parts(sys.k() / sys.kx(), zeros, poles, sys.domain))
}

/// Frequencies for sampling checks: log-uniform on [1e-3, 1e3] (CT) or uniform on (-pi, pi) (DT).
pub fn sample_frequencies(domain: TimeDomain, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| match domain {
            TimeDomain::Continuous => {
                let w = 10f64.powf(rng.gen_range(-3.0..3.0));
                if rng.gen_bool(0.5) {
                    w
                } else {
                    -w
                }
            }
            TimeDomain::Discrete => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        })
        .collect()
}

/// Max of `|P + M - 1|` over sampled non-pole frequencies.
pub fn complementarity_deviation(p: &RationalTF, m: &RationalTF, n_samples: usize, seed: u64) -> f64 {
    let mut worst = 0.0f64;
    let mut taken = 0;
    let mut attempt = 0u64;
    while taken < n_samples && attempt < 16 {
        for w in sample_frequencies(p.domain(), n_samples - taken, seed.wrapping_add(attempt)) {
            let (Ok(pv), Ok(mv)) = (p.evaluate(w), m.evaluate(w)) else {
                continue;
            };
            worst = worst.max((pv + mv - 1.0).norm());
            taken += 1;
        }
        attempt += 1;
    }
    worst
}

pub fn complementarity_check(sys: &FilteringSystem, n_samples: usize, seed: u64) -> Result<f64> {
    let p = build_p(sys)?;
    let m = build_m(sys)?;
    Ok(complementarity_deviation(&p, &m, n_samples.max(1), seed))
}
