#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use filtsens::cli::parse_spec;
use filtsens::error::Error;
use filtsens::rational::{RationalTF, TimeDomain};
use filtsens::sysmodel::{build_m, build_p, validate, FilteringSystem, Tolerances};

pub fn example_system(name: &str) -> FilteringSystem {
    let text = match name {
        "ct_p_case1" => include_str!("../../examples/ct_p_case1.json"),
        "ct_p_case2" => include_str!("../../examples/ct_p_case2.json"),
        "ct_p_case3" => include_str!("../../examples/ct_p_case3.json"),
        "ct_p_case4" => include_str!("../../examples/ct_p_case4.json"),
        "ct_m_balanced" => include_str!("../../examples/ct_m_balanced.json"),
        "ct_m_unbalanced" => include_str!("../../examples/ct_m_unbalanced.json"),
        "dt_p_case1" => include_str!("../../examples/dt_p_case1.json"),
        "dt_p_case2" => include_str!("../../examples/dt_p_case2.json"),
        "dt_m" => include_str!("../../examples/dt_m.json"),
        other => panic!("no such example {other}"),
    };
    let (gx, gy, f) = parse_spec(text).unwrap().transfer_functions().unwrap();
    let (sys, report) = validate(gx, gy, f, Tolerances::default()).unwrap();
    assert!(report.all_ok(), "{name}: {:?}", report.diagnostics);
    sys
}

/// Same system with the filter gain replaced.
pub fn with_filter_gain(sys: &FilteringSystem, gain: f64) -> FilteringSystem {
    let (sys, report) =
        validate(sys.gx().clone(), sys.gy().clone(), sys.f().with_gain(gain), sys.tolerances()).unwrap();
    assert!(report.all_ok());
    sys
}

/// What the gain of `F` is tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Relative-degree gap of `F G_y / G_x`, with a random gain.
    Gap(usize),
    /// Equal degrees and `K = 2 K_x` (bounded CT P).
    DoubleGain,
    /// `|M(0)| = 1` (bounded CT M).
    UnitDc,
}

pub struct Generated {
    pub system: FilteringSystem,
    pub target: Target,
}

fn region(rng: &mut ChaCha8Rng, domain: TimeDomain, unstable: bool) -> Complex64 {
    match domain {
        TimeDomain::Continuous => {
            let re = rng.gen_range(0.1..3.0);
            Complex64::new(if unstable { re } else { -re }, 0.0)
        }
        TimeDomain::Discrete => {
            let m = if unstable { rng.gen_range(1.1..2.5) } else { rng.gen_range(0.05..0.9) };
            Complex64::new(if rng.gen_bool(0.5) { m } else { -m }, 0.0)
        }
    }
}

/// Conjugate-closed list of `n` roots; complex pairs when room allows.
fn roots(rng: &mut ChaCha8Rng, domain: TimeDomain, n: usize, unstable_prob: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    while out.len() < n {
        let unstable = rng.gen_bool(unstable_prob);
        let r = region(rng, domain, unstable);
        if n - out.len() >= 2 && rng.gen_bool(0.4) {
            let z = match domain {
                TimeDomain::Continuous => Complex64::new(r.re, rng.gen_range(0.1..2.0)),
                TimeDomain::Discrete => Complex64::from_polar(r.norm(), rng.gen_range(0.2..2.9)),
            };
            out.push(z);
            out.push(z.conj());
        } else {
            out.push(r);
        }
    }
    out
}

fn gain(rng: &mut ChaCha8Rng) -> f64 {
    let g = rng.gen_range(0.3..3.0);
    if rng.gen_bool(0.2) {
        -g
    } else {
        g
    }
}

fn too_close(roots: &[Complex64], domain: TimeDomain, band: f64) -> bool {
    roots.iter().any(|r| match domain {
        // an origin zero of P is forced by M(0) = 1 and is expected
        TimeDomain::Continuous => r.norm() > 1e-12 && (r.re.abs() < band || r.norm() < band),
        TimeDomain::Discrete => (r.norm() - 1.0).abs() < band,
    })
}

/// Attempts one draw; `None` when the draw violates a structural constraint.
fn draw(rng: &mut ChaCha8Rng, domain: TimeDomain, target: Target) -> Option<FilteringSystem> {
    let n_x = rng.gen_range(1..=3);
    let m_x = rng.gen_range(0..=n_x);
    let gx = RationalTF::new(gain(rng), roots(rng, domain, m_x, 0.3), roots(rng, domain, n_x, 0.0), domain).ok()?;

    let gy_unstable = rng.gen_bool(0.6);
    let n_y = rng.gen_range(1..=3);
    let m_y = rng.gen_range(0..=n_y);
    let mut gy_poles = roots(rng, domain, n_y - gy_unstable as usize, 0.0);
    let unstable_pole = region(rng, domain, true);
    if gy_unstable {
        gy_poles.push(unstable_pole);
    }
    let gy = RationalTF::new(gain(rng), roots(rng, domain, m_y, 0.3), gy_poles, domain).ok()?;

    let gap = match target {
        Target::Gap(d) => d as isize,
        Target::DoubleGain => 0,
        Target::UnitDc => rng.gen_range(0..=2),
    };
    let n_f = rng.gen_range(1..=4) as isize;
    // relative degree bookkeeping after the one cancellation, if any
    let m_f = m_x as isize - n_x as isize + n_y as isize - m_y as isize + n_f - gap;
    if m_f < gy_unstable as isize || m_f > n_f {
        return None;
    }
    let mut f_zeros = roots(rng, domain, (m_f - gy_unstable as isize) as usize, 0.3);
    if gy_unstable {
        f_zeros.push(unstable_pole);
    }
    let f_poles = roots(rng, domain, n_f as usize, 0.0);
    if gx.zeros().len() + gx.poles().len() + gy.zeros().len() + gy.poles().len() + f_zeros.len() + f_poles.len() > 3 * 8
    {
        return None;
    }
    let f = RationalTF::new(gain(rng), f_zeros, f_poles, domain).ok()?;
    let (sys, report) = validate(gx.clone(), gy.clone(), f.clone(), Tolerances::default()).ok()?;
    if !report.all_ok() || sys.degree_gap() != gap || sys.fgy().poles().len() > 8 {
        return None;
    }

    let sys = match target {
        Target::Gap(_) => sys,
        Target::DoubleGain => {
            let kf = 2.0 * gx.gain() / gy.gain();
            validate(gx, gy, f.with_gain(kf), Tolerances::default()).ok()?.0
        }
        Target::UnitDc => {
            let m = build_m(&sys).ok()?;
            let m0 = m.eval_at(Complex64::new(0.0, 0.0)).norm();
            validate(gx, gy, f.with_gain(f.gain() / m0), Tolerances::default()).ok()?.0
        }
    };
    if !sys.report().all_ok() {
        return None;
    }
    // keep the sensitivity roots clear of the boundary so quadrature stays cheap
    let p = build_p(&sys).ok()?;
    let m = build_m(&sys).ok()?;
    for tf in [&p, &m] {
        if too_close(tf.zeros(), domain, 1e-2) || too_close(tf.poles(), domain, 1e-2) {
            return None;
        }
    }
    Some(sys)
}

pub fn random_system(rng: &mut ChaCha8Rng, domain: TimeDomain, target: Target) -> FilteringSystem {
    loop {
        if let Some(sys) = draw(rng, domain, target) {
            return sys;
        }
    }
}

/// `count` systems cycling through every target for the domain.
pub fn random_batch(seed: u64, domain: TimeDomain, count: usize) -> Vec<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: &[Target] = match domain {
        TimeDomain::Continuous => {
            &[Target::Gap(3), Target::Gap(2), Target::Gap(1), Target::Gap(0), Target::DoubleGain, Target::UnitDc]
        }
        TimeDomain::Discrete => &[Target::Gap(2), Target::Gap(1), Target::Gap(0)],
    };
    (0..count)
        .map(|i| {
            let target = targets[i % targets.len()];
            Generated { system: random_system(&mut rng, domain, target), target }
        })
        .collect()
}

/// Conjugate-closed root multiset with moduli <= 10 and pairwise separation >= 1e-3.
pub fn separated_roots(rng: &mut ChaCha8Rng, degree: usize) -> Vec<Complex64> {
    loop {
        let mut roots = Vec::with_capacity(degree);
        while roots.len() < degree {
            if degree - roots.len() >= 2 && rng.gen_bool(0.5) {
                let r = 10.0 * rng.gen::<f64>().sqrt();
                let theta = rng.gen_range(0.0..std::f64::consts::PI);
                let z = Complex64::from_polar(r, theta);
                roots.push(z);
                roots.push(z.conj());
            } else {
                roots.push(Complex64::new(rng.gen_range(-10.0..10.0), 0.0));
            }
        }
        let separated = roots.iter().enumerate().all(|(i, a)| roots[i + 1..].iter().all(|b| (a - b).norm() >= 1e-3));
        if separated {
            return roots;
        }
    }
}

/// Largest per-root error after optimal matching.
pub fn worst_match_error(truth: &[Complex64], found: &[Complex64]) -> f64 {
    assert_eq!(truth.len(), found.len());
    let cost: Vec<Vec<f64>> = truth.iter().map(|t| found.iter().map(|f| (t - f).norm()).collect()).collect();
    let assign = filtsens::poly::optimal_assignment(&cost);
    assign.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max)
}

/// Worst round-trip error over `count` random root sets of degree 1..=12.
pub fn round_trip_worst(seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let degree = rng.gen_range(1..=12);
        let roots = separated_roots(&mut rng, degree);
        let gain = Complex64::new(rng.gen_range(0.5..2.0), 0.0);
        let found = filtsens::poly::Polynomial::from_roots(gain, &roots).find_roots().unwrap();
        worst = worst.max(worst_match_error(&roots, &found));
    }
    worst
}

use filtsens::closedform::{
    ct_m_integral, ct_p_integral, dt_m_integral, dt_p_integral, lemma1_crosscheck, lemma_direct_ct, lemma_direct_dt,
    IntegralOutcome,
};
use filtsens::quad::{ct_log_integral, ct_weighted_log_integral, dt_log_integral, QuadratureResult, DEFAULT_TOL};
use filtsens::sysmodel::complementarity_check;

pub const DIRECT_TOL: f64 = 1e-9;
pub const COMPLEMENTARITY_TOL: f64 = 1e-9;

pub fn quad_tolerance(v: f64) -> f64 {
    1e-3f64.max(1e-3 * v.abs())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * 1f64.max(a.abs())
}

/// The three routes for one integral of one system.
pub struct Paths {
    pub closed: IntegralOutcome,
    pub direct: filtsens::error::Result<IntegralOutcome>,
    pub quadrature: filtsens::error::Result<QuadratureResult>,
    /// The sensitivity function has a root on the boundary, which the direct and
    /// quadrature routes refuse.
    pub boundary: bool,
}

fn has_boundary_root(g: &RationalTF) -> bool {
    !g.boundary_roots(filtsens::rational::DEFAULT_EPS_CLASS).is_empty()
}

pub fn p_paths(sys: &FilteringSystem) -> Paths {
    let p = build_p(sys).unwrap();
    let boundary = has_boundary_root(&p);
    match sys.domain() {
        TimeDomain::Continuous => Paths {
            closed: ct_p_integral(sys).unwrap(),
            direct: lemma_direct_ct(&p, false),
            quadrature: ct_log_integral(&p, DEFAULT_TOL),
            boundary,
        },
        TimeDomain::Discrete => Paths {
            closed: dt_p_integral(sys).unwrap(),
            direct: lemma_direct_dt(&p),
            quadrature: dt_log_integral(&p, DEFAULT_TOL),
            boundary,
        },
    }
}

pub fn m_paths(sys: &FilteringSystem) -> Paths {
    let m = build_m(sys).unwrap();
    let boundary = has_boundary_root(&m);
    match sys.domain() {
        TimeDomain::Continuous => Paths {
            closed: ct_m_integral(sys).unwrap(),
            direct: lemma_direct_ct(&m, true),
            quadrature: ct_weighted_log_integral(&m, DEFAULT_TOL),
            boundary,
        },
        TimeDomain::Discrete => Paths {
            closed: dt_m_integral(sys).unwrap(),
            direct: lemma_direct_dt(&m),
            quadrature: dt_log_integral(&m, DEFAULT_TOL),
            boundary,
        },
    }
}

impl Paths {
    /// Empty when all three routes agree.
    pub fn disagreements(&self, label: &str) -> Vec<String> {
        let c = self.closed.as_f64();
        let mut out = Vec::new();
        if self.boundary {
            let refused = |e: &Error| matches!(e, Error::BoundaryRoot { .. });
            if !self.direct.as_ref().err().is_some_and(refused) || !self.quadrature.as_ref().err().is_some_and(refused)
            {
                out.push(format!("{label}: boundary root not refused"));
            }
            return out;
        }
        match &self.direct {
            Ok(d) if close(c, d.as_f64(), DIRECT_TOL) => {}
            Ok(d) => out.push(format!("{label}: closed {c} vs direct {}", d.as_f64())),
            Err(e) => out.push(format!("{label}: direct failed: {e}")),
        }
        match &self.quadrature {
            Ok(q) => {
                let ok = if c.is_finite() {
                    !q.diverged && (q.value - c).abs() <= quad_tolerance(c)
                } else {
                    q.diverged && q.value == c
                };
                if !ok {
                    out.push(format!("{label}: closed {c} vs quadrature {} (diverged {})", q.value, q.diverged));
                }
            }
            Err(e) => out.push(format!("{label}: quadrature failed: {e}")),
        }
        out
    }
}

/// Every consistency check on one system; empty when all pass.
pub fn consistency_failures(sys: &FilteringSystem) -> Vec<String> {
    let p = p_paths(sys);
    let m = m_paths(sys);
    let mut out = p.disagreements("P");
    out.extend(m.disagreements("M"));
    let dev = complementarity_check(sys, 100, 1).unwrap();
    if !(dev <= COMPLEMENTARITY_TOL) {
        out.push(format!("complementarity deviation {dev:e}"));
    }
    out.extend(lemma1_failures(sys, &p.closed, &m.closed));
    out
}

/// Lemma-1 agreement wherever its preconditions hold (CT only).
pub fn lemma1_failures(sys: &FilteringSystem, p: &IntegralOutcome, m: &IntegralOutcome) -> Vec<String> {
    if sys.domain() != TimeDomain::Continuous {
        return Vec::new();
    }
    let mut out = Vec::new();
    match lemma1_crosscheck(sys) {
        Ok(l) => {
            for (label, got, want) in [("P", l.p_value, p), ("M", l.m_value, m)] {
                if let Some(v) = got {
                    if !close(v, want.as_f64(), DIRECT_TOL) {
                        out.push(format!("lemma1 {label}: {v} vs {}", want.as_f64()));
                    }
                } else if want.bounded {
                    out.push(format!("lemma1 {label}: missing for a bounded integral"));
                }
            }
        }
        Err(e) => {
            if p.bounded || m.bounded {
                out.push(format!("lemma1: {e}"));
            }
        }
    }
    out
}
