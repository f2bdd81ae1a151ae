//! Rational transfer functions in zero-pole-gain form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{root_distance, Polynomial};

/// Default tolerance for cancelling a zero against a pole.
pub const DEFAULT_EPS_CANCEL: f64 = 1e-8;
/// Default half-width of the band around the stability boundary.
pub const DEFAULT_EPS_CLASS: f64 = 1e-9;

const CONJUGATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeDomain {
    #[serde(rename = "ct")]
    Continuous,
    #[serde(rename = "dt")]
    Discrete,
}

impl TimeDomain {
    /// Maps a real frequency onto the boundary: `j w` or `e^{j w}`.
    pub fn boundary_point(self, freq: f64) -> Complex64 {
        match self {
            TimeDomain::Continuous => Complex64::new(0.0, freq),
            TimeDomain::Discrete => Complex64::from_polar(1.0, freq),
        }
    }

    pub fn classify_root(self, root: Complex64, eps: f64) -> RootClass {
        let margin = match self {
            TimeDomain::Continuous => root.re,
            TimeDomain::Discrete => root.norm() - 1.0,
        };
        if margin > eps {
            RootClass::Unstable
        } else if margin < -eps {
            RootClass::Stable
        } else {
            RootClass::Boundary
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeDomain::Continuous => "continuous-time",
            TimeDomain::Discrete => "discrete-time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootClass {
    /// Open right half-plane (CT) or outside the unit disk (DT). NMP for zeros.
    Unstable,
    Stable,
    Boundary,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassifiedRoots {
    pub nmp: Vec<Complex64>,
    pub mp: Vec<Complex64>,
    pub boundary: Vec<Complex64>,
}

/// Splits a root multiset into the instability region, its complement, and the boundary band.
pub fn classify(roots: &[Complex64], domain: TimeDomain, eps_class: f64) -> ClassifiedRoots {
    let mut out = ClassifiedRoots::default();
    for &r in roots {
        match domain.classify_root(r, eps_class) {
            RootClass::Unstable => out.nmp.push(r),
            RootClass::Stable => out.mp.push(r),
            RootClass::Boundary => out.boundary.push(r),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    gain: f64,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    domain: TimeDomain,
}

impl RationalTF {
    /// Checked constructor: finite data, properness, conjugate-closed roots.
    pub fn new(gain: f64, zeros: Vec<Complex64>, poles: Vec<Complex64>, domain: TimeDomain) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::NonFinite { what: "gain" });
        }
        if zeros.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite { what: "zero" });
        }
        if poles.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "pole" });
        }
        if zeros.len() > poles.len() {
            return Err(Error::Improper { zeros: zeros.len(), poles: poles.len() });
        }
        check_conjugate_closed(&zeros)?;
        check_conjugate_closed(&poles)?;
        Ok(Self { gain, zeros, poles, domain })
    }

    /// Real-root convenience constructor used heavily in tests and fixtures.
    pub fn from_real(gain: f64, zeros: &[f64], poles: &[f64], domain: TimeDomain) -> Result<Self> {
        let lift = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(gain, lift(zeros), lift(poles), domain)
    }

    /// Constructor for internally derived functions whose roots come from a numerical solve.
    pub(crate) fn from_parts(gain: f64, zeros: Vec<Complex64>, poles: Vec<Complex64>, domain: TimeDomain) -> Self {
        Self { gain, zeros, poles, domain }
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.gain == 0.0
    }

    /// Pole count minus zero count.
    pub fn relative_degree(&self) -> isize {
        self.poles.len() as isize - self.zeros.len() as isize
    }

    pub fn with_gain(&self, gain: f64) -> Self {
        Self { gain, ..self.clone() }
    }

    /// `gain * prod (x - z)`.
    pub fn numerator(&self) -> Polynomial {
        Polynomial::from_roots(Complex64::new(self.gain, 0.0), &self.zeros)
    }

    /// Monic `prod (x - p)`.
    pub fn denominator(&self) -> Polynomial {
        Polynomial::from_roots(Complex64::new(1.0, 0.0), &self.poles)
    }

    /// Value at an arbitrary complex point; infinite at a pole.
    pub fn eval_at(&self, x: Complex64) -> Complex64 {
        let num: Complex64 = self.zeros.iter().map(|z| x - z).product();
        let den: Complex64 = self.poles.iter().map(|p| x - p).product();
        num / den * self.gain
    }

    /// Frequency response at `j w` (CT) or `e^{j w}` (DT).
    pub fn evaluate(&self, freq: f64) -> Result<Complex64> {
        let x = self.domain.boundary_point(freq);
        if self.poles.iter().any(|p| (x - p).norm() <= 1e-12) {
            return Err(Error::PoleEvaluation { freq });
        }
        Ok(self.eval_at(x))
    }

    pub fn classify_zeros(&self, eps_class: f64) -> ClassifiedRoots {
        classify(&self.zeros, self.domain, eps_class)
    }

    pub fn classify_poles(&self, eps_class: f64) -> ClassifiedRoots {
        classify(&self.poles, self.domain, eps_class)
    }

    /// Every zero or pole inside the boundary band.
    pub fn boundary_roots(&self, eps_class: f64) -> Vec<Complex64> {
        let mut out = self.classify_zeros(eps_class).boundary;
        out.extend(self.classify_poles(eps_class).boundary);
        out
    }

    /// Removes zero/pole pairs closer than `eps_cancel` from this function.
    pub fn cancel_common(&self, eps_cancel: f64) -> RationalTF {
        let pairs = match_roots(&self.zeros, &self.poles, eps_cancel);
        let (zeros, poles) = drop_pairs(&self.zeros, &self.poles, &pairs);
        Self::from_parts(self.gain, zeros, poles, self.domain)
    }
}

/// `f * g` with zeros of one factor cancelled against poles of the other.
pub fn product_cancel(f: &RationalTF, g: &RationalTF, eps_cancel: f64) -> Result<RationalTF> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch);
    }
    let fz_gp = match_roots(&f.zeros, &g.poles, eps_cancel);
    let (fz, gp) = drop_pairs(&f.zeros, &g.poles, &fz_gp);
    let gz_fp = match_roots(&g.zeros, &f.poles, eps_cancel);
    let (gz, fp) = drop_pairs(&g.zeros, &f.poles, &gz_fp);
    let mut zeros = gz;
    zeros.extend(fz);
    let mut poles = gp;
    poles.extend(fp);
    Ok(RationalTF::from_parts(f.gain * g.gain, zeros, poles, f.domain))
}

/// Greedy nearest-pair matching of `a` against `b` under the root distance metric.
///
/// When a complex element of `a` is matched, its conjugate partner (if present and
/// unmatched) is paired with the conjugate of the chosen `b` element so that
/// conjugate-closed inputs stay conjugate-closed after removal.
pub fn match_roots(a: &[Complex64], b: &[Complex64], eps: f64) -> Vec<(usize, usize)> {
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    let nearest = |x: Complex64, used: &[bool]| -> Option<usize> {
        b.iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, root_distance(x, *y)))
            .filter(|(_, d)| *d <= eps)
            .min_by(|l, r| l.1.total_cmp(&r.1))
            .map(|(j, _)| j)
    };
    for i in 0..a.len() {
        if used_a[i] {
            continue;
        }
        let Some(j) = nearest(a[i], &used_b) else { continue };
        used_a[i] = true;
        used_b[j] = true;
        pairs.push((i, j));
        if a[i].im.abs() > eps * a[i].norm().max(1.0) {
            let conj_a = (0..a.len())
                .filter(|&k| !used_a[k])
                .map(|k| (k, root_distance(a[k], a[i].conj())))
                .filter(|(_, d)| *d <= eps)
                .min_by(|l, r| l.1.total_cmp(&r.1))
                .map(|(k, _)| k);
            let conj_b = (0..b.len())
                .filter(|&l| !used_b[l])
                .map(|l| (l, root_distance(b[l], b[j].conj())))
                .filter(|(_, d)| *d <= eps)
                .min_by(|l, r| l.1.total_cmp(&r.1))
                .map(|(l, _)| l);
            if let (Some(k), Some(l)) = (conj_a, conj_b) {
                used_a[k] = true;
                used_b[l] = true;
                pairs.push((k, l));
            }
        }
    }
    pairs
}

fn drop_pairs(a: &[Complex64], b: &[Complex64], pairs: &[(usize, usize)]) -> (Vec<Complex64>, Vec<Complex64>) {
    let keep_a = a.iter().enumerate().filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i)).map(|(_, v)| *v).collect();
    let keep_b = b.iter().enumerate().filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j)).map(|(_, v)| *v).collect();
    (keep_a, keep_b)
}

/// Splits `list` into (elements not matched by `targets`, matched elements).
pub fn remove_matched(list: &[Complex64], targets: &[Complex64], eps: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let pairs = match_roots(targets, list, eps);
    let matched = pairs.iter().map(|&(_, j)| list[j]).collect();
    let rest = list.iter().enumerate().filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j)).map(|(_, v)| *v).collect();
    (rest, matched)
}

fn check_conjugate_closed(roots: &[Complex64]) -> Result<()> {
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        let r = roots[i];
        let tol = CONJUGATE_TOL * r.norm().max(1.0);
        if used[i] || r.im.abs() <= tol {
            continue;
        }
        used[i] = true;
        let partner = (0..roots.len()).find(|&k| !used[k] && (roots[k] - r.conj()).norm() <= tol);
        match partner {
            Some(k) => used[k] = true,
            None => return Err(Error::NotConjugateClosed { root: r }),
        }
    }
    Ok(())
}

/// Angle in `[0, pi]` of a root, used to place quadrature breakpoints.
pub(crate) fn root_angle(r: Complex64) -> f64 {
    r.arg().abs().min(PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CT: TimeDomain = TimeDomain::Continuous;
    const DT: TimeDomain = TimeDomain::Discrete;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_re(v: &[Complex64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|z| z.re).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn relative_degree_examples() {
        let gx = RationalTF::from_real(1.67, &[-0.05], &[-0.04], CT).unwrap();
        assert_eq!(gx.relative_degree(), 0);
        let k = RationalTF::from_real(3.0, &[], &[], CT).unwrap();
        assert_eq!(k.relative_degree(), 0);
        let f = RationalTF::from_real(1.34, &[0.03, -0.09], &[-0.68, -0.68, -0.68], CT).unwrap();
        assert_eq!(f.relative_degree(), 1);
    }

    #[test]
    fn improper_is_rejected() {
        let err = RationalTF::from_real(1.0, &[1.0, 2.0], &[3.0], CT).unwrap_err();
        assert_eq!(err, Error::Improper { zeros: 2, poles: 1 });
    }

    #[test]
    fn unpaired_complex_root_is_rejected() {
        let err = RationalTF::new(1.0, vec![Complex64::new(0.0, 1.0)], vec![c(-1.0)], CT).unwrap_err();
        assert!(matches!(err, Error::NotConjugateClosed { .. }));
    }

    #[test]
    fn evaluate_examples() {
        let allpass = RationalTF::from_real(1.0, &[1.0], &[-1.0], CT).unwrap();
        assert!((allpass.evaluate(1.0).unwrap().norm() - 1.0).abs() < 1e-15);
        let k = RationalTF::from_real(2.5, &[], &[], DT).unwrap();
        assert_eq!(k.evaluate(0.3).unwrap(), c(2.5));
        let pole_on_axis = RationalTF::from_real(1.0, &[], &[0.0], CT).unwrap();
        assert_eq!(pole_on_axis.evaluate(0.0), Err(Error::PoleEvaluation { freq: 0.0 }));
    }

    #[test]
    fn m_at_dc_has_unit_modulus_for_balanced_example() {
        // M = K prod p_i prod (s - z_j) / (K_x prod (s - z_i) prod (s - p_j)) for the balanced
        // weighted-integral example; |M(0)| = 1 is the boundedness condition
        let m = RationalTF::from_real(
            (8.0 / 3.0) / 1.5,
            &[-0.025, -0.075, -0.75, -0.1, -0.25],
            &[-0.05, -0.01, -0.5, -0.5, -0.5],
            CT,
        )
        .unwrap();
        assert!((m.evaluate(0.0).unwrap().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_cancel_on_weighted_example() {
        let f = RationalTF::from_real(32.0 / 15.0, &[0.05, -0.1, -0.25], &[-0.5, -0.5, -0.5], CT).unwrap();
        let gy = RationalTF::from_real(1.25, &[-0.075, -0.75], &[0.05, -0.01], CT).unwrap();
        let fgy = product_cancel(&f, &gy, DEFAULT_EPS_CANCEL).unwrap();
        assert_eq!(sorted_re(fgy.zeros()), vec![-0.75, -0.25, -0.1, -0.075]);
        assert_eq!(sorted_re(fgy.poles()), vec![-0.5, -0.5, -0.5, -0.01]);
        assert!((fgy.gain() - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn product_cancel_simple_and_disjoint() {
        let f = RationalTF::from_real(1.0, &[], &[-1.0], CT).unwrap();
        let g = RationalTF::from_real(1.0, &[-1.0], &[-2.0], CT).unwrap();
        let fg = product_cancel(&f, &g, DEFAULT_EPS_CANCEL).unwrap();
        assert!(fg.zeros().is_empty());
        assert_eq!(fg.poles(), &[c(-2.0)]);

        let h = RationalTF::from_real(2.0, &[-3.0], &[-4.0, -5.0], CT).unwrap();
        let gh = product_cancel(&g, &h, DEFAULT_EPS_CANCEL).unwrap();
        assert_eq!(gh.zeros().len(), 2);
        assert_eq!(gh.poles().len(), 3);
    }

    #[test]
    fn product_cancel_rejects_mixed_domains() {
        let f = RationalTF::from_real(1.0, &[], &[-1.0], CT).unwrap();
        let g = RationalTF::from_real(1.0, &[], &[0.5], DT).unwrap();
        assert_eq!(product_cancel(&f, &g, 1e-8), Err(Error::DomainMismatch));
    }

    #[test]
    fn conjugate_pairs_cancel_together() {
        let zp = Complex64::new(-0.2, 0.7);
        let f = RationalTF::new(1.0, vec![zp, zp.conj()], vec![c(-1.0), c(-2.0)], CT).unwrap();
        let g = RationalTF::new(1.0, vec![], vec![zp.conj(), zp], CT).unwrap();
        let fg = product_cancel(&f, &g, DEFAULT_EPS_CANCEL).unwrap();
        assert!(fg.zeros().is_empty());
        assert_eq!(fg.poles().len(), 2);
    }

    #[test]
    fn classify_examples() {
        let ct = classify(&[c(0.03), c(-0.68)], CT, DEFAULT_EPS_CLASS);
        assert_eq!(ct.nmp, vec![c(0.03)]);
        assert_eq!(ct.mp, vec![c(-0.68)]);
        let dt = classify(&[c(1.25), c(0.5)], DT, DEFAULT_EPS_CLASS);
        assert_eq!(dt.nmp, vec![c(1.25)]);
        assert_eq!(dt.mp, vec![c(0.5)]);
        let origin = classify(&[c(0.0)], CT, DEFAULT_EPS_CLASS);
        assert_eq!(origin.boundary, vec![c(0.0)]);
        let unit = classify(&[Complex64::from_polar(1.0, 0.4)], DT, DEFAULT_EPS_CLASS);
        assert_eq!(unit.boundary.len(), 1);
    }

    #[test]
    fn remove_matched_splits_list() {
        let (rest, matched) = remove_matched(&[c(0.5), c(-1.0), c(0.5)], &[c(0.5)], 1e-8);
        assert_eq!(rest, vec![c(-1.0), c(0.5)]);
        assert_eq!(matched, vec![c(0.5)]);
    }
}
