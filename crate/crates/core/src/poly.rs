//! Dense complex polynomials and root finding.
//!
//! Coefficients are stored in ascending power order. The zero polynomial is a
//! single zero coefficient; every other polynomial has a nonzero leading
//! coefficient.

use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold below which `subtract` treats coefficients as cancelled.
pub const CANCEL_TOL: f64 = 1e-12;

const NEWTON_STEPS: usize = 2;

#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, dropping exact trailing zeros.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0)])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `gain * prod (x - r)` expanded.
    pub fn from_roots(gain: Complex64, roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); roots.len() + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        for (k, &r) in roots.iter().enumerate() {
            // multiply the current degree-k polynomial by (x - r)
            for i in (1..=k + 1).rev() {
                coeffs[i] = coeffs[i - 1] - r * coeffs[i];
            }
            coeffs[0] = -r * coeffs[0];
        }
        for c in &mut coeffs {
            *c *= gain;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("coefficient vector is never empty")
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every imaginary part is within `rel_tol * max|coeff|`.
    pub fn is_real(&self, rel_tol: f64) -> bool {
        let scale = self.max_coeff_modulus();
        self.coeffs.iter().all(|c| c.im.abs() <= rel_tol * scale)
    }

    pub fn multiply(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Coefficientwise difference with cancellation-aware degree trimming.
    pub fn subtract(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let scale = self.max_coeff_modulus().max(other.max_coeff_modulus());
        let zero = Complex64::new(0.0, 0.0);
        let mut out: Vec<Complex64> = (0..len)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(zero) - other.coeffs.get(i).copied().unwrap_or(zero))
            .collect();
        let cutoff = CANCEL_TOL * scale;
        while out.len() > 1 && out.last().is_some_and(|c| c.norm() <= cutoff) {
            out.pop();
        }
        if out.len() == 1 && out[0].norm() <= cutoff {
            return Polynomial::zero();
        }
        Polynomial::new(out)
    }

    pub fn scale(&self, k: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    fn evaluate_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    /// Sum of `|c_k| |x|^k`, the natural scale for judging `|p(x)|` small.
    pub fn evaluation_scale(&self, x: Complex64) -> f64 {
        let r = x.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// All roots with multiplicity: balanced companion eigenvalues, then Newton polishing.
    pub fn find_roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let zero = Complex64::new(0.0, 0.0);
        // exact zero roots are peeled off so the companion matrix stays nonsingular
        let lowest = self.coeffs.iter().position(|c| *c != zero).unwrap_or(0);
        let mut roots = vec![zero; lowest];
        let reduced = Polynomial::new(self.coeffs[lowest..].to_vec());
        let n = reduced.degree();
        match n {
            0 => {}
            1 => roots.push(-reduced.coeffs[0] / reduced.coeffs[1]),
            _ => {
                let lead = reduced.leading();
                let mut companion = DMatrix::<Complex64>::zeros(n, n);
                for j in 0..n {
                    companion[(0, j)] = -reduced.coeffs[n - 1 - j] / lead;
                }
                for i in 1..n {
                    companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
                }
                balance(&mut companion);
                let schur = nalgebra::linalg::Schur::try_new(companion, f64::EPSILON, 10_000)
                    .ok_or(Error::RootSolveFailed { degree: n })?;
                let eig = schur.eigenvalues().ok_or(Error::RootSolveFailed { degree: n })?;
                for &r0 in eig.iter() {
                    roots.push(reduced.polish(r0));
                }
            }
        }
        Ok(roots)
    }

    fn polish(&self, mut r: Complex64) -> Complex64 {
        let (mut value, mut slope) = self.evaluate_with_derivative(r);
        for _ in 0..NEWTON_STEPS {
            if slope.norm() == 0.0 || !value.is_finite() {
                break;
            }
            let candidate = r - value / slope;
            let (v_new, s_new) = self.evaluate_with_derivative(candidate);
            // only accept steps that reduce the residual; near clusters Newton can wander
            if !(v_new.norm() < value.norm()) {
                break;
            }
            r = candidate;
            value = v_new;
            slope = s_new;
        }
        r
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.multiply(rhs)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

/// Parlett-Reinsch diagonal similarity balancing with radix-2 scaling.
fn balance(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    let norm1 = |c: &Complex64| c.re.abs() + c.im.abs();
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += norm1(&a[(j, i)]);
                    row += norm1(&a[(i, j)]);
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut c = col;
            while c < row / 2.0 {
                f *= 2.0;
                c *= 4.0;
            }
            while c > row * 2.0 {
                f /= 2.0;
                c /= 4.0;
            }
            // c is col * f^2, so (c + row) / f is the balanced row+column norm
            if (c + row) / f < 0.95 * total {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
///
/// Returns `assignment[row] = column`. O(rows^2 * cols) Hungarian algorithm with potentials.
pub fn optimal_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns in assignment problem");
    // 1-based arrays per the classic formulation; index 0 is the virtual column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Distance used for root matching: absolute near the origin, relative beyond unit modulus.
pub fn root_distance(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_coeffs(p: &Polynomial) -> Vec<f64> {
        p.coeffs().iter().map(|c| c.re).collect()
    }

    #[test]
    fn from_roots_expands_products() {
        let p = Polynomial::from_roots(c(1.0, 0.0), &[c(-1.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(real_coeffs(&p), vec![2.0, 3.0, 1.0]);

        let p = Polynomial::from_roots(c(5.0, 0.0), &[]);
        assert_eq!(real_coeffs(&p), vec![5.0]);

        let p = Polynomial::from_roots(c(1.67, 0.0), &[c(-0.05, 0.0)]);
        let got = real_coeffs(&p);
        assert!((got[0] - 0.0835).abs() < 1e-15);
        assert!((got[1] - 1.67).abs() < 1e-15);
    }

    #[test]
    fn multiply_identity_and_small_case() {
        let a = Polynomial::from_real(&[1.0, 1.0]);
        let b = Polynomial::from_real(&[2.0, 1.0]);
        assert_eq!(real_coeffs(&(&a * &b)), vec![2.0, 3.0, 1.0]);
        let one = Polynomial::from_real(&[1.0]);
        assert_eq!(a.multiply(&one), a);
    }

    #[test]
    fn subtract_trims_cancelled_degree() {
        let a = Polynomial::from_real(&[2.0, 3.0, 1.0]);
        assert!(a.subtract(&a).is_zero());

        let x2 = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let one = Polynomial::from_real(&[1.0, 0.0, 0.0]);
        assert_eq!(real_coeffs(&x2.subtract(&one)), vec![-1.0, 0.0, 1.0]);

        // leading terms that cancel to rounding level drop the degree
        let p = Polynomial::from_real(&[1.0, 2.0, 1.0 + 1e-17]);
        let q = Polynomial::from_real(&[0.5, 1.0, 1.0]);
        assert_eq!(p.subtract(&q).degree(), 1);
    }

    #[test]
    fn evaluate_horner() {
        let p = Polynomial::from_real(&[2.0, 3.0, 1.0]);
        assert_eq!(p.evaluate(c(-1.0, 0.0)), c(0.0, 0.0));
        let k = Polynomial::from_real(&[5.0]);
        assert_eq!(k.evaluate(c(3.7, -1.2)), c(5.0, 0.0));
    }

    #[test]
    fn roots_of_small_polynomials() {
        let mut r = Polynomial::from_real(&[2.0, 3.0, 1.0]).find_roots().unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(-1.0, 0.0)).norm() < 1e-12);

        let mut r = Polynomial::from_real(&[1.0, 0.0, 1.0]).find_roots().unwrap();
        r.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((r[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_polynomial_has_no_roots() {
        assert_eq!(Polynomial::zero().find_roots(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn exact_zero_roots_are_peeled() {
        let p = Polynomial::from_roots(c(2.0, 0.0), &[c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let r = p.find_roots().unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(r.iter().any(|z| (z - c(3.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn triple_root_cluster_round_trip() {
        let truth = [c(-0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(0.25, 0.0), c(1.25, 0.0)];
        let p = Polynomial::from_roots(c(3.0, 0.0), &truth);
        let found = p.find_roots().unwrap();
        let cost: Vec<Vec<f64>> = truth.iter().map(|t| found.iter().map(|f| (t - f).norm()).collect()).collect();
        let assign = optimal_assignment(&cost);
        for (i, &j) in assign.iter().enumerate() {
            let tol = if i < 3 { 1e-4 } else { 1e-7 };
            assert!(cost[i][j] < tol, "root {i}: error {}", cost[i][j]);
        }
    }

    #[test]
    fn derivative_and_scale() {
        let p = Polynomial::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(real_coeffs(&p.derivative()), vec![2.0, 6.0]);
        assert_eq!(real_coeffs(&p.scale(c(2.0, 0.0))), vec![2.0, 4.0, 6.0]);
        assert!(Polynomial::from_real(&[4.0]).derivative().is_zero());
    }

    #[test]
    fn conjugate_closed_roots_give_real_coefficients() {
        let roots = [c(-0.3, 0.9), c(-0.3, -0.9), c(1.1, 0.0), c(0.2, 2.0), c(0.2, -2.0)];
        let p = Polynomial::from_roots(c(1.7, 0.0), &roots);
        assert!(p.is_real(1e-12));
    }

    #[test]
    fn assignment_prefers_global_minimum() {
        // greedy on row 0 would take column 0 and force row 1 onto an expensive column
        let cost = vec![vec![1.0, 2.0, 10.0], vec![1.1, 10.0, 10.0]];
        assert_eq!(optimal_assignment(&cost), vec![1, 0]);
    }
}
