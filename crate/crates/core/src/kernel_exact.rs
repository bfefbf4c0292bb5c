//! Exact finite-N kernel of the ensemble with weight `exp(-N |z|^α)`.
//!
//! The monomials `z^(j-1)`, `j = 1..N`, are orthogonal for this weight, so the
//! reproducing kernel is a single truncated power series in `z w̄`:
//!
//! ```text
//! K̃(z, w) = (α / 2π) Σ_{j=1}^{N} N^{2j/α} (z w̄)^{j-1} / Γ(2j/α)
//! K(z, w) = exp(-N|z|^α / 2) exp(-N|w|^α / 2) K̃(z, w)
//! ```
//!
//! Everything is evaluated term-by-term in the log domain and summed with
//! [`scaled_sum`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use crate::specfun::{log_gamma, log_power_over_gamma, scaled_sum, ScaledComplex};

/// Potential exponent `α` and matrix size `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    n: usize,
}

impl KernelParams {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        Ok(KernelParams { alpha, n })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn n_f64(&self) -> f64 {
        self.n as f64
    }

    /// Radius `(2/α)^{1/α}` of the limiting eigenvalue support.
    pub fn support_radius(&self) -> f64 {
        support_radius(self.alpha)
    }
}

pub fn support_radius(alpha: f64) -> f64 {
    (2.0 / alpha).powf(1.0 / alpha)
}

fn check_finite(z: Complex64, name: &str) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {z}")))
    }
}

/// ln of the normalization `sqrt(α / (2π Γ(2j/α))) N^{j/α}` of the j-th monomial.
pub fn monomial_log_norm(j: usize, params: &KernelParams) -> Result<f64> {
    if j == 0 || j > params.n {
        return Err(Error::domain(format!(
            "monomial index {j} outside 1..={}",
            params.n
        )));
    }
    let a = params.alpha;
    let jf = j as f64;
    Ok(0.5 * (a.ln() - (2.0 * PI).ln() - log_gamma(2.0 * jf / a)?) + jf / a * params.n_f64().ln())
}

/// The polynomial part `K̃(z, w)` of the kernel.
///
/// Hermitian symmetry is exact: the sum is always evaluated for a
/// non-negative phase of `z w̄` and conjugated when needed, so
/// `kernel_tilde(z, w) == kernel_tilde(w, z).conj()` bit for bit.
pub fn kernel_tilde(z: Complex64, w: Complex64, params: &KernelParams) -> Result<ScaledComplex> {
    check_finite(z, "z")?;
    check_finite(w, "w")?;
    let a = params.alpha;
    let n = params.n_f64();
    // z w̄ formed once: its phase is accurate to an ulp, unlike arg z − arg w
    let x = Complex64::new(z.re * w.re + z.im * w.im, z.im * w.re - z.re * w.im);
    let zero_product = x.re == 0.0 && x.im == 0.0;
    let flip = x.im < 0.0;
    let x = if flip { x.conj() } else { x };
    let ln_prod = x.norm().ln();
    let phase = x.arg();

    let mut terms = Vec::with_capacity(params.n);
    for j in 1..=params.n {
        let jf = j as f64;
        let power = if j == 1 {
            0.0
        } else if zero_product {
            f64::NEG_INFINITY
        } else {
            (jf - 1.0) * ln_prod
        };
        let lm = log_power_over_gamma(n, 2.0 * jf / a)? + power;
        terms.push((lm, (jf - 1.0) * phase));
    }
    let sum = scaled_sum(&terms)?.scale_by_exp((a / (2.0 * PI)).ln());
    Ok(if flip { sum.conj() } else { sum })
}

/// The full kernel `K_N(z, w)` including the Gaussian-type weights.
pub fn kernel(z: Complex64, w: Complex64, params: &KernelParams) -> Result<ScaledComplex> {
    let tilde = kernel_tilde(z, w, params)?;
    let a = params.alpha;
    let weight = -0.5 * params.n_f64() * (abs_pow(z, a) + abs_pow(w, a));
    Ok(tilde.scale_by_exp(weight))
}

/// `|z|^α`, exact up to one rounding of `|z|²` when `α = 2`.
pub(crate) fn abs_pow(z: Complex64, a: f64) -> f64 {
    if a == 2.0 {
        z.norm_sqr()
    } else {
        z.norm_sqr().powf(0.5 * a)
    }
}

/// One-point density `K_N(z, z) / N`.
pub fn density_exact(z: Complex64, params: &KernelParams) -> Result<f64> {
    let k = kernel(z, z, params)?.scale_by_exp(-params.n_f64().ln());
    Ok(k.try_to_complex()?.re)
}

/// `|(φ_j, φ_k) - δ_jk|` with the radial integral done by adaptive quadrature.
///
/// The angular integral is exact, so distinct indices give exactly zero.
pub fn orthonormality_defect(j: usize, k: usize, params: &KernelParams) -> Result<f64> {
    let lj = monomial_log_norm(j, params)?;
    monomial_log_norm(k, params)?;
    if j != k {
        return Ok(0.0);
    }
    let a = params.alpha;
    let n = params.n_f64();
    let p = 2.0 * j as f64 - 1.0;
    let log_pref = (2.0 * PI).ln() + 2.0 * lj;
    let integrand = |r: f64| {
        if r <= 0.0 {
            0.0
        } else {
            (log_pref + p * r.ln() - n * r.powf(a)).exp()
        }
    };

    let r_cut = radial_cutoff(params);
    // Breakpoints around the peak of r^{2j-1} e^{-N r^α}.
    let peak = (p / (a * n)).powf(1.0 / a);
    let mut cuts = vec![0.0];
    let mut x = 0.25 * peak;
    while x < r_cut {
        cuts.push(x);
        x *= 2.0;
    }
    cuts.push(r_cut);
    let cfg = QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(integrand, w[0], w[1], &cfg)?.value;
    }
    Ok((total - 1.0).abs())
}

/// Smallest radius (doubling search) with `N r^α ≥ 745 + 2N ln(1+r)`, past
/// which the radial integrands underflow.
pub fn radial_cutoff(params: &KernelParams) -> f64 {
    let a = params.alpha;
    let n = params.n_f64();
    let mut r: f64 = 1.0;
    while n * r.powf(a) < 745.0 + 2.0 * n * r.ln_1p() {
        r *= 1.25;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(alpha: f64, n: usize) -> KernelParams {
        KernelParams::new(alpha, n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(0.0, 3).is_err());
        assert!(KernelParams::new(-1.0, 3).is_err());
        assert!(KernelParams::new(2.0, 0).is_err());
        assert!(KernelParams::new(f64::NAN, 3).is_err());
    }

    #[test]
    fn monomial_norm_simple_cases() {
        let v = monomial_log_norm(1, &p(2.0, 1)).unwrap();
        assert!((v - (1.0 / PI).sqrt().ln()).abs() < 1e-15);
        let v = monomial_log_norm(1, &p(2.0, 100)).unwrap();
        assert!((v - (10.0 / PI.sqrt()).ln()).abs() < 1e-14);
        assert!(monomial_log_norm(0, &p(2.0, 5)).is_err());
        assert!(monomial_log_norm(6, &p(2.0, 5)).is_err());
    }

    #[test]
    fn kernel_at_origin_keeps_first_term() {
        for (alpha, n) in [(2.0, 7), (0.7, 12), (3.5, 40)] {
            let pr = p(alpha, n);
            let k = kernel_tilde(c(0.0, 0.0), c(0.3, -1.1), &pr).unwrap();
            let expect =
                alpha / (2.0 * PI) * (n as f64).powf(2.0 / alpha) / log_gamma(2.0 / alpha).unwrap().exp();
            assert!((k.to_complex() - expect).norm() / expect < 1e-14);
        }
        let k = kernel(c(0.0, 0.0), c(0.0, 0.0), &p(2.0, 9)).unwrap();
        assert!((k.to_complex().re - 9.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn single_term_gaussian_case() {
        let k = kernel_tilde(c(1.0, 0.0), c(1.0, 0.0), &p(2.0, 1)).unwrap();
        assert!((k.to_complex() - c(1.0 / PI, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn hermitian_bit_exact() {
        let pr = p(1.3, 37);
        let pts = [c(0.4, 0.2), c(-0.5, 0.7), c(0.0, -0.9), c(-1.0, -1e-9), c(-1.0, 1e-9)];
        for &z in &pts {
            for &w in &pts {
                let a = kernel(z, w, &pr).unwrap();
                let b = kernel(w, z, &pr).unwrap();
                assert_eq!(a, b.conj());
            }
        }
    }

    #[test]
    fn diagonal_is_real_positive() {
        let pr = p(2.7, 60);
        for z in [c(0.3, 0.4), c(-0.8, 0.1), c(0.0, 0.0)] {
            let k = kernel(z, z, &pr).unwrap();
            assert!(k.significand().re > 0.0);
            assert_eq!(k.significand().im, 0.0);
        }
    }

    #[test]
    fn density_far_outside_support_is_tiny() {
        let d = density_exact(c(2.0, 0.0), &p(2.0, 500)).unwrap();
        assert!((0.0..1e-10).contains(&d));
    }

    #[test]
    fn off_diagonal_orthogonality_is_exact() {
        let pr = p(1.5, 10);
        assert_eq!(orthonormality_defect(2, 5, &pr).unwrap(), 0.0);
        assert!(orthonormality_defect(0, 1, &pr).is_err());
    }

    #[test]
    fn orthonormality_small_cases() {
        assert!(orthonormality_defect(1, 1, &p(2.0, 10)).unwrap() < 1e-10);
        assert!(orthonormality_defect(7, 7, &p(1.5, 30)).unwrap() < 1e-8);
    }

    #[test]
    fn rejects_non_finite_points() {
        assert!(kernel(c(f64::NAN, 0.0), c(0.0, 0.0), &p(2.0, 3)).is_err());
    }
}
