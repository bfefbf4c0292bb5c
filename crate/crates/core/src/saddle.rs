//! Analysis of the kernel's summand as a function of a continuous index.
//!
//! With `ζ = Z W̄` the summand extends to
//! `g_ζ(x) = (N^{2δ/α} ζ)^x / Γ(2x/α)` for real `x > 0`. Its modulus has a
//! single maximum at the root `x*` of `ln(N^{2δ/α}|ζ|) = (2/α) ψ(2x/α)`,
//! decays like a Gaussian of width `~N^{δ/2}` around it, and the continuum
//! version of the sum is evaluated at the saddle `η₀ = α ζ^{α/2} / 2` of
//!
//! ```text
//! h(η) = (2η/α) ln(α e ζ^{α/2} / (2η)) - |ζ|^{α/2}.
//! ```

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::asymptotic::{check_delta, gamma_for};
use crate::error::{Error, Result};
use crate::kernel_exact::KernelParams;
use crate::specfun::{cpow, digamma, log_gamma, scaled_sum, ScaledComplex};

/// Smallest |ζ| for which maximizer-based operations are attempted.
pub const MIN_ZETA_ABS: f64 = 1e-6;

/// Everything the summand `g_ζ` depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummandContext {
    pub alpha: f64,
    pub delta: f64,
    pub n: usize,
    pub zeta: Complex64,
    /// Opening constant of the admissible sector `S(θ N^{-β}, K)`.
    pub theta: f64,
    pub beta: f64,
    /// Threshold constant `k` in the large-N gate (digamma argument above `k`).
    pub k_const: f64,
}

impl SummandContext {
    pub fn new(alpha: f64, delta: f64, n: usize, zeta: Complex64) -> Result<Self> {
        KernelParams::new(alpha, n)?;
        check_delta(delta)?;
        if !zeta.is_finite() {
            return Err(Error::domain("zeta must be finite"));
        }
        Ok(SummandContext {
            alpha,
            delta,
            n,
            zeta,
            theta: 2.0 * PI,
            beta: 0.5,
            k_const: 10.0,
        })
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_k_const(mut self, k: f64) -> Self {
        self.k_const = k;
        self
    }

    pub fn gamma(&self) -> f64 {
        gamma_for(self.alpha, self.delta)
    }

    fn n_f64(&self) -> f64 {
        self.n as f64
    }

    pub fn n_delta(&self) -> f64 {
        self.n_f64().powf(self.delta)
    }

    /// `ln(N^{2δ/α} |ζ|)`.
    pub fn log_base(&self) -> f64 {
        2.0 * self.delta / self.alpha * self.n_f64().ln() + self.zeta.norm().ln()
    }

    /// `θ` such that `ζ = |ζ| exp(i θ / N^β)`.
    pub fn angle_parameter(&self) -> f64 {
        self.n_f64().powf(self.beta) * self.zeta.arg()
    }

    /// `K^{α,δ} = (2 N^{1-δ} / α)^{2/α}`.
    pub fn sector_radius(&self) -> f64 {
        (2.0 * self.n_f64().powf(1.0 - self.delta) / self.alpha).powf(2.0 / self.alpha)
    }

    /// Large-N threshold `N₀`. For `δ = 1` only the digamma-argument part
    /// applies; the companion condition becomes `|ζ| ≤ (2/α)^{2/α}`.
    pub fn n0(&self) -> f64 {
        let r = self.zeta.norm();
        let first = (self.k_const / r).powf(self.alpha / (2.0 * self.delta));
        if self.delta < 1.0 {
            let second = (0.5 * self.alpha * r.powf(0.5 * self.alpha)).powf(1.0 / (1.0 - self.delta));
            first.max(second)
        } else {
            first
        }
    }

    fn require_maximizer_regime(&self) -> Result<()> {
        let r = self.zeta.norm();
        if r < MIN_ZETA_ABS {
            return Err(Error::domain(format!(
                "|zeta| = {r:e} is below {MIN_ZETA_ABS:e}; use the exact kernel"
            )));
        }
        let n0 = self.n0();
        if self.n_f64() <= n0 {
            return Err(Error::domain(format!(
                "n = {} does not exceed the large-N threshold {n0:.3}",
                self.n
            )));
        }
        Ok(())
    }

    fn ln_g_abs(&self, x: f64) -> Result<f64> {
        Ok(x * self.log_base() - log_gamma(2.0 * x / self.alpha)?)
    }
}

/// `g_ζ(x)` in scaled form.
pub fn g_eval(x: f64, ctx: &SummandContext) -> Result<ScaledComplex> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("g_eval needs x > 0, got {x}")));
    }
    if ctx.zeta.norm() == 0.0 {
        return Ok(ScaledComplex::ZERO);
    }
    Ok(ScaledComplex::from_log_polar(ctx.ln_g_abs(x)?, x * ctx.zeta.arg()))
}

fn maximizer_residual(x: f64, ctx: &SummandContext) -> Result<f64> {
    Ok(ctx.log_base() - 2.0 / ctx.alpha * digamma(2.0 * x / ctx.alpha)?)
}

/// Root `x*` of `ln(N^{2δ/α}|ζ|) - (2/α) ψ(2x/α) = 0`.
///
/// Bisection on `[1e-12, 10 N]` down to width 1e-8, then two Newton steps
/// with a central-difference derivative.
pub fn find_xstar(ctx: &SummandContext) -> Result<f64> {
    ctx.require_maximizer_regime()?;
    let mut lo = 1e-12;
    let mut hi = 10.0 * ctx.n_f64();
    if maximizer_residual(hi, ctx)? > 0.0 {
        return Err(Error::numerical(
            "find_xstar: no bracket in [1e-12, 10N]",
            maximizer_residual(hi, ctx)?,
        ));
    }
    // residual decreases in x
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if maximizer_residual(mid, ctx)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let h = 1e-5 * x.max(1.0);
        let d = (maximizer_residual(x + h, ctx)? - maximizer_residual(x - h, ctx)?) / (2.0 * h);
        if d == 0.0 {
            break;
        }
        let step = maximizer_residual(x, ctx)? / d;
        let next = x - step;
        if next > 0.0 {
            x = next;
        }
    }
    let res = maximizer_residual(x, ctx)?.abs();
    if res >= 1e-12 {
        return Err(Error::numerical("find_xstar residual", res));
    }
    Ok(x)
}

/// `(α/2)|ζ|^{α/2} N^δ - α/4`.
///
/// With `ψ(y) = ln y - 1/(2y) + …` the root of the
/// maximizer equation actually sits `α/2` higher; [`find_xstar`] solves it exactly.
pub fn xstar_asymptotic(ctx: &SummandContext) -> f64 {
    0.5 * ctx.alpha * ctx.zeta.norm().powf(0.5 * ctx.alpha) * ctx.n_delta() - 0.25 * ctx.alpha
}

/// Leading term `|ζ|^{α/4} N^{δ/2} exp(|ζ|^{α/2} N^δ) / √(2π)` of the maximum.
pub fn gmax_asymptotic(ctx: &SummandContext) -> ScaledComplex {
    let r = ctx.zeta.norm();
    let log_mod = r.powf(0.5 * ctx.alpha) * ctx.n_delta() + 0.5 * ctx.delta * ctx.n_f64().ln()
        + 0.25 * ctx.alpha * r.ln()
        - 0.5 * (2.0 * PI).ln();
    ScaledComplex::from_log_polar(log_mod, 0.0)
}

/// `ln(g_{|ζ|}(x* + s) / g_{|ζ|}(x*))` with `s = factor · N^{δ/2} ln N`.
pub fn log_offset_decay(ctx: &SummandContext, factor: f64) -> Result<f64> {
    let xs = find_xstar(ctx)?;
    let off = factor * ctx.n_f64().powf(0.5 * ctx.delta) * ctx.n_f64().ln();
    if xs - off <= 0.0 {
        return Err(Error::domain(format!(
            "x* - N^(δ/2) ln N = {} is not positive",
            xs - off
        )));
    }
    Ok(ctx.ln_g_abs(xs + off)? - ctx.ln_g_abs(xs)?)
}

/// `g_{|ζ|}(x₊) / g_{|ζ|}(x*)` at `x₊ = x* + N^{δ/2} ln N`.
pub fn offset_decay(ctx: &SummandContext) -> Result<f64> {
    Ok(log_offset_decay(ctx, 1.0)?.exp())
}

/// Saddle `η₀ = α ζ^{α/2} / 2` of `h`.
pub fn saddle_point(zeta: Complex64, alpha: f64) -> Result<Complex64> {
    if zeta.norm() == 0.0 {
        return Err(Error::domain("saddle point undefined at zeta = 0"));
    }
    Ok(cpow(zeta, 0.5 * alpha) * (0.5 * alpha))
}

pub fn h_eval(eta: Complex64, zeta: Complex64, alpha: f64) -> Result<Complex64> {
    if eta.norm() == 0.0 {
        return Err(Error::domain("h is undefined at eta = 0"));
    }
    let arg = cpow(zeta, 0.5 * alpha) * (alpha * E) / (eta * 2.0);
    Ok(eta * (2.0 / alpha) * arg.ln() - zeta.norm().powf(0.5 * alpha))
}

/// `h''(η) = -2 / (α η)`.
pub fn h_second_derivative(eta: Complex64, alpha: f64) -> Complex64 {
    -2.0 / (eta * alpha)
}

/// `S_N = Σ_{j=1}^{N} g_ζ(j)` summed directly.
pub fn direct_sum(ctx: &SummandContext) -> Result<ScaledComplex> {
    if ctx.zeta.norm() == 0.0 {
        return Ok(ScaledComplex::ZERO);
    }
    let mut terms = Vec::with_capacity(ctx.n);
    for j in 1..=ctx.n {
        let x = j as f64;
        terms.push((ctx.ln_g_abs(x)?, x * ctx.zeta.arg()));
    }
    scaled_sum(&terms)
}

/// Leading steepest-descent value `(α/2) ζ^{α/2} N^δ exp(ζ^{α/2} N^δ)` of `S_N`.
///
/// Only defined inside `S(θ N^{-β}, K^{α,δ})`: a wider opening lets
/// `|exp(N^δ(ζ^{α/2} - |ζ|^{α/2}))|` fall below the Euler–Maclaurin
/// remainders.
pub fn steepest_descent_sum(ctx: &SummandContext) -> Result<ScaledComplex> {
    let r = ctx.zeta.norm();
    let k = ctx.sector_radius();
    let half_open = 0.5 * ctx.theta * ctx.n_f64().powf(-ctx.beta);
    if !(r > 0.0 && r < k && ctx.zeta.arg().abs() < half_open) {
        return Err(Error::domain(format!(
            "zeta = {} lies outside the sector S(θN^-β, K) with half-opening {half_open:.3e} and radius {k:.6}",
            ctx.zeta
        )));
    }
    let u = cpow(ctx.zeta, 0.5 * ctx.alpha) * ctx.n_delta();
    let log_mod = u.re + ctx.delta * ctx.n_f64().ln() + (0.5 * ctx.alpha * r.powf(0.5 * ctx.alpha)).ln();
    let phase = u.im + 0.5 * ctx.alpha * ctx.zeta.arg();
    Ok(ScaledComplex::from_log_polar(log_mod, phase))
}

/// Kernel at `(Z/N^γ, W/N^γ)` rebuilt from the summand sum:
/// `(α/2π) e^{-N^δ|Z|^α/2} e^{-N^δ|W|^α/2} N^{2γ} S_N / (Z W̄)`.
pub fn kernel_via_summand(z: Complex64, w: Complex64, params: &KernelParams, delta: f64) -> Result<ScaledComplex> {
    let a = params.alpha();
    let ctx = SummandContext::new(a, delta, params.n(), z * w.conj())?;
    if ctx.zeta.norm() == 0.0 {
        return Err(Error::domain("kernel_via_summand needs Z W̄ ≠ 0"));
    }
    let s = direct_sum(&ctx)?;
    let n = params.n_f64();
    let log_pref = (a / (2.0 * PI)).ln() - 0.5 * ctx.n_delta() * (z.norm().powf(a) + w.norm().powf(a))
        + 2.0 * ctx.gamma() * n.ln();
    Ok((s / ScaledComplex::from_complex(ctx.zeta)).scale_by_exp(log_pref))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(alpha: f64, delta: f64, n: usize, zeta: f64) -> SummandContext {
        SummandContext::new(alpha, delta, n, Complex64::new(zeta, 0.0)).unwrap()
    }

    #[test]
    fn gamma_is_derived() {
        let c = ctx(3.0, 0.4, 10, 0.5);
        assert!((c.alpha * c.gamma() + c.delta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn g_eval_simple_values() {
        let n = 50;
        let c = SummandContext::new(2.0, 1.0, n, Complex64::new(0.3, 0.2)).unwrap();
        let v = g_eval(1.0, &c).unwrap().to_complex();
        let expect = c.zeta * 50.0 / log_gamma(1.0).unwrap().exp();
        assert!((v - expect).norm() / expect.norm() < 1e-14);

        let c = ctx(2.0, 1.0, 20, 1.0);
        let v = g_eval(3.0, &c).unwrap().to_complex();
        assert!((v.re - 20f64.powi(3) / 2.0).abs() / 4000.0 < 1e-14);

        assert!(g_eval(0.0, &c).is_err());
        assert!(g_eval(-1.0, &c).is_err());
    }

    #[test]
    fn modulus_of_g_is_g_of_modulus() {
        let c = SummandContext::new(1.7, 0.8, 90, Complex64::from_polar(0.6, 0.4)).unwrap();
        let m = SummandContext { zeta: Complex64::new(0.6, 0.0), ..c };
        for x in [0.3, 2.0, 17.5, 80.0] {
            let a = g_eval(x, &c).unwrap();
            let b = g_eval(x, &m).unwrap();
            assert!((a.ln_abs() - b.ln_abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn xstar_near_edge_and_interior() {
        // ψ(y) = ln(y - 1/2) + O(y^-2) puts the root at A + 1/2 for α = 2
        let c = ctx(2.0, 1.0, 1000, 1.0);
        let x = find_xstar(&c).unwrap();
        assert!((x - 1000.5).abs() <= 0.01);
        assert!(maximizer_residual(x, &c).unwrap().abs() < 1e-12);
        let c = ctx(2.0, 1.0, 1000, 0.25);
        assert!((find_xstar(&c).unwrap() - 250.5).abs() <= 0.01);
    }

    #[test]
    fn xstar_is_a_local_max() {
        let c = ctx(3.0, 0.7, 500, 0.8);
        let x = find_xstar(&c).unwrap();
        let at = g_eval(x, &c).unwrap().ln_abs();
        assert!(g_eval(x + 0.1, &c).unwrap().ln_abs() < at);
        assert!(g_eval(x - 0.1, &c).unwrap().ln_abs() < at);
    }

    #[test]
    fn xstar_gate() {
        let c = ctx(2.0, 1.0, 30, 0.25);
        assert!(find_xstar(&c).is_err());
        let c = ctx(2.0, 1.0, 3000, 1e-7);
        assert!(find_xstar(&c).is_err());
    }

    #[test]
    fn xstar_asymptotic_values() {
        assert!((xstar_asymptotic(&ctx(2.0, 1.0, 100, 1.0)) - 99.5).abs() < 1e-12);
        assert!((xstar_asymptotic(&ctx(4.0, 1.0, 200, 0.5)) - 99.0).abs() < 1e-12);
    }

    #[test]
    fn gmax_log_scale() {
        let c = ctx(2.0, 1.0, 100, 1.0);
        let expect = 100.0 + 10f64.ln() - (2.0 * PI).sqrt().ln();
        assert!((gmax_asymptotic(&c).ln_abs() - expect).abs() < 1e-12);
    }

    #[test]
    fn gmax_matches_true_maximum() {
        let c = ctx(2.0, 1.0, 1000, 0.5);
        let x = find_xstar(&c).unwrap();
        let ratio = g_eval(x, &c).unwrap().ratio(&gmax_asymptotic(&c));
        assert!((ratio.re - 1.0).abs() <= 5.0 / 1000.0);
    }

    #[test]
    fn offset_decay_shape() {
        let c = ctx(2.0, 1.0, 400, 1.0);
        let l1 = log_offset_decay(&c, 1.0).unwrap();
        let l2 = log_offset_decay(&c, 2.0).unwrap();
        assert!(l1 < 0.0 && l2 < l1);
        let expect = -(400f64.ln()).powi(2) / 2.0;
        assert!((l1 - expect).abs() <= 0.25 * expect.abs());
        assert!(offset_decay(&c).unwrap() < 1.0);
        // offset larger than x* itself
        let c = ctx(2.0, 1.0, 100, 0.15);
        assert!(log_offset_decay(&c, 1.0).is_err());
    }

    #[test]
    fn saddle_values() {
        let s = saddle_point(Complex64::new(1.0, 0.0), 2.0).unwrap();
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let s = saddle_point(Complex64::new(0.0, 1.0), 2.0).unwrap();
        assert!((s - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let s = saddle_point(Complex64::new(0.0, 1.0), 1.0).unwrap();
        assert!((s - Complex64::from_polar(0.5, PI / 4.0)).norm() < 1e-15);
        assert!(saddle_point(Complex64::new(0.0, 0.0), 2.0).is_err());
    }

    #[test]
    fn h_vanishes_at_real_saddle() {
        for (alpha, r) in [(2.0, 1.0), (3.0, 0.4), (1.0, 2.5)] {
            let zeta = Complex64::new(r, 0.0);
            let eta = saddle_point(zeta, alpha).unwrap();
            assert!(h_eval(eta, zeta, alpha).unwrap().norm() < 1e-14);
        }
        let zeta = Complex64::from_polar(0.7, 0.3);
        let eta = saddle_point(zeta, 2.0).unwrap();
        let expect = zeta - zeta.norm();
        assert!((h_eval(eta, zeta, 2.0).unwrap() - expect).norm() < 1e-14);
        assert!(h_eval(Complex64::new(0.0, 0.0), zeta, 2.0).is_err());
    }

    #[test]
    fn h_is_negative_off_maximizer() {
        let zeta = Complex64::new(1.0, 0.0);
        let v = h_eval(Complex64::new(1.0 / E, 0.0), zeta, 2.0).unwrap();
        assert!(v.re < 0.0);
    }

    #[test]
    fn sector_gate_for_steepest_descent() {
        let c = SummandContext::new(2.0, 1.0, 400, Complex64::from_polar(0.5, 0.5)).unwrap();
        assert!(steepest_descent_sum(&c).is_err());
        let c = ctx(2.0, 1.0, 400, 1.2);
        assert!(steepest_descent_sum(&c).is_err());
        let c = ctx(2.0, 1.0, 400, 0.5);
        let s = steepest_descent_sum(&c).unwrap();
        assert_eq!(s.significand().im, 0.0);
        assert!(s.significand().re > 0.0);
    }
}
