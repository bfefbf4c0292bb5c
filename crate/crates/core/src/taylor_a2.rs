//! The `α = 2` case through the Taylor remainder of the exponential.
//!
//! Here the summand sum is the truncated exponential
//! `S_N(ζ) = Nζ + (Nζ)²/1! + … + (Nζ)^N/(N−1)!` and the relative error against
//! `f_N(ζ) = Nζ e^{Nζ}` is `E_N(ζ) = S_N/f_N − 1`.

use num_complex::Complex64;

use crate::asymptotic::scaled_ratio_minus_one;
use crate::error::{Error, Result};
use crate::specfun::{log_gamma, scaled_sum, ScaledComplex};

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        Err(Error::domain("n must be at least 1"))
    } else {
        Ok(n as f64)
    }
}

/// `S_N(ζ) = Σ_{k=1}^{N} (Nζ)^k / (k−1)!`.
pub fn truncated_exp(zeta: Complex64, n: usize) -> Result<ScaledComplex> {
    let nf = check_n(n)?;
    if !zeta.is_finite() {
        return Err(Error::domain("zeta must be finite"));
    }
    if zeta.norm() == 0.0 {
        return Ok(ScaledComplex::ZERO);
    }
    let l = (nf * zeta.norm()).ln();
    let th = zeta.arg();
    let mut terms = Vec::with_capacity(n);
    for k in 1..=n {
        let kf = k as f64;
        terms.push((kf * l - log_gamma(kf)?, kf * th));
    }
    scaled_sum(&terms)
}

/// `f_N(ζ) = Nζ e^{Nζ}`.
pub fn exp_target(zeta: Complex64, n: usize) -> Result<ScaledComplex> {
    let nf = check_n(n)?;
    let u = zeta * nf;
    Ok(ScaledComplex::from_complex(u).scale_by_exp(u.re).scale_by(Complex64::from_polar(1.0, u.im)))
}

/// `E_N(ζ)` in scaled form, so exponentially small values keep their log.
///
/// For `|ζ| < 1` the remainder is summed directly:
/// `E_N = −e^{−Nζ} Σ_{k≥N} (Nζ)^k / k!`; otherwise `S_N / f_N − 1`.
pub fn remainder_error_scaled(zeta: Complex64, n: usize) -> Result<ScaledComplex> {
    let nf = check_n(n)?;
    if !zeta.is_finite() || zeta.norm() == 0.0 {
        return Err(Error::domain("remainder_error needs a finite zeta != 0"));
    }
    if zeta.norm() >= 1.0 {
        let s = truncated_exp(zeta, n)?;
        return Ok(ScaledComplex::from_complex(scaled_ratio_minus_one(&s, &exp_target(zeta, n)?)));
    }
    let l = (nf * zeta.norm()).ln();
    let th = zeta.arg();
    let mut terms = Vec::new();
    let mut first = None;
    let mut k = n;
    loop {
        let kf = k as f64;
        let lm = kf * l - log_gamma(kf + 1.0)?;
        let f0 = *first.get_or_insert(lm);
        terms.push((lm, kf * th));
        // ratios are below |ζ| < 1 from here on
        if lm < f0 - 45.0 || k > n + 2_000_000 {
            break;
        }
        k += 1;
    }
    let tail = scaled_sum(&terms)?;
    let u = zeta * nf;
    Ok((-tail).scale_by_exp(-u.re).scale_by(Complex64::from_polar(1.0, -u.im)))
}

/// `E_N(ζ) = S_N(ζ) / (Nζ e^{Nζ}) − 1`.
pub fn remainder_error(zeta: Complex64, n: usize) -> Result<Complex64> {
    Ok(remainder_error_scaled(zeta, n)?.to_complex())
}

/// `ln sup |E_N|` over the given points.
pub fn log_sup_error(zetas: &[Complex64], n: usize) -> Result<f64> {
    zetas
        .iter()
        .map(|&z| Ok(remainder_error_scaled(z, n)?.ln_abs()))
        .try_fold(f64::NEG_INFINITY, |m, v: Result<f64>| Ok(m.max(v?)))
}

/// Smallest positive root `K` of `K e^{1 − (1−a) K cos(τ/2)} = 1`.
///
/// Scans `ln K + 1 − (1−a) K cos(τ/2)` outward in steps of 0.01 and bisects
/// the first bracket.
pub fn sector_radius(a: f64, tau: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("a must lie in (0, 1), got {a}")));
    }
    if !(0.0..=2.0 * std::f64::consts::PI).contains(&tau) {
        return Err(Error::domain(format!("tau must lie in [0, 2π], got {tau}")));
    }
    let c = (1.0 - a) * (0.5 * tau).cos();
    let f = |k: f64| k.ln() + 1.0 - c * k;
    let step = 0.01;
    let mut lo = 1e-12;
    let mut hi = step;
    while f(hi) < 0.0 {
        lo = hi;
        hi += step;
        if hi > 1e4 {
            return Err(Error::numerical(
                format!("sector_radius: no root for a = {a}, tau = {tau}"),
                f(hi),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    let res = sector_equation_residual(k, a, tau);
    if res >= 1e-12 {
        return Err(Error::numerical("sector_radius residual", res));
    }
    Ok(k)
}

/// `|K e^{1 − (1−a) K cos(τ/2)} − 1|`.
pub fn sector_equation_residual(k: f64, a: f64, tau: f64) -> f64 {
    (k * (1.0 - (1.0 - a) * k * (0.5 * tau).cos()).exp() - 1.0).abs()
}
