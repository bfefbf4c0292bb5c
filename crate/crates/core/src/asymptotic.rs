//! Large-N behavior of the kernel: the steepest-descent asymptotic form,
//! its measured relative error, the Segal–Bargmann limit kernel and the
//! limiting one-point density.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel_exact::{kernel, support_radius, KernelParams};
use crate::specfun::{cpow, ScaledComplex};

/// Sectorial domain `{ζ : 0 < |ζ| < radius, |arg ζ| < tau / 2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSpec {
    pub tau: f64,
    pub radius: f64,
}

impl SectorSpec {
    pub fn new(tau: f64, radius: f64) -> Result<Self> {
        if !(tau >= 0.0 && radius > 0.0) {
            return Err(Error::domain(format!(
                "sector needs tau >= 0 and radius > 0, got ({tau}, {radius})"
            )));
        }
        Ok(SectorSpec { tau, radius })
    }

    pub fn contains(&self, zeta: Complex64) -> bool {
        in_sector(zeta, self)
    }
}

pub fn in_sector(zeta: Complex64, sector: &SectorSpec) -> bool {
    let r = zeta.norm();
    r > 0.0 && r < sector.radius && zeta.arg().abs() < 0.5 * sector.tau
}

/// `γ = (1 - δ) / α`, the spatial scale paired with the index scale `δ`.
pub fn gamma_for(alpha: f64, delta: f64) -> f64 {
    (1.0 - delta) / alpha
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta must lie in (0, 1], got {delta}")))
    }
}

/// Leading asymptotic form of the kernel, directly comparable with
/// `kernel(Z / N^γ, W / N^γ)`:
///
/// ```text
/// N^{δ+2γ} (α²/4π) (Z W̄)^{α/2-1} exp(N^δ ((Z W̄)^{α/2} - |Z|^α/2 - |W|^α/2))
/// ```
///
/// Non-integer powers use the principal branch.
pub fn asymptotic_kernel(
    z: Complex64,
    w: Complex64,
    params: &KernelParams,
    delta: f64,
) -> Result<ScaledComplex> {
    check_delta(delta)?;
    let a = params.alpha();
    let ln_n = params.n_f64().ln();
    let g = gamma_for(a, delta);
    let zeta = z * w.conj();
    let pre_exp = 0.5 * a - 1.0;
    let n_delta = params.n_f64().powf(delta);
    let gauge = 0.5 * (z.norm().powf(a) + w.norm().powf(a));

    let (ln_pre, arg_pre, exponent) = if zeta.norm() == 0.0 {
        if pre_exp < 0.0 {
            return Err(Error::Singularity(format!(
                "(Z W̄)^(α/2-1) diverges at Z W̄ = 0 for alpha = {a}"
            )));
        }
        if pre_exp > 0.0 {
            return Ok(ScaledComplex::ZERO);
        }
        (0.0, 0.0, Complex64::new(-gauge, 0.0))
    } else {
        let exponent = if z == w {
            // the exponent -|Z^{α/2} - W^{α/2}|²/2 vanishes on the diagonal
            Complex64::new(0.0, 0.0)
        } else {
            cpow(zeta, 0.5 * a) - gauge
        };
        (pre_exp * zeta.norm().ln(), pre_exp * zeta.arg(), exponent)
    };
    let log_mod = (delta + 2.0 * g) * ln_n + (a * a / (4.0 * PI)).ln() + ln_pre + n_delta * exponent.re;
    let phase = arg_pre + n_delta * exponent.im;
    Ok(ScaledComplex::from_log_polar(log_mod, phase))
}

/// `E = exact / asymptotic - 1` at `(Z/N^γ, W/N^γ)`, evaluated without
/// leaving scaled space.
pub fn error_ratio(z: Complex64, w: Complex64, params: &KernelParams, delta: f64) -> Result<Complex64> {
    let asym = asymptotic_kernel(z, w, params, delta)?;
    if asym.is_zero() {
        return Err(Error::Degenerate(
            "asymptotic kernel vanishes; relative error undefined".into(),
        ));
    }
    let scale = params.n_f64().powf(-gamma_for(params.alpha(), delta));
    let exact = kernel(z * scale, w * scale, params)?;
    Ok(scaled_ratio_minus_one(&exact, &asym))
}

/// `a / b - 1` with the `exp(·) - 1` evaluated via `expm1` so small
/// deviations keep their relative accuracy.
pub(crate) fn scaled_ratio_minus_one(a: &ScaledComplex, b: &ScaledComplex) -> Complex64 {
    if a.is_zero() {
        return Complex64::new(-1.0, 0.0);
    }
    let q = a.significand() / b.significand();
    let w = Complex64::new(a.log_scale() - b.log_scale(), 0.0) + q.ln();
    let s = (0.5 * w.im).sin();
    let re = w.re.exp_m1() * w.im.cos() - 2.0 * s * s;
    let im = w.re.exp() * w.im.sin();
    Complex64::new(re, im)
}

/// Segal–Bargmann kernel `(1/π) exp(z w̄ - |z|²/2 - |w|²/2)`.
pub fn segal_bargmann(z: Complex64, w: Complex64) -> Complex64 {
    let e = z * w.conj() - 0.5 * (z.norm_sqr() + w.norm_sqr());
    e.exp() / PI
}

/// `φ'(z) K_N(φ(z), φ(w)) conj(φ'(w))` with `φ(z) = (z/√N)^{2/α}`.
pub fn conformal_rescaled_kernel(z: Complex64, w: Complex64, params: &KernelParams) -> Result<Complex64> {
    let a = params.alpha();
    let p = 2.0 / a;
    let integer_power = p.fract() == 0.0;
    for (name, v) in [("z", z), ("w", w)] {
        if v.norm() == 0.0 && !integer_power {
            return Err(Error::domain(format!(
                "{name} = 0 is a branch point of (z/√N)^(2/α) for alpha = {a}"
            )));
        }
    }
    let sqrt_n = params.n_f64().sqrt();
    let map = |v: Complex64| cpow(v / sqrt_n, p);
    let deriv = |v: Complex64| cpow(v / sqrt_n, p - 1.0) * (p / sqrt_n);
    let k = kernel(map(z), map(w), params)?;
    k.scale_by(deriv(z) * deriv(w).conj()).try_to_complex()
}

/// Limiting density `α²/(4π) |z|^{α-2}` on the disk of radius `(2/α)^{1/α}`.
pub fn density_limit(z: Complex64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let r = z.norm();
    if r > support_radius(alpha) {
        return Ok(0.0);
    }
    if r == 0.0 {
        if alpha < 2.0 {
            return Err(Error::Singularity(format!(
                "limiting density diverges at the origin for alpha = {alpha}"
            )));
        }
        return Ok(if alpha == 2.0 { 1.0 / PI } else { 0.0 });
    }
    Ok(alpha * alpha / (4.0 * PI) * r.powf(alpha - 2.0))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
