//! n-point correlation functions `R_n = det(K_N(z_i, z_j))`, their bulk
//! scaling limit and the gauge structure of the limiting determinant.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::asymptotic::segal_bargmann;
use crate::error::{Error, Result};
use crate::kernel_exact::{kernel, KernelParams};
use crate::saddle::SummandContext;
use crate::specfun::ScaledComplex;

/// Largest supported number of points.
pub const MAX_POINTS: usize = 12;

/// Points closer than this to the support edge are rejected.
pub const EDGE_MARGIN: f64 = 1e-3;

/// Square complex matrix `e^{log_scale} · data` (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub n: usize,
    pub log_scale: f64,
    pub data: Vec<Complex64>,
}

impl ScaledMatrix {
    pub fn new(n: usize, log_scale: f64, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n > MAX_POINTS {
            return Err(Error::domain(format!("matrix size {n} outside 1..={MAX_POINTS}")));
        }
        if data.len() != n * n {
            return Err(Error::domain(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(ScaledMatrix { n, log_scale, data })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// `max |a_ij − conj(a_ji)| / max |a_ij|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut big: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                big = big.max(self.get(i, j).norm());
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        if big == 0.0 {
            0.0
        } else {
            worst / big
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub points: Vec<Complex64>,
    pub matrix: ScaledMatrix,
    pub det_value: ScaledComplex,
    pub limit_prediction: Option<f64>,
}

/// Determinant by LU with partial pivoting.
///
/// Rows, then columns, are first scaled to unit maximum modulus (kernel
/// matrices with points outside the support have diagonals spanning many
/// orders of magnitude). A pivot below `ε · n` of the equilibrated matrix
/// makes it numerically singular and the result is exactly zero.
pub fn det_scaled(m: &ScaledMatrix) -> ScaledComplex {
    let n = m.n;
    let mut a = m.data.clone();
    let mut log_eq = 0.0;
    for i in 0..n {
        let big = (0..n).fold(0.0f64, |acc, k| acc.max(a[i * n + k].norm()));
        if big == 0.0 {
            return ScaledComplex::ZERO;
        }
        log_eq += big.ln();
        for k in 0..n {
            a[i * n + k] /= big;
        }
    }
    for k in 0..n {
        let big = (0..n).fold(0.0f64, |acc, i| acc.max(a[i * n + k].norm()));
        if big == 0.0 {
            return ScaledComplex::ZERO;
        }
        log_eq += big.ln();
        for i in 0..n {
            a[i * n + k] /= big;
        }
    }
    let tiny = f64::EPSILON * n as f64;
    let mut det = ScaledComplex::ONE;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
            .unwrap_or(col);
        let p = a[piv * n + col];
        if p.norm() <= tiny {
            return ScaledComplex::ZERO;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        det = det * ScaledComplex::from_complex(p);
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
        }
    }
    det.scale_by_exp(n as f64 * m.log_scale + log_eq)
}

/// Kernel matrix `K_N(z_i, z_j)` and its determinant `R_n^N(z_1, …, z_n)`.
///
/// The common scale is the largest diagonal log, so every significand entry
/// is bounded by one in modulus (Cauchy–Schwarz for the kernel).
pub fn kernel_matrix(points: &[Complex64], params: &KernelParams) -> Result<CorrelationResult> {
    let n = points.len();
    if n == 0 || n > MAX_POINTS {
        return Err(Error::domain(format!("need 1..={MAX_POINTS} points, got {n}")));
    }
    let mut entries = Vec::with_capacity(n * n);
    for &zi in points {
        for &zj in points {
            entries.push(kernel(zi, zj, params)?);
        }
    }
    let scale = (0..n)
        .map(|i| entries[i * n + i].ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = if scale.is_finite() { scale } else { 0.0 };
    let data = entries.iter().map(|e| e.scale_by_exp(-scale).to_complex()).collect();
    let matrix = ScaledMatrix::new(n, scale, data)?;
    let det_value = det_scaled(&matrix);
    Ok(CorrelationResult {
        points: points.to_vec(),
        matrix,
        det_value,
        limit_prediction: None,
    })
}

fn check_bulk_point(r: Complex64, params: &KernelParams) -> Result<()> {
    let edge = params.support_radius();
    let m = r.norm();
    if !(m > 0.0 && m < edge - EDGE_MARGIN) {
        return Err(Error::domain(format!(
            "|r| = {m} must lie in (0, {edge} - {EDGE_MARGIN})"
        )));
    }
    Ok(())
}

fn diagonal_log(r: Complex64, params: &KernelParams) -> Result<f64> {
    Ok(kernel(r, r, params)?.ln_abs())
}

/// `Z_i = r + z_i / √(π K_N(r, r))`.
pub fn scaled_points(r: Complex64, offsets: &[Complex64], params: &KernelParams) -> Result<Vec<Complex64>> {
    check_bulk_point(r, params)?;
    let step = (-0.5 * (PI.ln() + diagonal_log(r, params)?)).exp();
    Ok(offsets.iter().map(|&z| r + z * step).collect())
}

/// Determinant of the Segal–Bargmann matrix `𝕂(z_i, z_j)`.
pub fn limit_determinant(offsets: &[Complex64]) -> Result<f64> {
    let n = offsets.len();
    let data = offsets
        .iter()
        .flat_map(|&zi| offsets.iter().map(move |&zj| segal_bargmann(zi, zj)))
        .collect();
    let m = ScaledMatrix::new(n, 0.0, data)?;
    Ok(det_scaled(&m).to_complex().re)
}

/// `(1 − e^{−|z₁ − z₂|²}) / π²`.
pub fn two_point_limit(z1: Complex64, z2: Complex64) -> f64 {
    -(-(z1 - z2).norm_sqr()).exp_m1() / (PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLimit {
    /// `R_n^N(Z_1, …, Z_n) / (π K_N(r, r))^n`
    pub measured: f64,
    /// `det 𝕂(z_i, z_j)`
    pub predicted: f64,
    /// Closed form for two points.
    pub closed_form: Option<f64>,
}

pub fn scaling_limit_check(r: Complex64, offsets: &[Complex64], params: &KernelParams) -> Result<ScalingLimit> {
    let pts = scaled_points(r, offsets, params)?;
    let res = kernel_matrix(&pts, params)?;
    let n = offsets.len() as f64;
    let norm = n * (PI.ln() + diagonal_log(r, params)?);
    let measured = res.det_value.scale_by_exp(-norm).try_to_complex()?.re;
    let predicted = limit_determinant(offsets)?;
    let closed_form = if offsets.len() == 2 {
        let c = two_point_limit(offsets[0], offsets[1]);
        let dev = (c - predicted).abs();
        if dev > 1e-12 * c.abs().max(1e-300) && dev > 1e-15 {
            return Err(Error::Consistency {
                what: "two-point determinant vs closed form".into(),
                residual: dev,
            });
        }
        Some(c)
    } else {
        None
    };
    Ok(ScalingLimit {
        measured,
        predicted,
        closed_form,
    })
}

/// Gauge phases `λ_i` of the second-order expansion around `r`.
pub fn gauge_phases(r: Complex64, offsets: &[Complex64], params: &KernelParams) -> Vec<f64> {
    let a = params.alpha();
    let rn = r.norm();
    let sqrt_n = (params.n() as f64).sqrt();
    offsets
        .iter()
        .map(|&z| {
            let q = z / r;
            rn.powf(0.5 * a + 1.0) * q.im + rn * rn * (1.0 - 2.0 / a) * (q * q).im / (2.0 * sqrt_n)
        })
        .collect()
}

/// `|det C − det D| / |det D|` with `C_ij = e^{A_ij + i√N(λ_i − λ_j)}/π`
/// and `D_ij = e^{A_ij}/π`.
pub fn gauge_check(r: Complex64, offsets: &[Complex64], params: &KernelParams) -> Result<f64> {
    check_bulk_point(r, params)?;
    let n = offsets.len();
    let gate = SummandContext::new(params.alpha(), 1.0, params.n(), Complex64::new(r.norm_sqr(), 0.0))?.n0();
    if (params.n() as f64) <= gate {
        return Err(Error::domain(format!(
            "n = {} does not exceed the large-N threshold {gate:.3}",
            params.n()
        )));
    }
    let lam = gauge_phases(r, offsets, params);
    let sqrt_n = (params.n() as f64).sqrt();
    let mut c = Vec::with_capacity(n * n);
    let mut d = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (zi, zj) = (offsets[i], offsets[j]);
            let a = zi * zj.conj() - 0.5 * zi.norm_sqr() - 0.5 * zj.norm_sqr();
            let b = sqrt_n * (lam[i] - lam[j]);
            c.push((a + Complex64::new(0.0, b)).exp() / PI);
            d.push(a.exp() / PI);
        }
    }
    let det_c = det_scaled(&ScaledMatrix::new(n, 0.0, c)?);
    let det_d = det_scaled(&ScaledMatrix::new(n, 0.0, d)?);
    if det_d.is_zero() {
        return Err(Error::Degenerate("det D vanishes (repeated offsets?)".into()));
    }
    Ok(ScaledComplex::sum([det_c, -det_d]).ratio(&det_d).norm())
}
