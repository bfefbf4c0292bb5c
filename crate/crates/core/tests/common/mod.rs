#![allow(dead_code)]

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

/// Finite double as an exact `m · 2^e`.
fn exact_parts(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let (m, e, s) = x.integer_decode();
    let m = BigInt::from(m);
    (if s < 0 { -m } else { m }, e as i64)
}

/// `(shift, significand)` with `re + i·im = significand · 2^shift`.
fn to_log2(re: &BigInt, im: &BigInt) -> (i64, Complex64) {
    let bits = re.bits().max(im.bits()) as i64;
    let shift = (bits - 62).max(0);
    let conv = |v: &BigInt| {
        let mag = (v.abs() >> shift as usize).to_u64().unwrap() as f64;
        if v.sign() == Sign::Minus {
            -mag
        } else {
            mag
        }
    };
    (shift, Complex64::new(conv(re), conv(im)))
}

/// `ln n!` from the exact integer.
pub fn ln_factorial(n: u64) -> f64 {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= k;
    }
    let (shift, sig) = to_log2(&f, &BigInt::zero());
    sig.re.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact binary pieces of `Σ_{k=0}^{n−1} x^k / k!` with `x = n z w̄`:
/// the sum equals `sig · 2^twos`.
fn truncated_exp_parts(z: Complex64, w: Complex64, n: u64) -> (i64, Complex64) {
    let parts = [
        (exact_parts(z.re), exact_parts(w.re), 1, true),
        (exact_parts(z.im), exact_parts(w.im), 1, true),
        (exact_parts(z.im), exact_parts(w.re), 1, false),
        (exact_parts(z.re), exact_parts(w.im), -1, false),
    ];
    let prods: Vec<(BigInt, i64, bool)> = parts
        .iter()
        .map(|((ma, ea), (mb, eb), sgn, real)| (ma * mb * BigInt::from(*sgn), ea + eb, *real))
        .collect();
    let emin = prods.iter().filter(|p| !p.0.is_zero()).map(|p| p.1).min().unwrap_or(0);
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    for (m, e, real) in &prods {
        if m.is_zero() {
            continue;
        }
        let v = m << ((e - emin) as usize);
        if *real {
            re += v;
        } else {
            im += v;
        }
    }
    re *= n;
    im *= n;
    let mut s = -emin;
    if s < 0 {
        re <<= (-s) as usize;
        im <<= (-s) as usize;
        s = 0;
    }
    let s = s as usize;

    // c_k = (n−1)!/k!, Horner in the integer polynomial
    let nn = n as usize;
    let mut c = vec![BigInt::one(); nn];
    for k in (0..nn - 1).rev() {
        c[k] = &c[k + 1] * (k as u64 + 1);
    }
    let mut pr = c[nn - 1].clone();
    let mut pi = BigInt::zero();
    for k in (0..nn - 1).rev() {
        let nr = &pr * &re - &pi * &im;
        let ni = &pr * &im + &pi * &re;
        pr = nr + (&c[k] << (s * (nn - 1 - k)));
        pi = ni;
    }
    let (shift_p, sig_p) = to_log2(&pr, &pi);
    let (shift_f, sig_f) = to_log2(&c[0], &BigInt::zero());
    (shift_p - shift_f - (s * (nn - 1)) as i64, sig_p / sig_f.re)
}

/// `Σ_{k=0}^{n−1} x^k / k!` for `x = n z w̄`, summed in exact integer
/// arithmetic. Returns `(ln |sum|, arg sum)`.
pub fn truncated_exp_exact(z: Complex64, w: Complex64, n: u64) -> (f64, f64) {
    let (twos, q) = truncated_exp_parts(z, w, n);
    (q.norm().ln() + twos as f64 * std::f64::consts::LN_2, q.arg())
}

/// `ln K + i arg K` of the α = 2 kernel
/// `(n/π) e^{−n(|z|²+|w|²)/2} Σ_{k<n} (n z w̄)^k / k!`, returned as
/// `(integer part, remainder, phase)` so huge logs keep full accuracy.
pub fn alpha2_kernel_split(z: Complex64, w: Complex64, n: u64) -> (f64, f64, f64) {
    const LN2_HI: f64 = std::f64::consts::LN_2;
    const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;
    let (twos, q) = truncated_exp_parts(z, w, n);

    // Q = n(|z|² + |w|²)/2 exactly, split into integer and fraction
    let sq: Vec<(BigInt, i64)> = [z.re, z.im, w.re, w.im]
        .iter()
        .map(|&v| {
            let (m, e) = exact_parts(v);
            (&m * &m, 2 * e)
        })
        .filter(|(m, _)| !m.is_zero())
        .collect();
    let (q_int, q_frac) = if sq.is_empty() {
        (0.0, 0.0)
    } else {
        let emin = sq.iter().map(|p| p.1).min().unwrap();
        let mut m = BigInt::zero();
        for (v, e) in &sq {
            m += v << ((e - emin) as usize);
        }
        m *= n;
        // the factor 1/2
        let emin = emin - 1;
        if emin >= 0 {
            ((m << emin as usize).to_f64().unwrap(), 0.0)
        } else {
            let sh = (-emin) as usize;
            let ip = &m >> sh;
            let rem = &m - (&ip << sh);
            let (rs, rsig) = to_log2(&rem, &BigInt::zero());
            (ip.to_f64().unwrap(), rsig.re * 2f64.powi((rs - sh as i64) as i32))
        }
    };
    let t = twos as f64;
    let p = t * LN2_HI;
    let p_err = t.mul_add(LN2_HI, -p);
    let head = p - q_int;
    let int = head.round();
    let frac = (head - int) + (p_err + t * LN2_LO - q_frac + q.norm().ln() + (n as f64 / std::f64::consts::PI).ln());
    (int, frac, q.arg())
}

/// Relative difference between `exp(log_scale) · sig` and a split oracle value.
pub fn rel_diff_split(log_scale: f64, sig: Complex64, oracle: (f64, f64, f64)) -> f64 {
    let d = (log_scale - oracle.0) + (sig.norm().ln() - oracle.1);
    let q = Complex64::from_polar(d.exp(), sig.arg() - oracle.2);
    (q - 1.0).norm()
}

/// `Σ |x^k / k!| / |Σ x^k / k!|`, the condition number of the truncated sum.
pub fn truncated_exp_condition(z: Complex64, w: Complex64, n: u64) -> f64 {
    let zz = Complex64::new(z.norm(), 0.0);
    let ww = Complex64::new(w.norm(), 0.0);
    let (abs_sum, _) = truncated_exp_exact(zz, ww, n);
    let (val, _) = truncated_exp_exact(z, w, n);
    (abs_sum - val).exp()
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..n {
        let minor: Vec<Vec<Complex64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| *v).collect())
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][col] * cofactor_det(&minor) * sign;
    }
    total
}

/// Euler's constant from `H_n − ln n` with the tail series at `n = 10^4`.
pub fn euler_gamma_oracle() -> f64 {
    let n = 10_000.0f64;
    let h: f64 = (1..=10_000).rev().map(|k| 1.0 / k as f64).sum();
    h - n.ln() - 1.0 / (2.0 * n) + 1.0 / (12.0 * n * n) - 1.0 / (120.0 * n.powi(4))
}

/// `ψ(k) = H_{k−1} − γ`.
pub fn digamma_integer(k: u64, gamma: f64) -> f64 {
    (1..k).rev().map(|j| 1.0 / j as f64).sum::<f64>() - gamma
}

/// Relative difference of two values given as `(ln|a|, arg a)` pairs.
pub fn rel_diff_log_polar(a: (f64, f64), b: (f64, f64)) -> f64 {
    let q = Complex64::from_polar((a.0 - b.0).exp(), a.1 - b.1);
    (q - 1.0).norm()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
