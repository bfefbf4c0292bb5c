//! First-order Euler–Maclaurin split of the summand sum and the trapezoid
//! error bounds for convex and concave functions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_complex, QuadConfig};
use crate::saddle::{direct_sum, find_xstar, g_eval, SummandContext};
use crate::specfun::{log_gamma, ScaledComplex};

/// Equally spaced partition `a = x_0 < … < x_K = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSpec {
    a: f64,
    b: f64,
    k: usize,
}

impl PartitionSpec {
    pub fn new(a: f64, b: f64, k: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain(format!("partition needs a < b, got [{a}, {b}]")));
        }
        if k == 0 {
            return Err(Error::domain("partition needs at least one subinterval"));
        }
        Ok(PartitionSpec { a, b, k })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.k as f64
    }

    /// `x_j = a + jΔ`; the last node is `b` itself.
    pub fn node(&self, j: usize) -> f64 {
        if j == self.k {
            self.b
        } else {
            self.a + j as f64 * self.spacing()
        }
    }
}

fn sub_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-14,
        max_intervals: 500,
    }
}

fn sub_integrals<F: Fn(f64) -> f64>(f: &F, p: &PartitionSpec) -> Result<Vec<f64>> {
    let cfg = sub_cfg();
    (0..p.k)
        .map(|j| Ok(integrate(f, p.node(j), p.node(j + 1), &cfg)?.value))
        .collect()
}

/// `Σ(f; P) = Σ_j (∫_{x_j}^{x_{j+1}} f − (f(x_j) + f(x_{j+1}))Δ/2)`.
pub fn trapezoid_error<F: Fn(f64) -> f64>(f: F, p: &PartitionSpec) -> Result<f64> {
    let ints = sub_integrals(&f, p)?;
    let d = p.spacing();
    Ok(ints
        .iter()
        .enumerate()
        .map(|(j, i)| i - 0.5 * (f(p.node(j)) + f(p.node(j + 1))) * d)
        .sum())
}

/// Bounds on `Σ(f; P)` plus the two mean-value points they use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapezoidBound {
    pub lower: f64,
    pub upper: f64,
    pub t_first: f64,
    pub t_last: f64,
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    // endpoints can beat the interior for monotone f
    [lo, hi, 0.5 * (lo + hi)]
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, x| {
            let v = f(x);
            if v < best.1 {
                (x, v)
            } else {
                best
            }
        })
        .0
}

fn bisect_level<F: Fn(f64) -> f64>(f: &F, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) - level and f(hi) - level have opposite signs
    let s_lo = f(lo) - level >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) - level >= 0.0) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Leftmost `t ∈ [lo, hi]` with `f(t) = level`, for convex `f`.
fn mean_value_point<F: Fn(f64) -> f64>(f: &F, level: f64, lo: f64, hi: f64) -> Result<f64> {
    let scale = level.abs().max(f(lo).abs()).max(f(hi).abs()).max(1e-300);
    let tol = 1e-12 * scale;
    if (f(lo) - level).abs() <= tol {
        return Ok(lo);
    }
    let tmin = golden_min(f, lo, hi);
    let fmin = f(tmin);
    if fmin > level + tol {
        return Err(Error::Contract(format!(
            "no mean-value point on [{lo}, {hi}]: minimum {fmin} exceeds mean {level} (f not convex?)"
        )));
    }
    if f(lo) > level {
        return Ok(bisect_level(f, level, lo, tmin));
    }
    if f(hi) >= level {
        return Ok(bisect_level(f, level, tmin, hi));
    }
    if (fmin - level).abs() <= tol {
        return Ok(tmin);
    }
    Err(Error::Contract(format!(
        "no mean-value point on [{lo}, {hi}] for mean {level} (f not convex?)"
    )))
}

/// Bound `0 ≥ Σ(f; P) ≥ −Δ(f(x_1) − f(t_0) + f(x_K) − f(t_{K−1}))/2` for convex `f`,
/// where `t_j` is the leftmost mean-value point of subinterval `j`.
///
/// The lower bound relies on the telescoping of the proof and holds for
/// non-decreasing convex `f`; on a decreasing branch it can exceed `Σ`.
pub fn convex_error_bound<F: Fn(f64) -> f64>(f: F, p: &PartitionSpec) -> Result<TrapezoidBound> {
    let d = p.spacing();
    let cfg = sub_cfg();
    let last = p.k - 1;
    let i0 = integrate(&f, p.node(0), p.node(1), &cfg)?.value;
    let t0 = mean_value_point(&f, i0 / d, p.node(0), p.node(1))?;
    let t_last = if last == 0 {
        t0
    } else {
        let il = integrate(&f, p.node(last), p.node(p.k), &cfg)?.value;
        mean_value_point(&f, il / d, p.node(last), p.node(p.k))?
    };
    let lower = -0.5 * d * (f(p.node(1)) - f(t0) + f(p.node(p.k)) - f(t_last));
    Ok(TrapezoidBound {
        lower,
        upper: 0.0,
        t_first: t0,
        t_last,
    })
}

/// Mirror of [`convex_error_bound`] for concave `f`: `0 ≤ Σ ≤ upper`.
pub fn concave_error_bound<F: Fn(f64) -> f64>(f: F, p: &PartitionSpec) -> Result<TrapezoidBound> {
    let b = convex_error_bound(|x| -f(x), p)?;
    Ok(TrapezoidBound {
        lower: 0.0,
        upper: -b.lower,
        t_first: b.t_first,
        t_last: b.t_last,
    })
}

/// Pieces of `S_N = ∫_1^N g_ζ + r₁ + r₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmDecomposition {
    pub integral: ScaledComplex,
    /// `(g(1) + g(N)) / 2`
    pub r1: ScaledComplex,
    /// `Σ_{j=1}^{N−1} ((g(j) + g(j+1))/2 − ∫_j^{j+1} g)`
    pub r2: ScaledComplex,
    pub r1_hat: Complex64,
    pub r2_hat: Complex64,
    pub direct_sum: ScaledComplex,
    /// `|integral + r1 + r2 − S_N| / |S_N|`
    pub residual: f64,
}

/// Relative tolerance of the recombination identity.
pub const EM_RECOMBINATION_TOL: f64 = 1e-9;

/// Euler–Maclaurin decomposition with `p = 1`.
///
/// `N^δ ∫_{N^{−δ}}^{N^{1−δ}} g_ζ(N^δ y) dy` is computed as `∫_1^N g_ζ(x) dx`,
/// one unit interval at a time with `g` at the midpoint factored out.
pub fn em_decompose(ctx: &SummandContext) -> Result<EmDecomposition> {
    let xstar = find_xstar(ctx)?;
    let n = ctx.n;
    let log_base = ctx.log_base();
    let phase = ctx.zeta.arg();
    let two_over_a = 2.0 / ctx.alpha;
    // lnΓ differences near x ~ N limit the profile to about 1e-13
    let cfg = QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 200,
    };

    let mut pieces = Vec::with_capacity(n.saturating_sub(1));
    let mut trap_err = Vec::with_capacity(n.saturating_sub(1));
    for j in 1..n {
        let m = j as f64 + 0.5;
        let lg_m = log_gamma(two_over_a * m)?;
        let mut failed = None;
        // g(j + t) / g(m)
        let mut profile = |t: f64| {
            let s = t - 0.5;
            match log_gamma(two_over_a * (m + s)) {
                Ok(lg) => Complex64::from_polar((s * log_base - (lg - lg_m)).exp(), s * phase),
                Err(e) => {
                    failed = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let ends = 0.5 * (profile(0.0) + profile(1.0));
        let q = integrate_complex(&mut profile, 0.0, 1.0, &cfg)?;
        if let Some(e) = failed {
            return Err(e);
        }
        let g_m = g_eval(m, ctx)?;
        pieces.push(g_m.scale_by(q.value));
        trap_err.push(g_m.scale_by(ends - q.value));
    }
    let integral = ScaledComplex::sum(pieces);
    let r2 = ScaledComplex::sum(trap_err);
    let r1 = ScaledComplex::sum([g_eval(1.0, ctx)?, g_eval(n as f64, ctx)?]).scale_by_exp(-std::f64::consts::LN_2);

    let direct = direct_sum(ctx)?;
    let recombined = ScaledComplex::sum([integral, r1, r2]);
    let residual = ScaledComplex::sum([recombined, -direct]).ratio(&direct).norm();
    if residual.is_nan() || residual > EM_RECOMBINATION_TOL {
        return Err(Error::Consistency {
            what: "Euler-Maclaurin recombination".into(),
            residual,
        });
    }

    let m = SummandContext {
        zeta: Complex64::new(ctx.zeta.norm(), 0.0),
        ..*ctx
    };
    let norm = g_eval(xstar, &m)?.scale_by_exp(0.5 * ctx.delta * (n as f64).ln());
    Ok(EmDecomposition {
        integral,
        r1,
        r2,
        r1_hat: r1.ratio(&norm),
        r2_hat: r2.ratio(&norm),
        direct_sum: direct,
        residual,
    })
}
