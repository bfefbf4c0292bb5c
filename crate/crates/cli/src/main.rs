//! `nk`: batch studies of the radial normal-matrix kernel.
//!
//! Data goes to stdout (CSV or JSON), diagnostics to stderr under `NK_LOG`.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use nk_core::asymptotic::{asymptotic_kernel, density_limit, error_ratio, gamma_for, loglog_slope};
use nk_core::correlations::{gauge_check, scaling_limit_check};
use nk_core::euler_maclaurin::em_decompose;
use nk_core::kernel_exact::{density_exact, kernel};
use nk_core::radial_sampler::{empirical_radial_density, sample_radii};
use nk_core::saddle::{find_xstar, xstar_asymptotic, SummandContext};
use nk_core::specfun::digamma;
use nk_core::taylor_a2::sector_radius;
use nk_core::{KernelParams, ScaledComplex};

#[derive(Parser)]
#[command(name = "nk", version, about = "Exact and asymptotic kernels of radial normal matrix ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Ensemble {
    /// Potential exponent α in V(z) = |z|^α.
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Matrix size N.
    #[arg(long)]
    n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Exact (or asymptotic) kernel K_N(Z/N^γ, W/N^γ) as JSON.
    Kernel {
        #[command(flatten)]
        ens: Ensemble,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        delta: f64,
        /// RE,IM
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        /// RE,IM
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        w: Complex64,
        #[arg(long)]
        asymptotic: bool,
    },
    /// Exact and limiting density at P radii rmax·i/P, i = 1..P, as CSV.
    Density {
        #[command(flatten)]
        ens: Ensemble,
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        points: usize,
    },
    /// |E_N| at ζ = Z W̄ over a list of N, as CSV with a JSON slope footer.
    ErrorScaling {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        zeta: Complex64,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        delta: f64,
    },
    /// Scaled n-point function against its limit, plus the gauge residual.
    Correlate {
        #[command(flatten)]
        ens: Ensemble,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        r: Complex64,
        /// RE,IM;RE,IM;...
        #[arg(long, value_parser = parse_offsets, allow_hyphen_values = true)]
        offsets: Offsets,
    },
    /// Maximizer of the summand: root of the digamma equation and its expansion.
    Xstar {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        zeta_abs: f64,
        #[arg(long)]
        n: usize,
    },
    /// Normalized Euler–Maclaurin remainders of the summand sum.
    Em {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        zeta: Complex64,
        #[arg(long)]
        n: usize,
    },
    /// Pooled radial histogram of T exact samples (seeds S, S+1, ...), as CSV.
    Sample {
        #[command(flatten)]
        ens: Ensemble,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        bins: usize,
    },
    /// Sector radius K(a, τ) at τ = 2π i/S, i = 0..S, as CSV.
    Kcurve {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        tau_steps: usize,
    },
}

#[derive(Clone)]
struct Offsets(Vec<Complex64>);

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn parse_offsets(s: &str) -> Result<Offsets, String> {
    let v = s
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("no offsets given".into());
    }
    Ok(Offsets(v))
}

/// 17 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt(x).parse().expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

fn cnum(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

/// Plain value with `log_scale` 0 when it is a normal double, else the scaled form.
fn scaled_json(v: &ScaledComplex) -> Value {
    match v.try_to_complex() {
        Ok(c) if v.is_zero() || c.norm() >= f64::MIN_POSITIVE => {
            json!({ "log_scale": num(0.0), "re": num(c.re), "im": num(c.im) })
        }
        _ => json!({
            "log_scale": num(v.log_scale()),
            "re": num(v.significand().re),
            "im": num(v.significand().im),
        }),
    }
}

enum Failure {
    Core(nk_core::Error),
    Io(String),
}

impl From<nk_core::Error> for Failure {
    fn from(e: nk_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Out = Result<(), Failure>;

fn print_json(v: &Value) -> Out {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, v).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer() -> csv::Writer<io::StdoutLock<'static>> {
    csv::Writer::from_writer(io::stdout().lock())
}

fn run_kernel(ens: &Ensemble, delta: f64, z: Complex64, w: Complex64, asymptotic: bool) -> Out {
    let p = KernelParams::new(ens.alpha, ens.n)?;
    info!("kernel: alpha = {}, n = {}, delta = {delta}, asymptotic = {asymptotic}", ens.alpha, ens.n);
    let v = if asymptotic {
        asymptotic_kernel(z, w, &p, delta)?
    } else {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(nk_core::Error::Domain(format!("delta must lie in (0, 1], got {delta}")).into());
        }
        let s = (ens.n as f64).powf(-gamma_for(ens.alpha, delta));
        kernel(z * s, w * s, &p)?
    };
    print_json(&scaled_json(&v))
}

fn run_density(ens: &Ensemble, rmax: f64, points: usize) -> Out {
    let p = KernelParams::new(ens.alpha, ens.n)?;
    if !(rmax > 0.0 && rmax.is_finite()) || points == 0 {
        return Err(nk_core::Error::Domain("need rmax > 0 and at least one point".into()).into());
    }
    let rows: Vec<(f64, f64, f64)> = (1..=points)
        .into_par_iter()
        .map(|i| {
            let r = rmax * i as f64 / points as f64;
            let z = Complex64::new(r, 0.0);
            Ok((r, density_exact(z, &p)?, density_limit(z, ens.alpha)?))
        })
        .collect::<Result<_, nk_core::Error>>()?;
    let mut wtr = csv_writer();
    wtr.write_record(["r", "exact_density", "limit_density"])?;
    for (r, e, l) in rows {
        wtr.write_record([fmt(r), fmt(e), fmt(l)])?;
    }
    wtr.flush()?;
    Ok(())
}

fn run_error_scaling(alpha: f64, zeta: Complex64, n_list: &[usize], delta: f64) -> Out {
    if n_list.is_empty() {
        return Err(nk_core::Error::Domain("empty --n-list".into()).into());
    }
    // Z = √ζ, W = conj(√ζ) so that Z W̄ = ζ
    let root = zeta.sqrt();
    let errs: Vec<f64> = n_list
        .par_iter()
        .map(|&n| {
            let p = KernelParams::new(alpha, n)?;
            let e = error_ratio(root, root.conj(), &p, delta)?.norm();
            debug!("N = {n}: |E| = {e:e}");
            Ok(e)
        })
        .collect::<Result<_, nk_core::Error>>()?;
    let ns: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let slope = if n_list.len() >= 2 { loglog_slope(&ns, &errs) } else { f64::NAN };
    {
        let mut wtr = csv_writer();
        wtr.write_record(["N", "abs_E"])?;
        for (n, e) in n_list.iter().zip(&errs) {
            wtr.write_record([n.to_string(), fmt(*e)])?;
        }
        wtr.flush()?;
    }
    print_json(&json!({ "slope": num(slope) }))
}

fn run_correlate(ens: &Ensemble, r: Complex64, offsets: &[Complex64]) -> Out {
    let p = KernelParams::new(ens.alpha, ens.n)?;
    let lim = scaling_limit_check(r, offsets, &p)?;
    let gauge = gauge_check(r, offsets, &p)?;
    print_json(&json!({
        "measured": num(lim.measured),
        "predicted": num(lim.predicted),
        "gauge_residual": num(gauge),
    }))
}

fn run_xstar(alpha: f64, delta: f64, zeta_abs: f64, n: usize) -> Out {
    let ctx = SummandContext::new(alpha, delta, n, Complex64::new(zeta_abs, 0.0))?;
    let x = find_xstar(&ctx)?;
    let residual = (ctx.log_base() - 2.0 / alpha * digamma(2.0 * x / alpha)?).abs();
    print_json(&json!({
        "xstar_root": num(x),
        "xstar_asymptotic": num(xstar_asymptotic(&ctx)),
        "residual": num(residual),
    }))
}

fn run_em(alpha: f64, delta: f64, zeta: Complex64, n: usize) -> Out {
    let ctx = SummandContext::new(alpha, delta, n, zeta)?;
    let em = em_decompose(&ctx)?;
    print_json(&json!({
        "r1_hat": cnum(em.r1_hat),
        "r2_hat": cnum(em.r2_hat),
        "recombination_residual": num(em.residual),
    }))
}

fn run_sample(ens: &Ensemble, trials: u64, seed: u64, bins: usize) -> Out {
    let p = KernelParams::new(ens.alpha, ens.n)?;
    if trials == 0 {
        return Err(nk_core::Error::Domain("need at least one trial".into()).into());
    }
    let pool: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|t| sample_radii(&p, seed.wrapping_add(t)))
        .collect();
    let h = empirical_radial_density(&pool, bins)?;
    let mut wtr = csv_writer();
    wtr.write_record(["r_lo", "r_hi", "count", "predicted"])?;
    for i in 0..bins {
        wtr.write_record([fmt(h.edges[i]), fmt(h.edges[i + 1]), h.counts[i].to_string(), fmt(h.predicted[i])])?;
    }
    wtr.flush()?;
    Ok(())
}

fn run_kcurve(a: f64, steps: usize) -> Out {
    if steps == 0 {
        return Err(nk_core::Error::Domain("need at least one tau step".into()).into());
    }
    let mut wtr = csv_writer();
    wtr.write_record(["tau", "K"])?;
    for i in 0..=steps {
        let tau = if i == steps { 2.0 * PI } else { 2.0 * PI * i as f64 / steps as f64 };
        wtr.write_record([fmt(tau), fmt(sector_radius(a, tau)?)])?;
    }
    wtr.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .parse_filters(&std::env::var("NK_LOG").unwrap_or_else(|_| "off".into()))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Kernel {
            ens,
            delta,
            z,
            w,
            asymptotic,
        } => run_kernel(ens, *delta, *z, *w, *asymptotic),
        Command::Density { ens, rmax, points } => run_density(ens, *rmax, *points),
        Command::ErrorScaling {
            alpha,
            zeta,
            n_list,
            delta,
        } => run_error_scaling(*alpha, *zeta, n_list, *delta),
        Command::Correlate { ens, r, offsets } => run_correlate(ens, *r, &offsets.0),
        Command::Xstar {
            alpha,
            delta,
            zeta_abs,
            n,
        } => run_xstar(*alpha, *delta, *zeta_abs, *n),
        Command::Em { alpha, delta, zeta, n } => run_em(*alpha, *delta, *zeta, *n),
        Command::Sample {
            ens,
            trials,
            seed,
            bins,
        } => run_sample(ens, *trials, *seed, *bins),
        Command::Kcurve { a, tau_steps } => run_kcurve(*a, *tau_steps),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("nk: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("nk: output error: {e}");
            ExitCode::from(1)
        }
    }
}
