//! Exact sampling of the eigenvalue moduli.
//!
//! For a radial weight the set of moduli has the law of independent
//! `R_j`, `j = 1..N`, with density `∝ r^{2j−1} e^{−N r^α}`, i.e.
//! `R_j = G_j^{1/α}` with `G_j ~ Gamma(shape 2j/α, rate N)`.
//! Only radii are produced: the identity says nothing about the angles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::kernel_exact::KernelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSample {
    pub radii: Vec<f64>,
    pub seed: u64,
    pub params: KernelParams,
}

/// One draw of the `N` moduli; `radii[j-1]` is `R_j`.
pub fn sample_radii(params: &KernelParams, seed: u64) -> RadialSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = params.alpha();
    let n = params.n() as f64;
    let radii = (1..=params.n())
        .map(|j| {
            // shape and scale are positive and finite for valid params
            let g = Gamma::new(2.0 * j as f64 / a, 1.0 / n).expect("valid gamma parameters");
            g.sample(&mut rng).powf(1.0 / a)
        })
        .collect();
    RadialSample {
        radii,
        seed,
        params: *params,
    }
}

/// Limiting radial CDF `(α/2) r^α`, capped at one at the support edge.
pub fn limit_radial_cdf(r: f64, alpha: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        (0.5 * alpha * r.powf(alpha)).min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub predicted: Vec<f64>,
}

fn pool_params(pool: &[RadialSample]) -> Result<KernelParams> {
    let first = pool.first().ok_or_else(|| Error::domain("empty sample pool"))?;
    if pool.iter().any(|s| s.params != first.params) {
        return Err(Error::domain("pooled samples have different parameters"));
    }
    Ok(first.params)
}

/// Equal-width histogram of all pooled radii over `[0, 1.2 (2/α)^{1/α}]`.
///
/// Predicted counts integrate the radial marginal `(N α²/2) r^{α−1}` per bin,
/// so they vanish beyond the edge. Radii past the last edge are not counted.
pub fn empirical_radial_density(pool: &[RadialSample], bins: usize) -> Result<RadialHistogram> {
    if bins < 4 {
        return Err(Error::domain(format!("need at least 4 bins, got {bins}")));
    }
    let params = pool_params(pool)?;
    let a = params.alpha();
    let edge = params.support_radius();
    let top = 1.2 * edge;
    let width = top / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { top } else { i as f64 * width }).collect();
    let mut counts = vec![0u64; bins];
    for r in pool.iter().flat_map(|s| s.radii.iter()) {
        if *r < top {
            let i = ((r / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    let total = pool.len() as f64 * params.n() as f64;
    let predicted = edges
        .windows(2)
        .map(|w| total * (limit_radial_cdf(w[1], a) - limit_radial_cdf(w[0], a)))
        .collect();
    Ok(RadialHistogram {
        edges,
        counts,
        predicted,
    })
}

/// Kolmogorov–Smirnov distance between the pooled radii and [`limit_radial_cdf`].
pub fn ks_distance_to_limit(pool: &[RadialSample]) -> Result<f64> {
    let params = pool_params(pool)?;
    let mut all: Vec<f64> = pool.iter().flat_map(|s| s.radii.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let m = all.len() as f64;
    Ok(all.iter().enumerate().fold(0.0f64, |d, (i, &r)| {
        let f = limit_radial_cdf(r, params.alpha());
        d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
    }))
}

/// Mean number of radii below `r` per sample.
pub fn mean_count_below(pool: &[RadialSample], r: f64) -> Result<f64> {
    pool_params(pool)?;
    let c = pool.iter().flat_map(|s| s.radii.iter()).filter(|&&x| x < r).count();
    Ok(c as f64 / pool.len() as f64)
}
