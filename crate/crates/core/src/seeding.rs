//! Initializers: k-means++ (D² sampling), controlled oracle initializations,
//! and the seed-separation quantities `Ψ_r` and `ℓ(A)`.

use nalgebra::DMatrix;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::model::{random_unit, MixtureSpec};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct Seeding {
    /// K × r, row `k` is the `k`-th chosen point.
    pub centers: DMatrix<f64>,
    pub chosen_indices: Vec<usize>,
}

/// k-means++ seeding of `k` centers from the rows of `y`.
pub fn kmeanspp_seed(y: &DMatrix<f64>, k: usize, seed: u64) -> Result<Seeding> {
    kmeanspp_seed_with(y, k, &mut rng_from_seed(seed))
}

pub fn kmeanspp_seed_with<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    k: usize,
    rng: &mut R,
) -> Result<Seeding> {
    let n = y.nrows();
    if k == 0 || n < k {
        return Err(invalid("k", format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let sq = |i: usize, j: usize| -> f64 {
        (0..y.ncols()).map(|c| (y[(i, c)] - y[(j, c)]).powi(2)).sum()
    };
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = (0..n).map(|i| sq(i, first)).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroSamplingMass);
        }
        let next = sample_weighted(&d2, total, rng);
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq(i, next));
        }
    }
    let centers = DMatrix::from_fn(k, y.ncols(), |r, c| y[(chosen[r], c)]);
    Ok(Seeding {
        centers,
        chosen_indices: chosen,
    })
}

fn sample_weighted<R: Rng + ?Sized>(w: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &wi) in w.iter().enumerate() {
        if wi > 0.0 {
            acc += wi;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // Rounding left u at or past the final cumulative sum.
    last_positive
}

/// Exact distribution of the second k-means++ seed given the first.
pub fn second_seed_distribution(y: &DMatrix<f64>, first: usize) -> Result<Vec<f64>> {
    if first >= y.nrows() {
        return Err(invalid("first", "index out of range"));
    }
    let d2: Vec<f64> = (0..y.nrows())
        .map(|i| (y.row(i) - y.row(first)).norm_squared())
        .collect();
    let total: f64 = d2.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroSamplingMass);
    }
    Ok(d2.into_iter().map(|d| d / total).collect())
}

/// True iff the first two seeds carry different ground-truth labels.
pub fn seed_separation_event(chosen_indices: &[usize], labels: &[usize]) -> bool {
    match chosen_indices {
        [a, b, ..] => labels[*a] != labels[*b],
        _ => false,
    }
}

/// `Ψ_r = √2 Γ((r+1)/2) / Γ(r/2)`, the mean of a chi distribution with `r`
/// degrees of freedom.
pub fn psi_r(r: usize) -> Result<f64> {
    if r == 0 {
        return Err(invalid("r", "must be at least 1"));
    }
    let r = r as f64;
    Ok(2f64.sqrt() * (ln_gamma((r + 1.0) / 2.0) - ln_gamma(r / 2.0)).exp())
}

/// Three-term tail bound `ℓ(A)` on the seed-quality failure probability.
pub fn ell_of_a(a: f64, eps_param: f64, delta: f64, sigma: f64, r: usize, mu1_norm: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "must be positive"));
    }
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    if !(eps_param > 0.0 && eps_param < 0.5) {
        return Err(invalid("eps_param", "must lie in (0, 1/2)"));
    }
    let psi = psi_r(r)?;
    let sep = (0.5 - eps_param) * delta / sigma - psi;
    let shift = a - (psi + mu1_norm / sigma);
    Ok(2.0 * (-0.5 * sep * sep).exp()
        + 2.0 * (-0.5 * shift * shift).exp()
        + (8.0 / r as f64) * (-(1.0 - eps_param) / 2.0 * sep * sep).exp())
}

/// Default `A`: one above the smallest admissible value `‖μ₁‖/σ + Ψ_r`.
pub fn default_a(sigma: f64, r: usize, mu1_norm: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "must be positive"));
    }
    Ok(mu1_norm / sigma + psi_r(r)? + 1.0)
}

/// True centers, each moved by `offset_fraction · Δ` in an independent
/// random direction, so that `Γ₀ = offset_fraction`.
pub fn oracle_init(spec: &MixtureSpec, offset_fraction: f64, direction_seed: u64) -> Result<DMatrix<f64>> {
    if !(offset_fraction >= 0.0) || !offset_fraction.is_finite() {
        return Err(invalid("offset_fraction", "must be finite and nonnegative"));
    }
    let (delta, _) = spec.separation();
    let mut rng: SimRng = rng_from_seed(direction_seed);
    let mut centers = spec.centers().clone();
    let step = offset_fraction * delta;
    for k in 0..spec.k() {
        let u = random_unit(&mut rng, spec.dim());
        for j in 0..spec.dim() {
            centers[(k, j)] += step * u[j];
        }
    }
    Ok(centers)
}
