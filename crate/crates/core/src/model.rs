//! Ground-truth clustering template: a K-component sub-Gaussian mixture
//! observed through a bounded perturbation, plus the scalar functionals that
//! drive the misclustering bounds (Δ, M, α, ρ_σ, ρ_ε).

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Zero-mean noise family added to each center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    /// `N(0, σ² I_r)`.
    IsotropicGaussian,
    /// Independent coordinates uniform on `[-σ√3, σ√3]` (variance σ²).
    BoundedUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub family: NoiseFamily,
    pub sigma: f64,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            family: NoiseFamily::IsotropicGaussian,
            sigma,
        }
    }

    pub fn uniform(sigma: f64) -> Self {
        Self {
            family: NoiseFamily::BoundedUniform,
            sigma,
        }
    }

    fn fill_row<R: Rng + ?Sized>(&self, rng: &mut R, row: &mut [f64]) {
        if self.sigma == 0.0 {
            row.fill(0.0);
            return;
        }
        match self.family {
            NoiseFamily::IsotropicGaussian => {
                for x in row.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *x = self.sigma * z;
                }
            }
            NoiseFamily::BoundedUniform => {
                let half = self.sigma * 3.0_f64.sqrt();
                let u = Uniform::new_inclusive(-half, half).expect("sigma > 0");
                for x in row.iter_mut() {
                    *x = u.sample(rng);
                }
            }
        }
    }
}

/// K-component mixture: weights `p_k`, centers `μ_k` (rows of a K×r matrix)
/// and a shared noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixtureSpec", into = "RawMixtureSpec")]
pub struct MixtureSpec {
    weights: Vec<f64>,
    centers: DMatrix<f64>,
    noise: NoiseModel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixtureSpec {
    weights: Vec<f64>,
    centers: Vec<Vec<f64>>,
    noise: NoiseModel,
}

impl TryFrom<RawMixtureSpec> for MixtureSpec {
    type Error = Error;

    fn try_from(raw: RawMixtureSpec) -> Result<Self> {
        let r = raw.centers.first().map_or(0, Vec::len);
        if raw.centers.iter().any(|c| c.len() != r) {
            return Err(invalid("centers", "all centers must have the same length"));
        }
        let flat: Vec<f64> = raw.centers.iter().flatten().copied().collect();
        let centers = DMatrix::from_row_slice(raw.centers.len(), r, &flat);
        MixtureSpec::new(raw.weights, centers, raw.noise)
    }
}

impl From<MixtureSpec> for RawMixtureSpec {
    fn from(spec: MixtureSpec) -> Self {
        RawMixtureSpec {
            centers: spec
                .centers
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            weights: spec.weights,
            noise: spec.noise,
        }
    }
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, centers: DMatrix<f64>, noise: NoiseModel) -> Result<Self> {
        let k = centers.nrows();
        if k < 2 {
            return Err(invalid("centers", format!("need K >= 2 components, got {k}")));
        }
        if centers.ncols() == 0 {
            return Err(invalid("centers", "dimension r must be at least 1"));
        }
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if weights.len() != k {
            return Err(invalid(
                "weights",
                format!("expected {k} weights, got {}", weights.len()),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(invalid("weights", "every weight must be strictly positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid("weights", format!("weights sum to {total}, not 1")));
        }
        if !(noise.sigma >= 0.0) || !noise.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be finite and >= 0, got {}", noise.sigma)));
        }
        Ok(Self {
            weights,
            centers,
            noise,
        })
    }

    /// Equal weights `1/K`.
    pub fn balanced(centers: DMatrix<f64>, noise: NoiseModel) -> Result<Self> {
        let k = centers.nrows();
        Self::new(vec![1.0 / k as f64; k], centers, noise)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("mixture spec serializes")
    }

    pub fn k(&self) -> usize {
        self.centers.nrows()
    }

    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn sigma(&self) -> f64 {
        self.noise.sigma
    }

    /// Minimal and maximal pairwise center distance `(Δ, M)`.
    pub fn separation(&self) -> (f64, f64) {
        center_separation(&self.centers)
    }
}

/// `(Δ, M)`: minimal and maximal distance between distinct center rows.
pub fn center_separation(centers: &DMatrix<f64>) -> (f64, f64) {
    let k = centers.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for a in 0..k {
        for b in (a + 1)..k {
            let d = (centers.row(a) - centers.row(b)).norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (lo, hi)
}

/// Clean and perturbed draws with their ground truth.
///
/// Rows satisfy `clean = centers[labels] + noise` and
/// `observed = clean + perturbation`, with every perturbation row of norm at
/// most `eps_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    clean: DMatrix<f64>,
    observed: DMatrix<f64>,
    labels: Vec<usize>,
    noise: DMatrix<f64>,
    perturbation: DMatrix<f64>,
    eps_bound: f64,
    centers: DMatrix<f64>,
    sigma: f64,
    seed: u64,
    perturbation_seed: Option<u64>,
}

impl LabeledSample {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.observed.ncols()
    }

    pub fn k(&self) -> usize {
        self.centers.nrows()
    }

    pub fn clean(&self) -> &DMatrix<f64> {
        &self.clean
    }

    pub fn observed(&self) -> &DMatrix<f64> {
        &self.observed
    }

    /// Zero-based component labels.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sub_gaussian_noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    pub fn perturbation(&self) -> &DMatrix<f64> {
        &self.perturbation
    }

    pub fn eps_bound(&self) -> f64 {
        self.eps_bound
    }

    /// Population centers the sample was drawn around.
    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Writes observed rows as CSV with header `x_1,..,x_r,label`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x_{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, label) in self.observed.row_iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sidecar metadata (TOML): seed, σ, ε.
    pub fn metadata_toml(&self) -> String {
        let mut s = String::new();
        writeln!(s, "seed = {}", self.seed).unwrap();
        if let Some(p) = self.perturbation_seed {
            writeln!(s, "perturbation_seed = {p}").unwrap();
        }
        writeln!(s, "sigma = {:?}", self.sigma).unwrap();
        writeln!(s, "eps = {:?}", self.eps_bound).unwrap();
        writeln!(s, "n = {}", self.n()).unwrap();
        writeln!(s, "k = {}", self.k()).unwrap();
        s
    }

    /// Writes `path` (CSV) and `path` with extension `meta.toml`.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)?;
        std::fs::write(path.with_extension("meta.toml"), self.metadata_toml())?;
        Ok(())
    }
}

/// Draws `n` labeled points from `spec`; the perturbation is zero.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, seed: u64) -> Result<LabeledSample> {
    let k = spec.k();
    if n < k {
        return Err(invalid("n", format!("need n >= K = {k}, got {n}")));
    }
    let r = spec.dim();
    let mut rng = rng_from_seed(seed);
    let picker = WeightedIndex::new(spec.weights()).map_err(|e| invalid("weights", e.to_string()))?;
    let labels: Vec<usize> = (0..n).map(|_| picker.sample(&mut rng)).collect();

    let mut noise = DMatrix::zeros(n, r);
    let mut buf = vec![0.0; r];
    for i in 0..n {
        spec.noise.fill_row(&mut rng, &mut buf);
        for (j, v) in buf.iter().enumerate() {
            noise[(i, j)] = *v;
        }
    }
    let mut clean = DMatrix::zeros(n, r);
    for (i, &z) in labels.iter().enumerate() {
        for j in 0..r {
            clean[(i, j)] = spec.centers[(z, j)] + noise[(i, j)];
        }
    }
    Ok(LabeledSample {
        observed: clean.clone(),
        clean,
        labels,
        noise,
        perturbation: DMatrix::zeros(n, r),
        eps_bound: 0.0,
        centers: spec.centers.clone(),
        sigma: spec.sigma(),
        seed,
        perturbation_seed: None,
    })
}

/// How the bounded perturbation rows `e_i` are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMechanism {
    /// Independent uniform directions, norms uniform on `[0, ε]`.
    SphericalRandom,
    /// Each point pushed by ε toward its nearest wrong center.
    AdversarialTowardWrongCenter,
    /// One random unit direction scaled by ε, shared by every row.
    SharedDirection,
}

pub(crate) fn random_unit<R: Rng + ?Sized>(rng: &mut R, r: usize) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(r, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Shrinks `v` until its norm does not exceed `bound` in floating point.
fn clamp_norm(mut v: DVector<f64>, bound: f64) -> DVector<f64> {
    while v.norm() > bound {
        v *= 1.0 - f64::EPSILON;
    }
    v
}

/// Replaces the perturbation of `sample` with one of norm at most `eps` per row.
pub fn apply_perturbation(
    sample: &LabeledSample,
    eps: f64,
    mechanism: PerturbationMechanism,
    seed: u64,
) -> Result<LabeledSample> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(invalid("eps", format!("must be finite and >= 0, got {eps}")));
    }
    let n = sample.n();
    let r = sample.dim();
    let mut rng = rng_from_seed(seed);
    let mut pert = DMatrix::zeros(n, r);
    if eps > 0.0 {
        match mechanism {
            PerturbationMechanism::SphericalRandom => {
                let radius = Uniform::new_inclusive(0.0, eps).expect("eps > 0");
                for i in 0..n {
                    let u = random_unit(&mut rng, r);
                    let e = clamp_norm(u * radius.sample(&mut rng), eps);
                    pert.set_row(i, &e.transpose());
                }
            }
            PerturbationMechanism::SharedDirection => {
                let e = clamp_norm(random_unit(&mut rng, r) * eps, eps);
                for i in 0..n {
                    pert.set_row(i, &e.transpose());
                }
            }
            PerturbationMechanism::AdversarialTowardWrongCenter => {
                let centers = &sample.centers;
                for i in 0..n {
                    let y = sample.clean.row(i);
                    let own = sample.labels[i];
                    let target = (0..centers.nrows())
                        .filter(|&k| k != own)
                        .min_by(|&a, &b| {
                            let da = (centers.row(a) - y).norm_squared();
                            let db = (centers.row(b) - y).norm_squared();
                            da.total_cmp(&db)
                        })
                        .expect("K >= 2");
                    let dir = (centers.row(target) - y).transpose();
                    let norm = dir.norm();
                    if norm > 0.0 {
                        let e = clamp_norm(dir * (eps / norm), eps);
                        pert.set_row(i, &e.transpose());
                    }
                }
            }
        }
    }
    let observed = &sample.clean + &pert;
    Ok(LabeledSample {
        observed,
        perturbation: pert,
        eps_bound: eps,
        perturbation_seed: Some(seed),
        ..sample.clone()
    })
}

/// Δ, M, α, ρ_σ and ρ_ε for a labeled sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFunctionals {
    pub delta: f64,
    pub m_max: f64,
    pub alpha: f64,
    pub rho_sigma: f64,
    pub rho_eps: f64,
}

/// Computes the functionals from centers, noise scale, labels and ε.
///
/// `ρ_σ = (Δ/σ)·sqrt(α / (1 + K r / n))` and `ρ_ε = √α Δ / ε`, each `+∞`
/// when its denominator scale is zero.
pub fn model_functionals(
    centers: &DMatrix<f64>,
    sigma: f64,
    labels: &[usize],
    eps: f64,
) -> Result<ModelFunctionals> {
    let k = centers.nrows();
    let r = centers.ncols() as f64;
    let n = labels.len();
    let mut counts = vec![0usize; k];
    for &z in labels {
        if z >= k {
            return Err(Error::LabelOutOfRange { label: z, k });
        }
        counts[z] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingCluster(missing));
    }
    let nf = n as f64;
    let alpha = counts.iter().copied().min().unwrap() as f64 / nf;
    let (delta, m_max) = center_separation(centers);
    let rho_sigma = if sigma == 0.0 {
        f64::INFINITY
    } else {
        delta / sigma * (alpha / (1.0 + k as f64 * r / nf)).sqrt()
    };
    let rho_eps = if eps == 0.0 {
        f64::INFINITY
    } else {
        alpha.sqrt() * delta / eps
    };
    Ok(ModelFunctionals {
        delta,
        m_max,
        alpha,
        rho_sigma,
        rho_eps,
    })
}

impl ModelFunctionals {
    pub fn of_sample(sample: &LabeledSample) -> Result<Self> {
        model_functionals(
            &sample.centers,
            sample.sigma,
            &sample.labels,
            sample.eps_bound,
        )
    }
}

/// `exp(-num / den)`, taken as 0 when `den == 0` (its limit for `num > 0`).
fn exp_neg_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        (-num / den).exp()
    }
}

/// Exponential misclustering bound and its failure probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremOneBound {
    pub delta: f64,
    pub sigma: f64,
    pub eps: f64,
    /// `max{exp(-Δ²/16σ²), exp(-Δ²/8εσ)}`.
    pub as_bound: f64,
}

impl TheoremOneBound {
    /// `δ(n) = 1/n + 2exp(-Δ/σ) + 2exp(-Δ/√(εσ))`, zero-scale terms dropped.
    pub fn failure_probability(&self, n: usize) -> f64 {
        1.0 / n as f64
            + 2.0 * exp_neg_ratio(self.delta, self.sigma)
            + 2.0 * exp_neg_ratio(self.delta, (self.eps * self.sigma).sqrt())
    }

    /// Number of Lloyd iterations the bound is stated for, `⌈4 ln n⌉`.
    pub fn iterations_for(n: usize) -> usize {
        ((4.0 * (n as f64).ln()).ceil() as usize).max(1)
    }
}

pub fn theorem_one_bound(delta: f64, sigma: f64, eps: f64) -> Result<TheoremOneBound> {
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    if !(sigma >= 0.0) || !(eps >= 0.0) {
        return Err(invalid("sigma/eps", "must be nonnegative"));
    }
    let d2 = delta * delta;
    let as_bound = exp_neg_ratio(d2, 16.0 * sigma * sigma).max(exp_neg_ratio(d2, 8.0 * eps * sigma));
    Ok(TheoremOneBound {
        delta,
        sigma,
        eps,
        as_bound,
    })
}

/// Which initialization requirement holds, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    SatisfiedViaG0,
    SatisfiedViaGamma0,
    Unsatisfied,
}

/// Largest admissible `(G₀, Γ₀)` for the functionals, with `1/∞ = 0`.
pub fn initial_condition_thresholds(f: &ModelFunctionals, sigma: f64) -> (f64, f64) {
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let sa = f.alpha.sqrt();
    let noise_term = f.alpha.powf(-0.25) * (sigma / f.delta).sqrt();
    let g0 = (0.5 - (6.0_f64.sqrt() + 1.0) * inv(f.rho_sigma) - (2.1 * sa + 1.0) * inv(f.rho_eps)
        - noise_term)
        * f.delta
        / f.m_max;
    let gamma0 = 0.5 - inv(f.rho_sigma) - (1.1 * sa + 1.0) * inv(f.rho_eps) - noise_term;
    (g0, gamma0)
}

pub fn check_initial_condition(
    g0: Option<f64>,
    gamma0: Option<f64>,
    f: &ModelFunctionals,
    sigma: f64,
) -> Result<InitialCondition> {
    if g0.is_none() && gamma0.is_none() {
        return Err(invalid("g0/gamma0", "supply at least one of G0 and Gamma0"));
    }
    if !(f.delta > 0.0) {
        return Err(invalid("delta", "initial condition needs Delta > 0"));
    }
    let (g_max, gamma_max) = initial_condition_thresholds(f, sigma);
    if g0.is_some_and(|g| g <= g_max) {
        return Ok(InitialCondition::SatisfiedViaG0);
    }
    if gamma0.is_some_and(|g| g <= gamma_max) {
        return Ok(InitialCondition::SatisfiedViaGamma0);
    }
    Ok(InitialCondition::Unsatisfied)
}

/// Bound on `max_k ‖μ̂_k − μ_k‖` after the iterations settle, given `A_s`.
pub fn corollary_center_bound(
    f: &ModelFunctionals,
    sigma: f64,
    eps: f64,
    n: usize,
    r: usize,
    k: usize,
    a_s: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&a_s) {
        return Err(invalid("a_s", format!("must lie in [0, 1], got {a_s}")));
    }
    let nf = n as f64;
    let rf = r as f64;
    let alpha = f.alpha;
    Ok(
        2.0 * 3.0_f64.sqrt() * ((k as f64).sqrt() + 1.0) * sigma
            * ((nf + rf) * a_s / (nf * alpha * alpha)).sqrt()
            + 2.0 * f.delta * a_s / alpha
            + 6.0 * sigma * ((rf + nf.ln()) / (nf * alpha)).sqrt()
            + eps,
    )
}
