//! SigClust: significance of a two-cluster split measured by the cluster
//! index against a simulated single-Gaussian null. Small CI rejects.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::embeddings::{cmds_embedding, CmdsInput};
use crate::error::{invalid, Error, Result};
use crate::kmeans::{kmeans, KMeansConfig};
use crate::linalg::{sample_covariance, sym_eig, EigenOrdering};
use crate::par::map_indices;
use crate::rng::{derive_seed, rng_from_seed};

/// Smallest simulation count for which a 0.05-level rejection is possible.
pub const MIN_N_SIM: usize = 19;

/// `Φ⁻¹(0.75)`, the MAD of a standard normal.
pub fn mad_standard_normal() -> f64 {
    Normal::standard().inverse_cdf(0.75)
}

/// Within-cluster sum of squares over total sum of squares for a 0/1 split.
pub fn cluster_index(y: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if labels.len() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} points",
            labels.len(),
            y.nrows()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::LabelOutOfRange { label: bad, k: 2 });
    }
    let r = y.ncols();
    let mut sums = [vec![0.0; r], vec![0.0; r]];
    let mut counts = [0usize; 2];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for j in 0..r {
            sums[l][j] += y[(i, j)];
        }
    }
    if let Some(empty) = (0..2).find(|&c| counts[c] == 0) {
        return Err(Error::MissingCluster(empty));
    }
    let n = y.nrows() as f64;
    let grand: Vec<f64> = (0..r).map(|j| (sums[0][j] + sums[1][j]) / n).collect();
    let means: Vec<Vec<f64>> = (0..2)
        .map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect())
        .collect();
    let (mut within, mut total) = (0.0, 0.0);
    for (i, &l) in labels.iter().enumerate() {
        for j in 0..r {
            within += (y[(i, j)] - means[l][j]).powi(2);
            total += (y[(i, j)] - grand[j]).powi(2);
        }
    }
    if !(total > 0.0) {
        return Err(Error::Degenerate("total sum of squares is zero".into()));
    }
    Ok((within / total).min(1.0))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Background noise scale: MAD of all pooled entries over `Φ⁻¹(0.75)`.
pub fn mad_sigma(y: &DMatrix<f64>) -> Result<f64> {
    if y.len() < 2 {
        return Err(invalid("y", "need at least two entries"));
    }
    let mut entries: Vec<f64> = y.iter().copied().collect();
    let med = median(&mut entries);
    let mut dev: Vec<f64> = entries.iter().map(|v| (v - med).abs()).collect();
    Ok(median(&mut dev) / mad_standard_normal())
}

/// Descending eigenvalues of the sample covariance (denominator `n − 1`).
pub fn null_eigenvalues(y: &DMatrix<f64>) -> Result<Vec<f64>> {
    let cov = sample_covariance(y)?;
    let eig = sym_eig(&cov, cov.dim(), EigenOrdering::AlgebraicDescending)?;
    Ok(eig.values.as_slice().to_vec())
}

/// Two-means clusterer used on null datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clusterer {
    pub restarts: usize,
}

impl Default for Clusterer {
    fn default() -> Self {
        Self { restarts: 10 }
    }
}

impl Clusterer {
    pub fn config(&self) -> KMeansConfig {
        KMeansConfig::new(2, self.restarts)
    }
}

/// Best-cost 2-means partition of `y`.
pub fn two_means<R: Rng + ?Sized>(y: &DMatrix<f64>, clusterer: &Clusterer, rng: &mut R) -> Result<Vec<usize>> {
    Ok(kmeans(y, &clusterer.config(), rng)?.assignments)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigClustReport {
    pub ci_observed: f64,
    pub sigma_hat: f64,
    pub eigenvalues: Vec<f64>,
    pub null_cis: Vec<f64>,
    pub p_value: f64,
    pub n_sim: usize,
}

impl SigClustReport {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value <= level
    }

    /// Single-record CSV: `ci_observed,sigma_hat,p_value,n_sim,lambda_1..lambda_r`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "ci_observed".to_string(),
            "sigma_hat".into(),
            "p_value".into(),
            "n_sim".into(),
        ];
        header.extend((1..=self.eigenvalues.len()).map(|j| format!("lambda_{j}")));
        w.write_record(&header)?;
        let mut rec = vec![
            self.ci_observed.to_string(),
            self.sigma_hat.to_string(),
            self.p_value.to_string(),
            self.n_sim.to_string(),
        ];
        rec.extend(self.eigenvalues.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
        w.flush()?;
        Ok(())
    }

    /// One null CI per line under the header `null_ci`.
    pub fn write_null_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["null_ci"])?;
        for v in &self.null_cis {
            w.write_record([v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Add-one p-value `(1 + #{null ≤ observed}) / (N + 1)`.
pub fn p_value(observed: f64, null_cis: &[f64]) -> f64 {
    let hits = null_cis.iter().filter(|&&c| c <= observed).count();
    (1 + hits) as f64 / (null_cis.len() + 1) as f64
}

/// Null data: independent coordinates `N(0, max(λ̂_j, σ̂²))`.
pub fn simulate_null<R: Rng + ?Sized>(n: usize, variances: &[f64], rng: &mut R) -> DMatrix<f64> {
    let sd: Vec<f64> = variances.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut x = DMatrix::zeros(n, sd.len());
    for i in 0..n {
        for (j, s) in sd.iter().enumerate() {
            let z: f64 = StandardNormal.sample(rng);
            x[(i, j)] = s * z;
        }
    }
    x
}

/// Two-means CIs of `n_sim` null datasets with coordinate variances
/// `variances`. Replicate `b` uses the stream `derive_seed(seed, b)`.
pub fn null_cluster_indices(
    n: usize,
    variances: &[f64],
    n_sim: usize,
    clusterer: &Clusterer,
    seed: u64,
) -> Result<Vec<f64>> {
    map_indices(n_sim, |b| -> Result<f64> {
        let mut rng = rng_from_seed(derive_seed(seed, b as u64));
        let x = simulate_null(n, variances, &mut rng);
        let labels = two_means(&x, clusterer, &mut rng)?;
        cluster_index(&x, &labels)
    })
    .into_iter()
    .collect()
}

/// Tests the 0/1 `partition` of `y`.
pub fn sigclust_test(
    y: &DMatrix<f64>,
    partition: &[usize],
    n_sim: usize,
    clusterer: &Clusterer,
    seed: u64,
) -> Result<SigClustReport> {
    if n_sim < MIN_N_SIM {
        return Err(invalid("n_sim", format!("must be at least {MIN_N_SIM}, got {n_sim}")));
    }
    let ci_observed = cluster_index(y, partition)?;
    let sigma_hat = mad_sigma(y)?;
    let eigenvalues = null_eigenvalues(y)?;
    let variances: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| l.max(sigma_hat * sigma_hat))
        .collect();
    let null_cis = null_cluster_indices(y.nrows(), &variances, n_sim, clusterer, seed)?;
    Ok(SigClustReport {
        p_value: p_value(ci_observed, &null_cis),
        ci_observed,
        sigma_hat,
        eigenvalues,
        null_cis,
        n_sim,
    })
}

/// Clusters `y` by 2-means and tests the resulting split.
pub fn sigclust_auto(y: &DMatrix<f64>, n_sim: usize, clusterer: &Clusterer, seed: u64) -> Result<SigClustReport> {
    let mut rng = rng_from_seed(derive_seed(seed, u64::MAX));
    let partition = two_means(y, clusterer, &mut rng)?;
    sigclust_test(y, &partition, n_sim, clusterer, seed)
}

/// Hollowed CMDS embedding of the rows of `x` into `r_embed` dimensions,
/// followed by [`sigclust_auto`].
pub fn mds_sigclust(
    x: &DMatrix<f64>,
    r_embed: usize,
    n_sim: usize,
    clusterer: &Clusterer,
    seed: u64,
) -> Result<SigClustReport> {
    if x.ncols() < r_embed {
        return Err(invalid("r_embed", "exceeds the ambient dimension"));
    }
    let y = cmds_embedding(&CmdsInput::Points(x.clone()), r_embed, true)?;
    sigclust_auto(&y, n_sim, clusterer, seed)
}

/// Left side minus right side of the consistency condition on `a/σ` for
/// the symmetric two-component model; positive means the condition holds.
pub fn consistency_margin(a_over_sigma: f64) -> f64 {
    let t = a_over_sigma;
    let pi = std::f64::consts::PI;
    let s2 = 2f64.sqrt();
    (1.0 - 2.0 / pi) * t * t
        - 48.0 * (s2 + 1.0).powi(2) * (-4.0 * t * t).exp()
        - 64.0 * t * t * (-8.0 * t * t).exp()
        - 64.0 * 3f64.sqrt() * (s2 + 1.0) * t * (-6.0 * t * t).exp()
        - 2.0 / pi
}
