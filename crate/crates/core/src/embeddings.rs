//! Graph and factor-model generators and the spectral embeddings that turn
//! them into point clouds for Lloyd's algorithm.
//!
//! Eigenpairs are taken in algebraic-descending order throughout, so
//! disassortative block models (informative negative eigenvalues) are not
//! handled.

use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    double_center, hollow, sample_covariance, sym_eig, EigenOrdering, SymmetricMatrix,
};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Given(Vec<usize>),
    /// `⌈n/K⌉` or `⌊n/K⌋` nodes per block, in random order.
    BalancedRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub n: usize,
    pub k: usize,
    pub membership: Membership,
    pub b0: DMatrix<f64>,
    pub rho_n: f64,
}

impl SbmSpec {
    pub fn balanced(n: usize, b0: DMatrix<f64>, rho_n: f64) -> Self {
        Self {
            n,
            k: b0.nrows(),
            membership: Membership::BalancedRandom,
            b0,
            rho_n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        if k == 0 || self.b0.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "B0 is {:?}, expected {k}x{k}",
                self.b0.shape()
            )));
        }
        if self.n < k {
            return Err(invalid("n", format!("need n >= K, got n={}, K={k}", self.n)));
        }
        for i in 0..k {
            for j in 0..k {
                let v = self.b0[(i, j)];
                if !(v > 0.0 && v <= 1.0) {
                    return Err(invalid("b0", format!("entry ({i},{j}) = {v} not in (0,1]")));
                }
                if v != self.b0[(j, i)] {
                    return Err(Error::NotSymmetric((v - self.b0[(j, i)]).abs()));
                }
            }
        }
        if !(self.rho_n >= 0.0) {
            return Err(invalid("rho_n", "must be nonnegative"));
        }
        if let Membership::Given(z) = &self.membership {
            if z.len() != self.n {
                return Err(Error::DimensionMismatch(format!("{} labels for n={}", z.len(), self.n)));
            }
            if let Some(&l) = z.iter().find(|&&l| l >= k) {
                return Err(Error::LabelOutOfRange { label: l, k });
            }
        }
        Ok(())
    }

    /// `B = ρ_n B0`, checked entrywise against `[0, 1]`.
    pub fn block_matrix(&self) -> Result<DMatrix<f64>> {
        let b = &self.b0 * self.rho_n;
        for i in 0..self.k {
            for j in 0..self.k {
                if b[(i, j)] > 1.0 {
                    return Err(Error::InvalidProbability { i, j, value: b[(i, j)] });
                }
            }
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphMeta {
    pub rho_n: Option<f64>,
    pub alpha_n: Option<f64>,
    pub beta_n: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GraphInstance {
    pub adjacency: SymmetricMatrix,
    /// Edge-probability matrix with zero diagonal, when known.
    pub expected: Option<SymmetricMatrix>,
    pub labels: Vec<usize>,
    pub meta: GraphMeta,
}

impl GraphInstance {
    pub fn n(&self) -> usize {
        self.adjacency.dim()
    }

    pub fn edge_count(&self) -> usize {
        let a = self.adjacency.as_matrix();
        let n = self.n();
        (0..n).map(|i| (i + 1..n).filter(|&j| a[(i, j)] != 0.0).count()).sum()
    }

    /// Edge list `i,j` with `i < j`, 0-indexed, one edge per line.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j"])?;
        let a = self.adjacency.as_matrix();
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                if a[(i, j)] != 0.0 {
                    w.write_record([i.to_string(), j.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_labels<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "label"])?;
        for (i, l) in self.labels.iter().enumerate() {
            w.write_record([i.to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn bernoulli_graph<R: Rng + ?Sized>(p: &DMatrix<f64>, rng: &mut R) -> SymmetricMatrix {
    let n = p.nrows();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p[(i, j)] {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    SymmetricMatrix::new(a).expect("symmetric by construction")
}

fn balanced_labels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut z: Vec<usize> = (0..n).map(|i| i % k).collect();
    z.shuffle(rng);
    z
}

/// Block-model graph with `P(A_ij = 1) = ρ_n B0[z_i, z_j]` for `i ≠ j`.
pub fn gen_sbm(spec: &SbmSpec, seed: u64) -> Result<GraphInstance> {
    spec.validate()?;
    let b = spec.block_matrix()?;
    let mut rng = rng_from_seed(seed);
    let labels = match &spec.membership {
        Membership::Given(z) => z.clone(),
        Membership::BalancedRandom => balanced_labels(spec.n, spec.k, &mut rng),
    };
    let n = spec.n;
    let p = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { b[(labels[i], labels[j])] });
    let adjacency = bernoulli_graph(&p, &mut rng);
    Ok(GraphInstance {
        adjacency,
        expected: Some(SymmetricMatrix::new(p)?),
        labels,
        meta: GraphMeta {
            rho_n: Some(spec.rho_n),
            ..GraphMeta::default()
        },
    })
}

/// Flips absent edges on with probability `α_n` and present edges off with
/// probability `β_n`, independently over the upper triangle.
pub fn gen_noisy_sbm(g: &GraphInstance, alpha_n: f64, beta_n: f64, seed: u64) -> Result<GraphInstance> {
    for (name, v) in [("alpha_n", alpha_n), ("beta_n", beta_n)] {
        if !(0.0..1.0).contains(&v) {
            return Err(invalid(name, format!("must lie in [0,1), got {v}")));
        }
    }
    let mut rng = rng_from_seed(seed);
    let a = g.adjacency.as_matrix();
    let n = g.n();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.random();
            let edge = if a[(i, j)] != 0.0 { u >= beta_n } else { u < alpha_n };
            if edge {
                out[(i, j)] = 1.0;
                out[(j, i)] = 1.0;
            }
        }
    }
    let expected = match &g.expected {
        Some(p) => {
            let p = p.as_matrix();
            let scale = 1.0 - alpha_n - beta_n;
            Some(SymmetricMatrix::new(DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    0.0
                } else {
                    scale * p[(i, j)] + alpha_n
                }
            }))?)
        }
        None => None,
    };
    Ok(GraphInstance {
        adjacency: SymmetricMatrix::new(out)?,
        expected,
        labels: g.labels.clone(),
        meta: GraphMeta {
            rho_n: g.meta.rho_n,
            alpha_n: Some(alpha_n),
            beta_n: Some(beta_n),
        },
    })
}

/// Eigenvectors of the `k` algebraically largest adjacency eigenvalues.
pub fn adjacency_spectral_embedding(g: &GraphInstance, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 || k >= g.n() {
        return Err(invalid("k", format!("need 1 <= k < n, got k={k}, n={}", g.n())));
    }
    Ok(sym_eig(&g.adjacency, k, EigenOrdering::AlgebraicDescending)?.vectors)
}

fn scaled_top(a: &SymmetricMatrix, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 || k > a.dim() {
        return Err(invalid("k", format!("need 1 <= k <= {}, got {k}", a.dim())));
    }
    sym_eig(a, k, EigenOrdering::AlgebraicDescending)?.scaled_vectors()
}

/// Rows of `U Λ^{1/2}` from the top-`k` eigenpairs of the hollowed Gram
/// matrix `𝓗(XXᵀ)`.
pub fn hollowed_gram_embedding(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    scaled_top(&hollow(&SymmetricMatrix::gram(x)?), k)
}

#[derive(Debug, Clone)]
pub enum CmdsInput {
    /// n × p coordinates.
    Points(DMatrix<f64>),
    /// n × n squared dissimilarities.
    SquaredDissimilarity(SymmetricMatrix),
}

/// Classical multidimensional scaling, optionally hollowing the
/// double-centered matrix before the eigendecomposition.
pub fn cmds_embedding(input: &CmdsInput, r_embed: usize, hollowed: bool) -> Result<DMatrix<f64>> {
    let b = match input {
        CmdsInput::Points(x) => {
            let mut centered = x.clone();
            for mut c in centered.column_iter_mut() {
                let mean = c.mean();
                c.add_scalar_mut(-mean);
            }
            SymmetricMatrix::gram(&centered)?
        }
        CmdsInput::SquaredDissimilarity(d2) => double_center(d2)?,
    };
    let b = if hollowed { hollow(&b) } else { b };
    scaled_top(&b, r_embed)
}

/// Random dot product graph with `P_ij = ⟨y*_i, y*_j⟩`.
pub fn gen_rdpg(ystar: &DMatrix<f64>, seed: u64) -> Result<GraphInstance> {
    let n = ystar.nrows();
    let gram = ystar * ystar.transpose();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = gram[(i, j)];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProbability { i, j, value: v });
            }
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    let mut rng = rng_from_seed(seed);
    let adjacency = bernoulli_graph(&p, &mut rng);
    Ok(GraphInstance {
        adjacency,
        expected: Some(SymmetricMatrix::new(p)?),
        labels: Vec::new(),
        meta: GraphMeta::default(),
    })
}

/// Adjacency spectral embedding `Û_r Ŝ_r^{1/2}`.
pub fn ase_scaled(g: &GraphInstance, r: usize) -> Result<DMatrix<f64>> {
    scaled_top(&g.adjacency, r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapParams {
    /// Maximum expected degree `max_i Σ_{j≠i} P_ij`.
    pub max_expected_degree: f64,
    /// `min_{i ≤ r} (S_ii − S_{i+1,i+1}) / n`.
    pub gamma: f64,
}

pub fn rdpg_gap_params(p_expected: &SymmetricMatrix, r: usize) -> Result<GapParams> {
    let n = p_expected.dim();
    if r == 0 || r > n {
        return Err(invalid("r", format!("need 1 <= r <= n, got r={r}, n={n}")));
    }
    let p = p_expected.as_matrix();
    let max_expected_degree = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| p[(i, j)]).sum::<f64>())
        .fold(0.0, f64::max);
    let want = (r + 1).min(n);
    let mut s: Vec<f64> = sym_eig(p_expected, want, EigenOrdering::AlgebraicDescending)?
        .values
        .as_slice()
        .to_vec();
    s.resize(r + 1, 0.0);
    let gap = (0..r).map(|i| s[i] - s[i + 1]).fold(f64::INFINITY, f64::min);
    Ok(GapParams {
        max_expected_degree,
        gamma: gap.max(0.0) / n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DfmFactorModel {
    IidGaussian,
    /// `f_t = φ f_{t−1} + √(1−φ²) ζ_t`, started at stationarity.
    Var1 { phi: f64 },
}

/// `T × n` series `X_t = Λ f_t + ε_t` with unit-covariance factors and
/// independent errors `ε_{t,i} ~ N(0, noise_var[i])`.
pub fn gen_dfm(
    loadings: &DMatrix<f64>,
    t_len: usize,
    factor_model: DfmFactorModel,
    noise_var: &[f64],
    seed: u64,
) -> Result<DMatrix<f64>> {
    let (n, r) = loadings.shape();
    if noise_var.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} noise variances for {n} series",
            noise_var.len()
        )));
    }
    if let Some(v) = noise_var.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid("noise_var", format!("variances must be nonnegative, got {v}")));
    }
    if t_len < r.max(1) {
        return Err(invalid("T", format!("need T >= r, got T={t_len}, r={r}")));
    }
    let phi = match factor_model {
        DfmFactorModel::IidGaussian => 0.0,
        DfmFactorModel::Var1 { phi } => {
            if !(phi.abs() < 1.0) {
                return Err(invalid("phi", format!("|phi| must be < 1, got {phi}")));
            }
            phi
        }
    };
    let innov = (1.0 - phi * phi).sqrt();
    let sd: Vec<f64> = noise_var.iter().map(|v| v.sqrt()).collect();
    let mut rng = rng_from_seed(seed);
    let mut f = vec![0.0; r];
    let mut x = DMatrix::zeros(t_len, n);
    for t in 0..t_len {
        for fj in f.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *fj = if t == 0 { z } else { phi * *fj + innov * z };
        }
        for i in 0..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            let signal: f64 = (0..r).map(|j| loadings[(i, j)] * f[j]).sum();
            x[(t, i)] = signal + sd[i] * e;
        }
    }
    Ok(x)
}

/// PCA loadings `Q̂_r D̂_r^{1/2}` from the `n × n` sample covariance of the
/// `T × n` series.
pub fn pca_loadings(x: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    if x.nrows() < 2 {
        return Err(invalid("x", "need at least two time points"));
    }
    scaled_top(&sample_covariance(x)?, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn b0_two() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0])
    }

    fn assert_valid_graph(g: &GraphInstance) {
        let a = g.adjacency.as_matrix();
        for i in 0..g.n() {
            assert_eq!(a[(i, i)], 0.0);
            for j in 0..g.n() {
                assert!(a[(i, j)] == 0.0 || a[(i, j)] == 1.0);
                assert_eq!(a[(i, j)], a[(j, i)]);
            }
        }
    }

    #[test]
    fn erdos_renyi_density() {
        let n = 142; // ~10⁴ vertex pairs
        let p = 0.3;
        let spec = SbmSpec::balanced(n, DMatrix::from_element(1, 1, p), 1.0);
        let g = gen_sbm(&spec, 8).unwrap();
        assert_valid_graph(&g);
        let pairs = (n * (n - 1) / 2) as f64;
        let dens = g.edge_count() as f64 / pairs;
        let se = (p * (1.0 - p) / pairs).sqrt();
        assert!((dens - p).abs() < 3.0 * se, "density {dens}");
    }

    #[test]
    fn zero_rho_is_empty() {
        let g = gen_sbm(&SbmSpec::balanced(30, b0_two(), 0.0), 1).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn invalid_probability_rejected() {
        let spec = SbmSpec::balanced(10, b0_two(), 2.0);
        assert!(matches!(gen_sbm(&spec, 1), Err(Error::InvalidProbability { .. })));
    }

    #[test]
    fn noisy_identity_and_saturation() {
        let g = gen_sbm(&SbmSpec::balanced(40, b0_two(), 0.5), 3).unwrap();
        let same = gen_noisy_sbm(&g, 0.0, 0.0, 4).unwrap();
        assert_eq!(same.adjacency, g.adjacency);
        let empty = gen_sbm(&SbmSpec::balanced(40, b0_two(), 0.0), 3).unwrap();
        let full = gen_noisy_sbm(&empty, 0.999_999, 0.0, 5).unwrap();
        assert_valid_graph(&full);
        assert!(full.edge_count() as f64 > 0.99 * (40.0 * 39.0 / 2.0));
        assert!(gen_noisy_sbm(&g, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn expected_adjacency_embedding_is_block_constant() {
        let n = 20;
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let spec = SbmSpec {
            n,
            k: 2,
            membership: Membership::Given(labels.clone()),
            b0: b0_two(),
            rho_n: 0.5,
        };
        let z = DMatrix::from_fn(n, 2, |i, k| if labels[i] == k { 1.0 } else { 0.0 });
        let astar = &z * (&b0_two() * 0.5) * z.transpose();
        let g = GraphInstance {
            adjacency: SymmetricMatrix::new(astar).unwrap(),
            expected: None,
            labels: labels.clone(),
            meta: GraphMeta::default(),
        };
        spec.validate().unwrap();
        let u = adjacency_spectral_embedding(&g, 2).unwrap();
        for i in 0..n {
            let rep = labels[i];
            assert_abs_diff_eq!((u.row(i) - u.row(rep)).norm(), 0.0, epsilon = 1e-10);
        }
        assert!((u.row(0) - u.row(1)).norm() > 1e-3);
    }

    #[test]
    fn hollowed_gram_degenerate_and_homogeneous() {
        let x = DMatrix::<f64>::identity(3, 3) * 2.0;
        assert!(matches!(
            hollowed_gram_embedding(&x, 1),
            Err(Error::NonPositiveEigenvalue { .. })
        ));
        let x = DMatrix::from_row_slice(4, 2, &[3.0, 0.1, 3.1, 0.0, -0.1, 2.0, 0.0, 2.2]);
        let e1 = hollowed_gram_embedding(&x, 1).unwrap();
        let e2 = hollowed_gram_embedding(&(&x * 2.5), 1).unwrap();
        assert_abs_diff_eq!(e2, e1 * 2.5, epsilon = 1e-10);
    }

    #[test]
    fn cmds_collinear() {
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]);
        let e = cmds_embedding(&CmdsInput::Points(x), 1, false).unwrap();
        let v: Vec<f64> = e.iter().map(|v| v.abs()).collect();
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2], 1.0, epsilon = 1e-12);
        assert!(e[(0, 0)] * e[(2, 0)] < 0.0);
    }

    #[test]
    fn rdpg_rejects_and_er() {
        let bad = DMatrix::from_row_slice(2, 1, &[1.0, 1.5]);
        assert!(matches!(
            gen_rdpg(&bad, 1),
            Err(Error::InvalidProbability { i: 0, j: 1, .. })
        ));
        let ortho = DMatrix::<f64>::identity(5, 5);
        assert_eq!(gen_rdpg(&ortho, 2).unwrap().edge_count(), 0);
    }

    #[test]
    fn gap_params() {
        let n = 6;
        let p = 0.2;
        let pm = SymmetricMatrix::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { p })).unwrap();
        let gp = rdpg_gap_params(&pm, 1).unwrap();
        assert_abs_diff_eq!(gp.max_expected_degree, p * (n - 1) as f64, epsilon = 1e-12);
        let d = SymmetricMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![10.0, 7.0, 3.0]))).unwrap();
        assert_abs_diff_eq!(rdpg_gap_params(&d, 2).unwrap().gamma, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dfm_validation_and_phi_zero() {
        let l = DMatrix::from_row_slice(3, 1, &[1.0, -1.0, 0.5]);
        let nv = [0.1; 3];
        let a = gen_dfm(&l, 50, DfmFactorModel::IidGaussian, &nv, 7).unwrap();
        let b = gen_dfm(&l, 50, DfmFactorModel::Var1 { phi: 0.0 }, &nv, 7).unwrap();
        assert_eq!(a, b);
        assert!(gen_dfm(&l, 50, DfmFactorModel::Var1 { phi: 1.0 }, &nv, 7).is_err());
        let zero = gen_dfm(&DMatrix::zeros(3, 1), 10, DfmFactorModel::IidGaussian, &[0.0; 3], 1).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pca_constraint_identity() {
        let l = DMatrix::from_row_slice(4, 2, &[1.0, 0.2, -1.0, 0.5, 0.3, 1.0, 0.0, -1.2]);
        let x = gen_dfm(&l, 400, DfmFactorModel::IidGaussian, &[0.05; 4], 2).unwrap();
        let lh = pca_loadings(&x, 2).unwrap();
        let g = lh.transpose() * &lh;
        assert!(g[(0, 1)].abs() <= 1e-8);
        assert!(pca_loadings(&DMatrix::zeros(10, 3), 1).is_err());
    }

    #[test]
    fn edge_list_format() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let g = GraphInstance {
            adjacency: SymmetricMatrix::new(a).unwrap(),
            expected: None,
            labels: vec![0, 0, 1],
            meta: GraphMeta::default(),
        };
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j\n0,1\n1,2\n");
    }
}
