#![allow(dead_code)]

use nalgebra::DMatrix;
use perturb_lloyd::rng::rng_from_seed;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(r: usize, seed: u64) -> DMatrix<f64> {
    gaussian_matrix(r, r, seed).qr().q()
}

pub fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, seed);
    (&g + g.transpose()) * 0.5
}

/// Every permutation of `0..k`, built by recursive insertion.
pub fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `min_π (1/n) Σ 1{ẑ_i ≠ π(z_i)}` by full enumeration.
pub fn brute_misclustering(z_hat: &[usize], z: &[usize], k: usize) -> f64 {
    let n = z.len();
    all_permutations(k)
        .iter()
        .map(|p| z.iter().zip(z_hat).filter(|(t, e)| p[**t] != **e).count())
        .min()
        .unwrap() as f64
        / n as f64
}

/// Minimum 2-means cost over every nontrivial bipartition of the rows.
pub fn brute_two_means_cost(y: &DMatrix<f64>) -> f64 {
    let n = y.nrows();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
        best = best.min(perturb_lloyd::lloyd::partition_cost(y, &labels, 2));
    }
    best
}
