//! Instrumented Lloyd iteration and the misclustering functionals
//! `A_s`, `G_s` and `Γ_s`.
//!
//! Iteration `s` records centers `μ̂^(s)` and labels `ẑ^(s)`. Labels at
//! `s = 0` come from the initial centers; afterwards
//! `ẑ^(s) = argmin_k ‖y − μ̂_k^(s−1)‖` and `μ̂^(s)` are the cluster means of
//! `ẑ^(s)`. Nearest-center ties go to the lowest cluster index.

use std::io::Write;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{center_separation, LabeledSample};

/// Crossover from exhaustive permutation search to optimal assignment.
const EXHAUSTIVE_MAX_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyClusterPolicy {
    #[default]
    KeepPreviousCenter,
    /// Move the center onto the point farthest from its own center.
    ReseedFarthestPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LloydConfig {
    /// `None` means `⌈4 ln n⌉`.
    pub max_iters: Option<usize>,
    pub empty_cluster_policy: EmptyClusterPolicy,
    /// Stop computing once a fixed point is reached; the remaining
    /// iterations are filled with copies of it.
    pub early_stop_on_fixed_point: bool,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iters: None,
            empty_cluster_policy: EmptyClusterPolicy::KeepPreviousCenter,
            early_stop_on_fixed_point: true,
        }
    }
}

impl LloydConfig {
    pub fn with_max_iters(max_iters: usize) -> Self {
        Self {
            max_iters: Some(max_iters),
            ..Self::default()
        }
    }

    pub fn resolved_iters(&self, n: usize) -> usize {
        self.max_iters
            .unwrap_or_else(|| ((4.0 * (n.max(2) as f64).ln()).ceil() as usize).max(1))
    }
}

fn sq_dist_row(y: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, k: usize) -> f64 {
    (0..y.ncols()).map(|j| (y[(i, j)] - c[(k, j)]).powi(2)).sum()
}

/// Nearest-center labels; ties go to the lowest index.
pub fn assign_step(y: &DMatrix<f64>, centers: &DMatrix<f64>) -> Vec<usize> {
    (0..y.nrows())
        .map(|i| {
            let mut best = 0;
            let mut best_d = sq_dist_row(y, i, centers, 0);
            for k in 1..centers.nrows() {
                let d = sq_dist_row(y, i, centers, k);
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Cluster means of `assignments`; empty clusters follow `policy`.
pub fn update_step(
    y: &DMatrix<f64>,
    assignments: &[usize],
    k: usize,
    policy: EmptyClusterPolicy,
    previous: &DMatrix<f64>,
) -> DMatrix<f64> {
    let r = y.ncols();
    let mut sums = DMatrix::zeros(k, r);
    let mut counts = vec![0usize; k];
    for (i, &z) in assignments.iter().enumerate() {
        counts[z] += 1;
        for j in 0..r {
            sums[(z, j)] += y[(i, j)];
        }
    }
    let mut centers = sums;
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            centers.row_mut(c).scale_mut(inv);
        }
    }
    let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return centers;
    }
    match policy {
        EmptyClusterPolicy::KeepPreviousCenter => {
            for c in empty {
                centers.set_row(c, &previous.row(c));
            }
        }
        EmptyClusterPolicy::ReseedFarthestPoint => {
            let mut taken = vec![false; y.nrows()];
            for c in empty {
                let far = (0..y.nrows())
                    .filter(|&i| !taken[i])
                    .map(|i| (i, sq_dist_row(y, i, &centers, assignments[i])))
                    .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                        Some((_, bd)) if bd >= d => acc,
                        _ => Some((i, d)),
                    });
                match far {
                    Some((i, _)) => {
                        taken[i] = true;
                        centers.set_row(c, &y.row(i));
                    }
                    None => centers.set_row(c, &previous.row(c)),
                }
            }
        }
    }
    centers
}

/// k-means objective `(1/n) Σ ‖y_i − c_{z_i}‖²`.
pub fn kmeans_cost(y: &DMatrix<f64>, assignments: &[usize], centers: &DMatrix<f64>) -> f64 {
    let total: f64 = assignments
        .iter()
        .enumerate()
        .map(|(i, &z)| sq_dist_row(y, i, centers, z))
        .sum();
    total / y.nrows() as f64
}

/// Cost of a partition about its own cluster means.
pub fn partition_cost(y: &DMatrix<f64>, assignments: &[usize], k: usize) -> f64 {
    let centers = update_step(
        y,
        assignments,
        k,
        EmptyClusterPolicy::KeepPreviousCenter,
        &DMatrix::zeros(k, y.ncols()),
    );
    kmeans_cost(y, assignments, &centers)
}

/// Raw Lloyd path without ground-truth metrics.
#[derive(Debug, Clone)]
pub struct LloydPath {
    pub centers: Vec<DMatrix<f64>>,
    pub assignments: Vec<Vec<usize>>,
    pub costs: Vec<f64>,
    /// Iterations actually computed (excluding carried-forward copies).
    pub iterations_run: usize,
}

impl LloydPath {
    pub fn final_centers(&self) -> &DMatrix<f64> {
        self.centers.last().expect("path has iteration 0")
    }

    pub fn final_assignments(&self) -> &[usize] {
        self.assignments.last().expect("path has iteration 0")
    }

    pub fn final_cost(&self) -> f64 {
        *self.costs.last().expect("path has iteration 0")
    }
}

/// Runs Lloyd's algorithm from `init` (K × r) on the rows of `y`.
pub fn lloyd(y: &DMatrix<f64>, init: &DMatrix<f64>, config: &LloydConfig) -> Result<LloydPath> {
    let k = init.nrows();
    if k == 0 {
        return Err(invalid("init", "need at least one center"));
    }
    if init.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "centers have {} columns, data has {}",
            init.ncols(),
            y.ncols()
        )));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let iters = config.resolved_iters(y.nrows());
    if iters == 0 {
        return Err(invalid("max_iters", "must be at least 1"));
    }

    let z0 = assign_step(y, init);
    let mut path = LloydPath {
        costs: vec![kmeans_cost(y, &z0, init)],
        centers: vec![init.clone()],
        assignments: vec![z0],
        iterations_run: 0,
    };
    let mut fixed = false;
    for s in 1..=iters {
        if fixed {
            path.centers.push(path.centers[s - 1].clone());
            path.assignments.push(path.assignments[s - 1].clone());
            path.costs.push(path.costs[s - 1]);
            continue;
        }
        let prev = &path.centers[s - 1];
        let z = assign_step(y, prev);
        let mu = update_step(y, &z, k, config.empty_cluster_policy, prev);
        let cost = kmeans_cost(y, &z, &mu);
        if config.early_stop_on_fixed_point && z == path.assignments[s - 1] && mu == *prev {
            fixed = true;
        }
        path.centers.push(mu);
        path.assignments.push(z);
        path.costs.push(cost);
        path.iterations_run = s;
    }
    Ok(path)
}

/// Metrics of one iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub centers: DMatrix<f64>,
    pub assignments: Vec<usize>,
    pub cost: f64,
    pub a_s: f64,
    pub g_s: f64,
    /// Absent when population centers are unknown or `Δ = 0`.
    pub gamma_s: Option<f64>,
    /// Best alignment: true label `l` corresponds to estimated `perm[l]`.
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub iterations: Vec<IterationRecord>,
    pub iterations_run: usize,
    /// Alignment achieving `A_s` at the final iteration.
    pub aligned_permutation: Vec<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("trajectory has iteration 0")
    }

    pub fn first(&self) -> &IterationRecord {
        &self.iterations[0]
    }

    /// CSV with header `iter,a_s,g_s,gamma_s,cost`; absent Γ_s is empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "a_s", "g_s", "gamma_s", "cost"])?;
        for (s, it) in self.iterations.iter().enumerate() {
            w.write_record([
                s.to_string(),
                it.a_s.to_string(),
                it.g_s.to_string(),
                it.gamma_s.map(|g| g.to_string()).unwrap_or_default(),
                it.cost.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Companion CSV `iter,cluster,x_1,..,x_r` with every iteration's centers.
    pub fn write_centers_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let r = self.first().centers.ncols();
        let mut header = vec!["iter".to_string(), "cluster".to_string()];
        header.extend((1..=r).map(|j| format!("x_{j}")));
        w.write_record(&header)?;
        for (s, it) in self.iterations.iter().enumerate() {
            for (c, row) in it.centers.row_iter().enumerate() {
                let mut rec = vec![s.to_string(), c.to_string()];
                rec.extend(row.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs Lloyd and scores every iteration against `labels` and, when given,
/// the population centers.
pub fn run_lloyd_with_truth(
    y: &DMatrix<f64>,
    init: &DMatrix<f64>,
    labels: &[usize],
    true_centers: Option<&DMatrix<f64>>,
    config: &LloydConfig,
) -> Result<Trajectory> {
    let k = init.nrows();
    if k < 2 {
        return Err(invalid("init", "need K >= 2 centers"));
    }
    if labels.len() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} points",
            labels.len(),
            y.nrows()
        )));
    }
    let delta = true_centers.map(|c| center_separation(c).0);
    let path = lloyd(y, init, config)?;
    let mut iterations = Vec::with_capacity(path.centers.len());
    for ((centers, assignments), cost) in path
        .centers
        .into_iter()
        .zip(path.assignments)
        .zip(path.costs)
    {
        let (a_s, perm) = misclustering_rate(&assignments, labels, k)?;
        let g_s = clusterwise_rate(&assignments, labels, k, &perm)?;
        let gamma_s = match (true_centers, delta) {
            (Some(tc), Some(d)) if d > 0.0 => Some(center_error(&centers, tc, d, &perm)?),
            _ => None,
        };
        iterations.push(IterationRecord {
            centers,
            assignments,
            cost,
            a_s,
            g_s,
            gamma_s,
            perm,
        });
    }
    let aligned_permutation = iterations.last().unwrap().perm.clone();
    Ok(Trajectory {
        iterations,
        iterations_run: path.iterations_run,
        aligned_permutation,
    })
}

/// Lloyd on the observed rows of a synthetic sample, scored against its
/// labels and population centers.
pub fn run_lloyd(
    sample: &LabeledSample,
    init: &DMatrix<f64>,
    config: &LloydConfig,
) -> Result<Trajectory> {
    run_lloyd_with_truth(
        sample.observed(),
        init,
        sample.labels(),
        Some(sample.centers()),
        config,
    )
}

fn confusion(z_hat: &[usize], z: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    if z_hat.len() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "label vectors of length {} and {}",
            z_hat.len(),
            z.len()
        )));
    }
    let mut c = vec![vec![0usize; k]; k];
    for (&e, &t) in z_hat.iter().zip(z) {
        if e >= k {
            return Err(Error::LabelOutOfRange { label: e, k });
        }
        if t >= k {
            return Err(Error::LabelOutOfRange { label: t, k });
        }
        c[t][e] += 1;
    }
    Ok(c)
}

/// `A = min_π (1/n) Σ 1{ẑ_i ≠ π(z_i)}` and the minimizing `π`
/// (true label `l` ↦ estimated label `π[l]`).
pub fn misclustering_rate(z_hat: &[usize], z: &[usize], k: usize) -> Result<(f64, Vec<usize>)> {
    let c = confusion(z_hat, z, k)?;
    let n = z.len();
    if n == 0 {
        return Err(invalid("z", "empty label vector"));
    }
    let (agree, perm) = if k <= EXHAUSTIVE_MAX_K {
        best_permutation_exhaustive(&c)
    } else {
        best_permutation_assignment(&c)
    };
    Ok(((n - agree) as f64 / n as f64, perm))
}

/// Lexicographically first permutation maximizing `Σ_l c[l][π(l)]`.
pub(crate) fn best_permutation_exhaustive(c: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let k = c.len();
    let mut best = (0usize, (0..k).collect::<Vec<_>>());
    let mut first = true;
    for perm in (0..k).permutations(k) {
        let agree: usize = perm.iter().enumerate().map(|(l, &m)| c[l][m]).sum();
        if first || agree > best.0 {
            best = (agree, perm);
            first = false;
        }
    }
    best
}

pub(crate) fn best_permutation_assignment(c: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let rows: Vec<Vec<i64>> = c
        .iter()
        .map(|r| r.iter().map(|&v| v as i64).collect())
        .collect();
    let weights = pathfinding::matrix::Matrix::from_rows(rows).expect("square confusion matrix");
    let (total, perm) = pathfinding::kuhn_munkres::kuhn_munkres(&weights);
    (total as usize, perm)
}

/// `G = max_k max{ Σ_{l≠k} n̂_lk / n̂_k , Σ_{l≠k} n̂_kl / n_k }` after aligning
/// estimated labels with `perm`. A ratio with zero denominator counts as 0
/// when its numerator is 0 and 1 otherwise.
pub fn clusterwise_rate(z_hat: &[usize], z: &[usize], k: usize, perm: &[usize]) -> Result<f64> {
    if perm.len() != k {
        return Err(invalid("perm", format!("expected length {k}, got {}", perm.len())));
    }
    let c = confusion(z_hat, z, k)?;
    // aligned[l][m] = #{z = l, ẑ aligned to m}
    let aligned = |l: usize, m: usize| c[l][perm[m]];
    let ratio = |num: usize, den: usize| -> f64 {
        if den == 0 {
            if num == 0 {
                0.0
            } else {
                1.0
            }
        } else {
            num as f64 / den as f64
        }
    };
    let mut g = 0.0_f64;
    for kk in 0..k {
        let est_size: usize = (0..k).map(|l| aligned(l, kk)).sum();
        let true_size: usize = (0..k).map(|m| aligned(kk, m)).sum();
        let received: usize = (0..k).filter(|&l| l != kk).map(|l| aligned(l, kk)).sum();
        let lost: usize = (0..k).filter(|&m| m != kk).map(|m| aligned(kk, m)).sum();
        g = g.max(ratio(received, est_size)).max(ratio(lost, true_size));
    }
    Ok(g)
}

/// `Γ = max_k ‖μ̂_{π(k)} − μ_k‖ / Δ`.
pub fn center_error(
    centers_hat: &DMatrix<f64>,
    true_centers: &DMatrix<f64>,
    delta: f64,
    perm: &[usize],
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    if centers_hat.shape() != true_centers.shape() || perm.len() != true_centers.nrows() {
        return Err(Error::DimensionMismatch("center matrices / permutation".into()));
    }
    let worst = (0..true_centers.nrows())
        .map(|k| (centers_hat.row(perm[k]) - true_centers.row(k)).norm())
        .fold(0.0, f64::max);
    Ok(worst / delta)
}
