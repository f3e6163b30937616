//! k-means with k-means++ restarts, keeping the lowest-cost Lloyd run.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::lloyd::{lloyd, LloydConfig};
use crate::seeding::kmeanspp_seed_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub lloyd: LloydConfig,
}

impl KMeansConfig {
    /// Runs each restart to convergence (capped at 100 iterations).
    pub fn new(k: usize, restarts: usize) -> Self {
        Self {
            k,
            restarts,
            lloyd: LloydConfig::with_max_iters(100),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centers: DMatrix<f64>,
    pub assignments: Vec<usize>,
    pub cost: f64,
    /// Seed indices of the winning restart.
    pub init_indices: Vec<usize>,
}

/// Best of `restarts` k-means++-seeded Lloyd runs; ties keep the earliest.
pub fn kmeans<R: Rng + ?Sized>(y: &DMatrix<f64>, config: &KMeansConfig, rng: &mut R) -> Result<KMeansFit> {
    if config.restarts == 0 {
        return Err(invalid("restarts", "must be at least 1"));
    }
    let mut best: Option<KMeansFit> = None;
    for _ in 0..config.restarts {
        let seeding = kmeanspp_seed_with(y, config.k, rng)?;
        let path = lloyd(y, &seeding.centers, &config.lloyd)?;
        let cost = path.final_cost();
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(KMeansFit {
                centers: path.final_centers().clone(),
                assignments: path.final_assignments().to_vec(),
                cost,
                init_indices: seeding.chosen_indices,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn separates_two_blobs() {
        let y = DMatrix::from_column_slice(6, 1, &[0.0, 0.1, 0.2, 10.0, 10.1, 10.2]);
        let fit = kmeans(&y, &KMeansConfig::new(2, 5), &mut rng_from_seed(1)).unwrap();
        assert_eq!(fit.assignments[0], fit.assignments[2]);
        assert_ne!(fit.assignments[0], fit.assignments[3]);
        assert!(fit.cost < 0.01);
    }
}
