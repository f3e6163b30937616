//! Ready-made mixture layouts used by the experiments.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::model::{
    apply_perturbation, sample_mixture, LabeledSample, MixtureSpec, NoiseModel,
    PerturbationMechanism,
};
use crate::rng::derive_seed;

/// Two centers at `±(Δ/2) e₁` in `r` dimensions.
pub fn axis_pair_centers(delta: f64, r: usize) -> Result<DMatrix<f64>> {
    if r == 0 {
        return Err(invalid("r", "must be at least 1"));
    }
    let mut c = DMatrix::zeros(2, r);
    c[(0, 0)] = -delta / 2.0;
    c[(1, 0)] = delta / 2.0;
    Ok(c)
}

/// Balanced Gaussian pair with separation `Δ = delta_over_sigma · sigma`.
pub fn gaussian_pair(delta_over_sigma: f64, sigma: f64, r: usize) -> Result<MixtureSpec> {
    MixtureSpec::balanced(
        axis_pair_centers(delta_over_sigma * sigma, r)?,
        NoiseModel::gaussian(sigma),
    )
}

/// Four noiseless clusters at `(±√2, ±3)`: the closest pairs sit side by
/// side with `Δ = 2√2`, and the two rows are 6 apart.
///
/// Rows: top-left, top-right, bottom-left, bottom-right.
pub fn figure_one_spec() -> MixtureSpec {
    let h = std::f64::consts::SQRT_2;
    let centers = DMatrix::from_row_slice(4, 2, &[-h, 3.0, h, 3.0, -h, -3.0, h, -3.0]);
    MixtureSpec::balanced(centers, NoiseModel::gaussian(0.0)).expect("valid layout")
}

/// Perturbation radius of the four-cluster scenario.
pub const FIGURE_ONE_EPS: f64 = 1.0;

/// One center between the two top clusters, two splitting the bottom-left
/// cluster, one on the bottom-right cluster.
pub fn figure_one_adversarial_init() -> DMatrix<f64> {
    let h = std::f64::consts::SQRT_2;
    DMatrix::from_row_slice(4, 2, &[0.0, 3.0, -h - 0.5, -3.0, -h + 0.5, -3.0, h, -3.0])
}

/// Noiseless four-cluster sample moved by independent perturbations of
/// norm at most one.
pub fn figure_one_sample(n: usize, seed: u64) -> Result<LabeledSample> {
    let clean = sample_mixture(&figure_one_spec(), n, seed)?;
    apply_perturbation(
        &clean,
        FIGURE_ONE_EPS,
        PerturbationMechanism::SphericalRandom,
        derive_seed(seed, 1),
    )
}
