//! Lloyd's algorithm under perturbation: an instrumented Lloyd engine, the
//! misclustering functionals it is judged by, k-means++ seeding, SigClust,
//! and spectral-embedding pipelines that feed perturbed point clouds into
//! Lloyd.

pub mod embeddings;
pub mod error;
pub mod kmeans;
pub mod linalg;
pub mod lloyd;
pub mod model;
pub mod par;
pub mod rng;
pub mod scenarios;
pub mod seeding;
pub mod sigclust;

pub use error::{Error, Result};
