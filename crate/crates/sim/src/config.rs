//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use perturb_lloyd::model::{MixtureSpec, NoiseFamily, PerturbationMechanism};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "PLLOYD_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MixtureLloyd,
    KmeansppSeparation,
    SigclustSizePower,
    SbmRecovery,
    NoisySbm,
    GramSpectral,
    MdsCluster,
    Rdpg,
    Dfm,
    Figure1,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MixtureLloyd => "mixture-lloyd",
            Self::KmeansppSeparation => "kmeanspp-separation",
            Self::SigclustSizePower => "sigclust-size-power",
            Self::SbmRecovery => "sbm-recovery",
            Self::NoisySbm => "noisy-sbm",
            Self::GramSpectral => "gram-spectral",
            Self::MdsCluster => "mds-cluster",
            Self::Rdpg => "rdpg",
            Self::Dfm => "dfm",
            Self::Figure1 => "figure1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    /// True centers moved by `init_offset · Δ`.
    #[default]
    Oracle,
    /// Best of `restarts` k-means++ seedings.
    Kmeanspp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    #[default]
    Iid,
    Var1,
}

/// Model parameters. Which ones are required depends on the kind; see
/// `docs/config.md`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<usize>,
    pub delta_over_sigma: Option<f64>,
    pub sigma: Option<f64>,
    pub noise_family: Option<NoiseFamily>,
    pub mixture: Option<MixtureSpec>,
    pub eps: Option<f64>,
    pub perturbation: Option<PerturbationMechanism>,
    pub init: Option<InitMethod>,
    pub init_offset: Option<f64>,
    pub max_iters: Option<usize>,
    pub restarts: Option<usize>,
    pub a_over_sigma: Option<f64>,
    pub n_sim: Option<usize>,
    pub level: Option<f64>,
    pub b0: Option<Vec<Vec<f64>>>,
    pub rho_n: Option<f64>,
    pub rho_scale: Option<f64>,
    pub alpha_n: Option<f64>,
    pub beta_n: Option<f64>,
    pub embed_dim: Option<usize>,
    pub t_len: Option<usize>,
    pub noise_var: Option<f64>,
    pub factor_model: Option<FactorKind>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Adds a `wall_time_ms` column; off by default so output is
    /// byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub params: Params,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn missing(field: &'static str) -> SimError {
    SimError::config(field, "required for this kind")
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, replicates: usize, seed: u64) -> Self {
        Self {
            kind,
            replicates,
            seed,
            output_dir: default_output_dir(),
            record_timing: false,
            params: Params::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> SimResult<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `output_dir`, unless overridden by the environment.
    pub fn resolved_output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output_dir.clone())
    }

    /// Checks every parameter the kind needs before any work starts.
    pub fn validate(&self) -> SimResult<()> {
        use ExperimentKind::*;
        let p = &self.params;
        if self.replicates == 0 {
            return Err(SimError::config("replicates", "must be at least 1"));
        }
        let n = p.n.ok_or_else(|| missing("params.n"))?;
        positive_opt("params.sigma", p.sigma, true)?;
        positive_opt("params.delta_over_sigma", p.delta_over_sigma, false)?;
        positive_opt("params.eps", p.eps, true)?;
        positive_opt("params.init_offset", p.init_offset, true)?;
        if p.restarts == Some(0) {
            return Err(SimError::config("params.restarts", "must be at least 1"));
        }
        if p.max_iters == Some(0) {
            return Err(SimError::config("params.max_iters", "must be at least 1"));
        }
        let k = p.k.unwrap_or(2);
        if k < 2 {
            return Err(SimError::config("params.k", "must be at least 2"));
        }
        if n < k {
            return Err(SimError::config("params.n", "must be at least k"));
        }
        let needs_mixture = matches!(self.kind, MixtureLloyd | KmeansppSeparation | GramSpectral | MdsCluster | Dfm);
        if needs_mixture && p.mixture.is_none() && p.delta_over_sigma.is_none() {
            return Err(missing("params.delta_over_sigma"));
        }
        match self.kind {
            SigclustSizePower => {
                p.r.ok_or_else(|| missing("params.r"))?;
                let a = p.a_over_sigma.ok_or_else(|| missing("params.a_over_sigma"))?;
                positive_opt("params.a_over_sigma", Some(a), true)?;
                let n_sim = p.n_sim.ok_or_else(|| missing("params.n_sim"))?;
                if n_sim < perturb_lloyd::sigclust::MIN_N_SIM {
                    return Err(SimError::config("params.n_sim", "must be at least 19"));
                }
            }
            SbmRecovery | NoisySbm => {
                match (p.rho_n, p.rho_scale) {
                    (None, None) => return Err(missing("params.rho_n")),
                    (Some(_), Some(_)) => {
                        return Err(SimError::config("params.rho_scale", "give rho_n or rho_scale, not both"))
                    }
                    (Some(v), None) | (None, Some(v)) => positive_opt("params.rho_n", Some(v), true)?,
                }
                if self.kind == NoisySbm {
                    for (name, v) in [("params.alpha_n", p.alpha_n), ("params.beta_n", p.beta_n)] {
                        let v = v.ok_or_else(|| missing(name))?;
                        if !(0.0..1.0).contains(&v) {
                            return Err(SimError::config(name, "must lie in [0, 1)"));
                        }
                    }
                }
            }
            Dfm => {
                let t = p.t_len.ok_or_else(|| missing("params.t_len"))?;
                if t < 2 {
                    return Err(SimError::config("params.t_len", "must be at least 2"));
                }
                positive_opt("params.noise_var", p.noise_var, true)?;
                if p.factor_model == Some(FactorKind::Var1) {
                    let phi = p.phi.ok_or_else(|| missing("params.phi"))?;
                    if !(phi.abs() < 1.0) {
                        return Err(SimError::config("params.phi", "|phi| must be below 1"));
                    }
                }
            }
            _ => {}
        }
        if let Some(level) = p.level {
            if !(level > 0.0 && level < 1.0) {
                return Err(SimError::config("params.level", "must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

fn positive_opt(field: &'static str, v: Option<f64>, allow_zero: bool) -> SimResult<()> {
    match v {
        Some(x) if !x.is_finite() || x < 0.0 || (!allow_zero && x == 0.0) => Err(SimError::config(
            field,
            if allow_zero { "must be finite and nonnegative" } else { "must be finite and positive" },
        )),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"mixture-lloyd\"\nreplicates = 3\nseed = 7\n[params]\nn = 100\ndelta_over_sigma = 6.0\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::MixtureLloyd);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_field_is_named() {
        let err = ExperimentConfig::from_toml_str("kind = \"noisy-sbm\"\nreplicates = 1\nseed = 1\n[params]\nn = 50\nrho_n = 0.1\n")
            .unwrap_err();
        assert!(err.to_string().contains("params.alpha_n"), "{err}");
        let err = ExperimentConfig::from_toml_str("kind = \"dfm\"\nreplicates = 0\nseed = 1\n").unwrap_err();
        assert!(err.to_string().contains("replicates"));
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = ExperimentConfig::from_toml_str("kind = \"rdpg\"\nreplicates = 1\nseed = 1\n[params]\nn = 5\nbogus = 1\n")
            .unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn inline_mixture() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
kind = "mixture-lloyd"
replicates = 1
seed = 1
[params]
n = 30
[params.mixture]
weights = [0.5, 0.5]
centers = [[0.0, 0.0], [5.0, 0.0]]
[params.mixture.noise]
family = "isotropic-gaussian"
sigma = 1.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.params.mixture.unwrap().k(), 2);
    }
}
