//! Replicated experiment execution and per-replicate records.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use perturb_lloyd::embeddings::{
    adjacency_spectral_embedding, ase_scaled, cmds_embedding, gen_dfm, gen_noisy_sbm, gen_rdpg,
    gen_sbm, hollowed_gram_embedding, pca_loadings, CmdsInput, DfmFactorModel, SbmSpec,
};
use perturb_lloyd::kmeans::{kmeans, KMeansConfig};
use perturb_lloyd::lloyd::{run_lloyd, run_lloyd_with_truth, LloydConfig, Trajectory};
use perturb_lloyd::model::{
    apply_perturbation, sample_mixture, theorem_one_bound, MixtureSpec, NoiseFamily, NoiseModel,
    PerturbationMechanism,
};
use perturb_lloyd::par::map_indices;
use perturb_lloyd::rng::{derive_seed, rng_from_seed};
use perturb_lloyd::scenarios::{
    axis_pair_centers, figure_one_adversarial_init, figure_one_sample, figure_one_spec,
    FIGURE_ONE_EPS,
};
use perturb_lloyd::seeding::{kmeanspp_seed, oracle_init, seed_separation_event};
use perturb_lloyd::sigclust::{sigclust_auto, Clusterer};

use crate::config::{ExperimentConfig, ExperimentKind, FactorKind, InitMethod, Params};
use crate::error::{SimError, SimResult};

/// Frozen record columns, in order. `wall_time_ms` follows when timing is on.
pub const RECORD_COLUMNS: [&str; 12] = [
    "replicate",
    "seed",
    "a_s",
    "g_s",
    "gamma_s",
    "iterations",
    "bound",
    "bound_satisfied",
    "p_value",
    "seed_separated",
    "exact_recovery",
    "reference_a_s",
];

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub a_s: Option<f64>,
    pub g_s: Option<f64>,
    pub gamma_s: Option<f64>,
    pub iterations: Option<usize>,
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub p_value: Option<f64>,
    pub seed_separated: Option<bool>,
    pub exact_recovery: Option<bool>,
    /// Terminal `A_s` of a reference run (oracle initialization).
    pub reference_a_s: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

impl ReplicateRecord {
    fn new(replicate: usize, seed: u64) -> Self {
        Self {
            replicate,
            seed,
            ..Self::default()
        }
    }

    fn with_trajectory(mut self, t: &Trajectory) -> Self {
        let last = t.last();
        self.a_s = Some(last.a_s);
        self.g_s = Some(last.g_s);
        self.gamma_s = last.gamma_s;
        self.iterations = Some(t.iterations_run);
        self
    }

    fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self.bound_satisfied = self.a_s.map(|a| a <= bound);
        self
    }

    pub fn fields(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.replicate.to_string(),
            self.seed.to_string(),
            opt(self.a_s),
            opt(self.g_s),
            opt(self.gamma_s),
            opt(self.iterations),
            opt(self.bound),
            opt(self.bound_satisfied),
            opt(self.p_value),
            opt(self.seed_separated),
            opt(self.exact_recovery),
            opt(self.reference_a_s),
        ]
    }
}

/// Aggregates over the replicates of one experiment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub kind: String,
    pub replicates: usize,
    pub mean_a_s: Option<f64>,
    pub max_a_s: Option<f64>,
    pub bound: Option<f64>,
    pub bound_satisfied_rate: Option<f64>,
    /// `1 − δ(n, σ, Δ, ε)`.
    pub bound_target_rate: Option<f64>,
    pub level: Option<f64>,
    pub rejection_rate: Option<f64>,
    pub seed_separation_rate: Option<f64>,
    pub exact_recovery_rate: Option<f64>,
    pub mean_reference_a_s: Option<f64>,
    /// Fraction of replicates with `a_s > reference_a_s`.
    pub worse_than_reference_rate: Option<f64>,
}

fn rate(flags: impl Iterator<Item = bool>) -> Option<f64> {
    let (mut hit, mut tot) = (0usize, 0usize);
    for f in flags {
        tot += 1;
        hit += f as usize;
    }
    (tot > 0).then(|| hit as f64 / tot as f64)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl Summary {
    fn from_records(cfg: &ExperimentConfig, records: &[ReplicateRecord], target: Option<f64>) -> Self {
        let level = (cfg.kind == ExperimentKind::SigclustSizePower)
            .then(|| cfg.params.level.unwrap_or(DEFAULT_LEVEL));
        Self {
            kind: cfg.kind.name().to_string(),
            replicates: records.len(),
            mean_a_s: mean(records.iter().filter_map(|r| r.a_s)),
            max_a_s: records.iter().filter_map(|r| r.a_s).reduce(f64::max),
            bound: records.iter().find_map(|r| r.bound),
            bound_satisfied_rate: rate(records.iter().filter_map(|r| r.bound_satisfied)),
            bound_target_rate: target,
            level,
            rejection_rate: level.and_then(|l| rate(records.iter().filter_map(|r| r.p_value.map(|p| p <= l)))),
            seed_separation_rate: rate(records.iter().filter_map(|r| r.seed_separated)),
            exact_recovery_rate: rate(records.iter().filter_map(|r| r.exact_recovery)),
            mean_reference_a_s: mean(records.iter().filter_map(|r| r.reference_a_s)),
            worse_than_reference_rate: rate(
                records
                    .iter()
                    .filter_map(|r| Some(r.a_s? > r.reference_a_s?)),
            ),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("kind: {}\nreplicates: {}\n", self.kind, self.replicates);
        let mut line = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                out.push_str(&format!("{name}: {v:.6}\n"));
            }
        };
        line("mean_a_s", self.mean_a_s);
        line("max_a_s", self.max_a_s);
        line("bound", self.bound);
        line("bound_satisfied_rate", self.bound_satisfied_rate);
        line("bound_target_rate (1 - delta)", self.bound_target_rate);
        line("level", self.level);
        line("rejection_rate", self.rejection_rate);
        line("seed_separation_rate", self.seed_separation_rate);
        line("exact_recovery_rate", self.exact_recovery_rate);
        line("mean_reference_a_s", self.mean_reference_a_s);
        line("worse_than_reference_rate", self.worse_than_reference_rate);
        out
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<ReplicateRecord>,
    pub summary: Summary,
}

impl ExperimentOutput {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = RECORD_COLUMNS.iter().map(|s| s.to_string()).collect();
        if self.config.record_timing {
            h.push("wall_time_ms".into());
        }
        h
    }

    pub fn row(&self, r: &ReplicateRecord) -> Vec<String> {
        let mut f = r.fields();
        if self.config.record_timing {
            f.push(r.wall_time_ms.map(|v| v.to_string()).unwrap_or_default());
        }
        f
    }

    pub fn write_records_csv<W: Write>(&self, out: W) -> SimResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.records {
            w.write_record(self.row(r))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn records_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_records_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Writes `<stem>.records.csv` and `<stem>.summary.txt` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> SimResult<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let rec = dir.join(format!("{stem}.records.csv"));
        let sum = dir.join(format!("{stem}.summary.txt"));
        self.write_records_csv(std::fs::File::create(&rec)?)?;
        std::fs::write(&sum, self.summary.to_text())?;
        Ok((rec, sum))
    }
}

/// Runs every replicate; replicate `i` uses seed `derive_seed(seed, i)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> SimResult<ExperimentOutput> {
    cfg.validate()?;
    let records = map_indices(cfg.replicates, |i| {
        let seed = derive_seed(cfg.seed, i as u64);
        let start = cfg.record_timing.then(Instant::now);
        let mut rec = run_replicate(cfg, i, seed)?;
        rec.wall_time_ms = start.map(|s| s.elapsed().as_secs_f64() * 1e3);
        Ok(rec)
    })
    .into_iter()
    .collect::<SimResult<Vec<_>>>()?;
    let target = bound_target_rate(cfg)?;
    let summary = Summary::from_records(cfg, &records, target);
    Ok(ExperimentOutput {
        config: cfg.clone(),
        records,
        summary,
    })
}

/// Runs a single replicate with an explicit seed.
pub fn run_replicate(cfg: &ExperimentConfig, replicate: usize, seed: u64) -> SimResult<ReplicateRecord> {
    use ExperimentKind::*;
    let p = &cfg.params;
    let rec = ReplicateRecord::new(replicate, seed);
    match cfg.kind {
        MixtureLloyd => mixture_lloyd(p, rec),
        KmeansppSeparation => kmeanspp_separation(p, rec),
        SigclustSizePower => sigclust_size_power(p, rec),
        SbmRecovery | NoisySbm => sbm_recovery(cfg.kind, p, rec),
        GramSpectral | MdsCluster => gram_or_mds(cfg.kind, p, rec),
        Rdpg => rdpg(p, rec),
        Dfm => dfm(p, rec),
        Figure1 => figure1(p, rec),
    }
}

fn n_of(p: &Params) -> usize {
    p.n.expect("validated")
}

fn sub(seed: u64, stream: u64) -> u64 {
    derive_seed(seed, stream)
}

fn lloyd_config(p: &Params) -> LloydConfig {
    LloydConfig {
        max_iters: p.max_iters,
        ..LloydConfig::default()
    }
}

fn restarts(p: &Params) -> usize {
    p.restarts.unwrap_or(DEFAULT_RESTARTS)
}

/// The configured mixture: either the inline spec or `K` centers with
/// minimum separation `Δ = delta_over_sigma · σ` (an axis pair for `K = 2`,
/// scaled coordinate vectors otherwise).
pub fn mixture_spec(p: &Params) -> SimResult<MixtureSpec> {
    if let Some(m) = &p.mixture {
        return Ok(m.clone());
    }
    let sigma = p.sigma.unwrap_or(1.0);
    let delta = p.delta_over_sigma.expect("validated") * sigma;
    let k = p.k.unwrap_or(2);
    let r = p.r.unwrap_or(2);
    let centers = if k == 2 {
        axis_pair_centers(delta, r)?
    } else {
        if r < k {
            return Err(SimError::config("params.r", "must be at least k when k > 2"));
        }
        DMatrix::from_fn(k, r, |i, j| if i == j { delta / 2f64.sqrt() } else { 0.0 })
    };
    let noise = NoiseModel {
        family: p.noise_family.unwrap_or(NoiseFamily::IsotropicGaussian),
        sigma,
    };
    Ok(MixtureSpec::balanced(centers, noise)?)
}

fn bound_target_rate(cfg: &ExperimentConfig) -> SimResult<Option<f64>> {
    if !matches!(cfg.kind, ExperimentKind::MixtureLloyd | ExperimentKind::KmeansppSeparation) {
        return Ok(None);
    }
    let spec = mixture_spec(&cfg.params)?;
    let (delta, _) = spec.separation();
    if !(delta > 0.0) {
        return Ok(None);
    }
    let b = theorem_one_bound(delta, spec.sigma(), cfg.params.eps.unwrap_or(0.0))?;
    Ok(Some((1.0 - b.failure_probability(n_of(&cfg.params))).max(0.0)))
}

fn mixture_bound(spec: &MixtureSpec, eps: f64) -> SimResult<Option<f64>> {
    let (delta, _) = spec.separation();
    if !(delta > 0.0) {
        return Ok(None);
    }
    Ok(Some(theorem_one_bound(delta, spec.sigma(), eps)?.as_bound))
}

/// Best-of-restarts k-means++ seeding followed by an instrumented Lloyd run
/// from the winning seeds.
fn cluster_with_truth(
    y: &DMatrix<f64>,
    labels: &[usize],
    k: usize,
    p: &Params,
    true_centers: Option<&DMatrix<f64>>,
    seed: u64,
) -> SimResult<Trajectory> {
    let cfg = lloyd_config(p);
    let fit = kmeans(
        y,
        &KMeansConfig {
            k,
            restarts: restarts(p),
            lloyd: cfg,
        },
        &mut rng_from_seed(seed),
    )?;
    let init = DMatrix::from_fn(k, y.ncols(), |i, j| y[(fit.init_indices[i], j)]);
    Ok(run_lloyd_with_truth(y, &init, labels, true_centers, &cfg)?)
}

fn mixture_lloyd(p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let spec = mixture_spec(p)?;
    let seed = rec.seed;
    let eps = p.eps.unwrap_or(0.0);
    let mut sample = sample_mixture(&spec, n_of(p), sub(seed, 0))?;
    if eps > 0.0 {
        let mech = p.perturbation.unwrap_or(PerturbationMechanism::SphericalRandom);
        sample = apply_perturbation(&sample, eps, mech, sub(seed, 1))?;
    }
    let traj = match p.init.unwrap_or_default() {
        InitMethod::Oracle => {
            let init = oracle_init(&spec, p.init_offset.unwrap_or(0.2), sub(seed, 2))?;
            run_lloyd(&sample, &init, &lloyd_config(p))?
        }
        InitMethod::Kmeanspp => cluster_with_truth(
            sample.observed(),
            sample.labels(),
            spec.k(),
            p,
            Some(spec.centers()),
            sub(seed, 2),
        )?,
    };
    let rec = rec.with_trajectory(&traj);
    Ok(match mixture_bound(&spec, eps)? {
        Some(b) => rec.with_bound(b),
        None => rec,
    })
}

fn kmeanspp_separation(p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let spec = mixture_spec(p)?;
    let sample = sample_mixture(&spec, n_of(p), sub(rec.seed, 0))?;
    let seeding = kmeanspp_seed(sample.observed(), spec.k(), sub(rec.seed, 1))?;
    let separated = seed_separation_event(&seeding.chosen_indices, sample.labels());
    let traj = run_lloyd(&sample, &seeding.centers, &lloyd_config(p))?;
    let mut rec = rec.with_trajectory(&traj);
    rec.seed_separated = Some(separated);
    Ok(match mixture_bound(&spec, 0.0)? {
        Some(b) => rec.with_bound(b),
        None => rec,
    })
}

fn sigclust_size_power(p: &Params, mut rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let sigma = p.sigma.unwrap_or(1.0);
    let a = p.a_over_sigma.expect("validated") * sigma;
    let r = p.r.expect("validated");
    let spec = MixtureSpec::balanced(axis_pair_centers(2.0 * a, r)?, NoiseModel::gaussian(sigma))?;
    let sample = sample_mixture(&spec, n_of(p), sub(rec.seed, 0))?;
    let report = sigclust_auto(
        sample.observed(),
        p.n_sim.expect("validated"),
        &Clusterer { restarts: restarts(p) },
        sub(rec.seed, 1),
    )?;
    rec.p_value = Some(report.p_value);
    Ok(rec)
}

fn default_b0() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0])
}

fn b0_of(p: &Params) -> SimResult<DMatrix<f64>> {
    match &p.b0 {
        None => Ok(default_b0()),
        Some(rows) => {
            let k = rows.len();
            if k == 0 || rows.iter().any(|r| r.len() != k) {
                return Err(SimError::config("params.b0", "must be a square matrix"));
            }
            Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
        }
    }
}

/// `ρ_n`, given directly or as `rho_scale · ln n / n`.
pub fn rho_of(p: &Params) -> f64 {
    let n = n_of(p) as f64;
    p.rho_n
        .unwrap_or_else(|| p.rho_scale.expect("validated") * n.ln() / n)
}

fn sbm_recovery(kind: ExperimentKind, p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let b0 = b0_of(p)?;
    let k = b0.nrows();
    let spec = SbmSpec::balanced(n_of(p), b0, rho_of(p));
    let mut g = gen_sbm(&spec, sub(rec.seed, 0))?;
    if kind == ExperimentKind::NoisySbm {
        g = gen_noisy_sbm(
            &g,
            p.alpha_n.expect("validated"),
            p.beta_n.expect("validated"),
            sub(rec.seed, 1),
        )?;
    }
    let emb = adjacency_spectral_embedding(&g, p.embed_dim.unwrap_or(k))?;
    let traj = cluster_with_truth(&emb, &g.labels, k, p, None, sub(rec.seed, 2))?;
    let mut rec = rec.with_trajectory(&traj);
    rec.exact_recovery = Some(traj.last().a_s == 0.0);
    Ok(rec)
}

fn gram_or_mds(kind: ExperimentKind, p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let spec = mixture_spec(p)?;
    let k = spec.k();
    let sample = sample_mixture(&spec, n_of(p), sub(rec.seed, 0))?;
    let emb = if kind == ExperimentKind::GramSpectral {
        hollowed_gram_embedding(sample.observed(), p.embed_dim.unwrap_or(k))?
    } else {
        let d = p.embed_dim.unwrap_or(k - 1);
        cmds_embedding(&CmdsInput::Points(sample.observed().clone()), d, true)?
    };
    let traj = cluster_with_truth(&emb, sample.labels(), k, p, None, sub(rec.seed, 1))?;
    let mut rec = rec.with_trajectory(&traj);
    rec.exact_recovery = Some(traj.last().a_s == 0.0);
    Ok(rec)
}

/// Default latent blobs for RDPG experiments; all inner products lie well
/// inside `(0, 1)` for small spreads.
fn default_rdpg_spec(p: &Params) -> SimResult<MixtureSpec> {
    let centers = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.3, 0.6]);
    Ok(MixtureSpec::balanced(
        centers,
        NoiseModel::gaussian(p.sigma.unwrap_or(0.03)),
    )?)
}

fn rdpg(p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let spec = match &p.mixture {
        Some(m) => m.clone(),
        None => default_rdpg_spec(p)?,
    };
    let sample = sample_mixture(&spec, n_of(p), sub(rec.seed, 0))?;
    let g = gen_rdpg(sample.observed(), sub(rec.seed, 1))?;
    let emb = ase_scaled(&g, p.embed_dim.unwrap_or(spec.dim()))?;
    let traj = cluster_with_truth(&emb, sample.labels(), spec.k(), p, None, sub(rec.seed, 2))?;
    let mut rec = rec.with_trajectory(&traj);
    rec.exact_recovery = Some(traj.last().a_s == 0.0);
    Ok(rec)
}

pub const DEFAULT_DFM_NOISE_VAR: f64 = 0.25;

fn dfm(p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let spec = mixture_spec(p)?;
    let n = n_of(p);
    let loadings = sample_mixture(&spec, n, sub(rec.seed, 0))?;
    let factor_model = match p.factor_model.unwrap_or_default() {
        FactorKind::Iid => DfmFactorModel::IidGaussian,
        FactorKind::Var1 => DfmFactorModel::Var1 {
            phi: p.phi.expect("validated"),
        },
    };
    let noise = vec![p.noise_var.unwrap_or(DEFAULT_DFM_NOISE_VAR); n];
    let x = gen_dfm(
        loadings.observed(),
        p.t_len.expect("validated"),
        factor_model,
        &noise,
        sub(rec.seed, 1),
    )?;
    let lh = pca_loadings(&x, p.embed_dim.unwrap_or(spec.dim()))?;
    let traj = cluster_with_truth(&lh, loadings.labels(), spec.k(), p, None, sub(rec.seed, 2))?;
    let mut rec = rec.with_trajectory(&traj);
    rec.exact_recovery = Some(traj.last().a_s == 0.0);
    Ok(rec)
}

fn figure1(p: &Params, rec: ReplicateRecord) -> SimResult<ReplicateRecord> {
    let sample = figure_one_sample(n_of(p), rec.seed)?;
    let cfg = lloyd_config(p);
    let adversarial = run_lloyd(&sample, &figure_one_adversarial_init(), &cfg)?;
    let oracle = run_lloyd(&sample, sample.centers(), &cfg)?;
    let (delta, _) = figure_one_spec().separation();
    let bound = theorem_one_bound(delta, 0.0, FIGURE_ONE_EPS)?.as_bound;
    let mut rec = rec.with_trajectory(&adversarial).with_bound(bound);
    rec.reference_a_s = Some(oracle.last().a_s);
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ExperimentKind, reps: usize, params: Params) -> ExperimentConfig {
        ExperimentConfig {
            params,
            ..ExperimentConfig::new(kind, reps, 42)
        }
    }

    #[test]
    fn deterministic_bytes() {
        let c = cfg(
            ExperimentKind::MixtureLloyd,
            1,
            Params { n: Some(200), delta_over_sigma: Some(6.0), ..Params::default() },
        );
        assert_eq!(run_experiment(&c).unwrap().records_csv(), run_experiment(&c).unwrap().records_csv());
    }

    #[test]
    fn records_do_not_depend_on_order() {
        let c = cfg(
            ExperimentKind::KmeansppSeparation,
            5,
            Params { n: Some(80), delta_over_sigma: Some(5.0), ..Params::default() },
        );
        let out = run_experiment(&c).unwrap();
        for i in (0..5).rev() {
            let r = run_replicate(&c, i, derive_seed(42, i as u64)).unwrap();
            assert_eq!(r, out.records[i]);
        }
    }

    #[test]
    fn bound_column_matches_formula() {
        let c = cfg(
            ExperimentKind::MixtureLloyd,
            3,
            Params { n: Some(100), delta_over_sigma: Some(5.0), sigma: Some(2.0), eps: Some(0.3), ..Params::default() },
        );
        let out = run_experiment(&c).unwrap();
        let want = theorem_one_bound(10.0, 2.0, 0.3).unwrap().as_bound;
        for r in &out.records {
            assert!((r.bound.unwrap() - want).abs() <= 1e-12);
            assert_eq!(r.bound_satisfied, Some(r.a_s.unwrap() <= r.bound.unwrap()));
        }
    }

    #[test]
    fn header_is_frozen() {
        let mut c = cfg(ExperimentKind::Figure1, 1, Params { n: Some(40), ..Params::default() });
        let out = run_experiment(&c).unwrap();
        assert!(out.records_csv().starts_with(
            "replicate,seed,a_s,g_s,gamma_s,iterations,bound,bound_satisfied,p_value,seed_separated,exact_recovery,reference_a_s\n"
        ));
        c.record_timing = true;
        let out = run_experiment(&c).unwrap();
        assert!(out.records_csv().lines().next().unwrap().ends_with(",wall_time_ms"));
    }

    #[test]
    fn every_kind_runs() {
        use ExperimentKind::*;
        let base = Params {
            n: Some(60),
            delta_over_sigma: Some(6.0),
            r: Some(3),
            a_over_sigma: Some(3.0),
            n_sim: Some(19),
            restarts: Some(2),
            rho_scale: Some(5.0),
            alpha_n: Some(0.01),
            beta_n: Some(0.02),
            t_len: Some(200),
            ..Params::default()
        };
        for kind in [MixtureLloyd, KmeansppSeparation, SigclustSizePower, SbmRecovery, NoisySbm, GramSpectral, MdsCluster, Rdpg, Dfm, Figure1] {
            let out = run_experiment(&cfg(kind, 2, base.clone())).unwrap();
            assert_eq!(out.records.len(), 2, "{kind:?}");
            assert!(!out.summary.to_text().is_empty());
        }
    }
}
