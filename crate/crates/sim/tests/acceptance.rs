//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails or exceeds its runtime limit.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use perturb_lloyd::embeddings::{cmds_embedding, CmdsInput};
use perturb_lloyd::linalg::{
    double_center, spectral_norm, squared_distances, sym_eig, EigenOrdering, SymmetricMatrix,
};
use perturb_lloyd::lloyd::{
    center_error, lloyd, misclustering_rate, partition_cost, run_lloyd, run_lloyd_with_truth, update_step,
    EmptyClusterPolicy, LloydConfig,
};
use perturb_lloyd::model::{
    apply_perturbation, check_initial_condition, sample_mixture, theorem_one_bound, InitialCondition,
    ModelFunctionals, PerturbationMechanism,
};
use perturb_lloyd::rng::{derive_seed, rng_from_seed};
use perturb_lloyd::scenarios::{
    figure_one_adversarial_init, figure_one_sample, gaussian_pair, FIGURE_ONE_EPS,
};
use perturb_lloyd::seeding::{kmeanspp_seed, kmeanspp_seed_with};
use perturb_lloyd_sim::config::{ExperimentConfig, ExperimentKind, FactorKind, Params};
use perturb_lloyd_sim::{run_experiment, sweep};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Outcome of one criterion: pass flag and a one-line measurement summary.
type Outcome = (bool, String);

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn cfg(kind: ExperimentKind, replicates: usize, seed: u64, params: Params) -> ExperimentConfig {
    ExperimentConfig {
        params,
        ..ExperimentConfig::new(kind, replicates, seed)
    }
}

fn c1_bound_unperturbed() -> Outcome {
    let c = cfg(
        ExperimentKind::MixtureLloyd,
        200,
        101,
        Params {
            n: Some(500),
            r: Some(2),
            delta_over_sigma: Some(6.0),
            sigma: Some(1.0),
            eps: Some(0.0),
            init_offset: Some(0.2),
            ..Params::default()
        },
    );
    let out = run_experiment(&c).unwrap();
    let want = (-36.0f64 / 16.0).exp();
    let bound = out.summary.bound.unwrap();
    let rate = out.summary.bound_satisfied_rate.unwrap();
    (
        (bound - want).abs() <= 1e-12 && rate >= 0.95,
        format!("bound {bound:.5}, satisfied {rate:.3} (need >= 0.95), mean A_s {:.5}", out.summary.mean_a_s.unwrap()),
    )
}

fn c2_bound_perturbed() -> Outcome {
    let (delta, sigma, alpha) = (6.0f64, 1.0f64, 0.5f64);
    let eps = 0.05 * delta * alpha.sqrt();
    let params = Params {
        n: Some(500),
        r: Some(2),
        delta_over_sigma: Some(delta / sigma),
        sigma: Some(sigma),
        eps: Some(eps),
        perturbation: Some(PerturbationMechanism::SharedDirection),
        init_offset: Some(0.2),
        ..Params::default()
    };
    // ρ_ε = √α Δ / ε is about 20 here; "large" is taken as ρ_ε ≥ 10√K.
    let spec = gaussian_pair(delta / sigma, sigma, 2).unwrap();
    let s = apply_perturbation(&sample_mixture(&spec, 500, 5).unwrap(), eps, PerturbationMechanism::SharedDirection, 6)
        .unwrap();
    let f = ModelFunctionals::of_sample(&s).unwrap();
    let rho_large = f.rho_eps >= 10.0 * 2f64.sqrt();

    let out = run_experiment(&cfg(ExperimentKind::MixtureLloyd, 200, 102, params)).unwrap();
    let want = (-delta * delta / (16.0 * sigma * sigma))
        .exp()
        .max((-delta * delta / (8.0 * eps * sigma)).exp());
    let bound = out.summary.bound.unwrap();
    let rate = out.summary.bound_satisfied_rate.unwrap();
    (
        (bound - want).abs() <= 1e-12 && rate >= 0.95 && rho_large,
        format!("eps {eps:.4}, rho_eps {:.1}, bound {bound:.5}, satisfied {rate:.3} (need >= 0.95)", f.rho_eps),
    )
}

fn c3_figure_one() -> Outcome {
    let reps = 50;
    let n = 200;
    let mut ok = 0;
    let mut min_adv = f64::INFINITY;
    for b in 0..reps {
        let s = figure_one_sample(n, derive_seed(103, b)).unwrap();
        let cfg = LloydConfig::with_max_iters(100);
        let init = figure_one_adversarial_init();
        let adv = run_lloyd(&s, &init, &cfg).unwrap();
        let orc = run_lloyd(&s, s.centers(), &cfg).unwrap();
        let f = ModelFunctionals::of_sample(&s).unwrap();
        let gamma0 = center_error(&init, s.centers(), f.delta, &adv.first().perm).unwrap();
        let violated = check_initial_condition(Some(adv.first().g_s), Some(gamma0), &f, 0.0).unwrap()
            == InitialCondition::Unsatisfied;
        let fixed = adv.iterations_run < 100;
        let a = adv.last().a_s;
        min_adv = min_adv.min(a);
        ok += (violated && fixed && a >= 0.2 && orc.last().a_s == 0.0) as usize;
    }
    let bound = theorem_one_bound(2.0 * 2f64.sqrt(), 0.0, FIGURE_ONE_EPS).unwrap().as_bound;
    (
        ok == reps as usize,
        format!("{ok}/{reps} trapped with oracle exact; min adversarial A_s {min_adv:.3}; bound at sigma=0 is {bound}"),
    )
}

fn c4_seed_separation() -> Outcome {
    let template = cfg(
        ExperimentKind::KmeansppSeparation,
        1000,
        104,
        Params {
            n: Some(200),
            r: Some(2),
            delta_over_sigma: Some(4.0),
            max_iters: Some(5),
            ..Params::default()
        },
    );
    let out = sweep(&template, "delta_over_sigma", &[4.0, 6.0, 10.0, 20.0]).unwrap();
    let rates: Vec<f64> = out
        .points
        .iter()
        .map(|(_, o)| o.summary.seed_separation_rate.unwrap())
        .collect();
    let monotone = rates.windows(2).all(|w| w[1] >= w[0]);
    (
        monotone && rates[3] >= 0.97,
        format!("separation rates {rates:?} over delta/sigma [4, 6, 10, 20]"),
    )
}

fn c5_kmeanspp_distribution() -> Outcome {
    let y = DMatrix::from_row_slice(5, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 3.0, 3.0, -1.5, 0.5]);
    let draws = 100_000;
    let mut counts = [[0usize; 5]; 5];
    let mut rng = rng_from_seed(2024);
    for _ in 0..draws {
        let s = kmeanspp_seed_with(&y, 2, &mut rng).unwrap();
        counts[s.chosen_indices[0]][s.chosen_indices[1]] += 1;
    }
    let d2 = |i: usize, j: usize| (y.row(i) - y.row(j)).norm_squared();
    let mut worst = 0.0f64;
    for i in 0..5 {
        let tot: f64 = (0..5).map(|l| d2(i, l)).sum();
        for j in 0..5 {
            let p = d2(i, j) / tot / 5.0;
            let f = counts[i][j] as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let z = if se > 0.0 { (f - p).abs() / se } else if f == p { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
        }
    }
    (worst <= 3.0, format!("max |freq - exact| / SE = {worst:.2} (need <= 3)"))
}

fn c6_sigclust() -> Outcome {
    let base = Params {
        n: Some(100),
        r: Some(10),
        n_sim: Some(99),
        level: Some(0.05),
        restarts: Some(10),
        ..Params::default()
    };
    let size = run_experiment(&cfg(
        ExperimentKind::SigclustSizePower,
        200,
        106,
        Params { a_over_sigma: Some(0.0), ..base.clone() },
    ))
    .unwrap()
    .summary
    .rejection_rate
    .unwrap();
    let power = run_experiment(&cfg(
        ExperimentKind::SigclustSizePower,
        100,
        107,
        Params { a_over_sigma: Some(3.0), ..base },
    ))
    .unwrap()
    .summary
    .rejection_rate
    .unwrap();
    (
        (0.01..=0.12).contains(&size) && power >= 0.95,
        format!("size {size:.3} (need [0.01, 0.12]), power {power:.3} (need >= 0.95)"),
    )
}

fn sbm_template(kind: ExperimentKind, seed: u64) -> ExperimentConfig {
    cfg(
        kind,
        100,
        seed,
        Params {
            n: Some(300),
            b0: Some(vec![vec![1.0, 1.0 / 3.0], vec![1.0 / 3.0, 1.0]]),
            rho_scale: Some(5.0),
            alpha_n: Some(0.02),
            beta_n: Some(0.05),
            restarts: Some(10),
            ..Params::default()
        },
    )
}

fn c7_sbm() -> Outcome {
    let template = sbm_template(ExperimentKind::SbmRecovery, 108);
    let base = run_experiment(&template).unwrap().summary.exact_recovery_rate.unwrap();
    let scales = [5.0, 7.5, 10.0, 12.5];
    let out = sweep(&template, "rho_scale", &scales).unwrap();
    let rates: Vec<f64> = out
        .points
        .iter()
        .map(|(_, o)| o.summary.exact_recovery_rate.unwrap())
        .collect();
    let increasing = rates.windows(2).all(|w| w[1] > w[0]);
    (
        base >= 0.90 && increasing,
        format!("exact recovery {base:.2} at rho = 5 ln n / n (need >= 0.90); sweep {scales:?} -> {rates:?}"),
    )
}

fn c8_noisy_sbm() -> Outcome {
    let template = sbm_template(ExperimentKind::NoisySbm, 109);
    let base = run_experiment(&template).unwrap().summary.exact_recovery_rate.unwrap();
    let alphas = [0.0, 0.02, 0.05, 0.1];
    let out = sweep(&template, "alpha_n", &alphas).unwrap();
    let rates: Vec<f64> = out
        .points
        .iter()
        .map(|(_, o)| o.summary.exact_recovery_rate.unwrap())
        .collect();
    let nonincreasing = rates.windows(2).all(|w| w[1] <= w[0]);
    (
        base >= 0.80 && nonincreasing,
        format!("exact recovery {base:.2} at alpha 0.02, beta 0.05 (need >= 0.80); alpha sweep {alphas:?} -> {rates:?}"),
    )
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Optimal 2-means cost by enumerating every bipartition with both centroids
/// recomputed from scratch.
fn exhaustive_two_means(y: &DMatrix<f64>) -> f64 {
    let n = y.nrows();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << (n - 1)) {
        let mut cost = 0.0;
        for side in [0u32, 1] {
            let rows: Vec<usize> = (0..n).filter(|&i| (mask >> i) & 1 == side).collect();
            let mean = rows.iter().fold(nalgebra::RowDVector::zeros(y.ncols()), |acc, &i| acc + y.row(i))
                / rows.len() as f64;
            cost += rows.iter().map(|&i| (y.row(i) - &mean).norm_squared()).sum::<f64>();
        }
        best = best.min(cost / n as f64);
    }
    best
}

fn c9_brute_force() -> Outcome {
    let mut worst_cost = 0.0f64;
    for inst in 0..20u64 {
        let n = 5 + (inst as usize % 8);
        let y = gaussian_matrix(n, 2, derive_seed(110, inst));
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << (n - 1)) {
            let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            best = best.min(partition_cost(&y, &labels, 2));
            let init = update_step(&y, &labels, 2, EmptyClusterPolicy::KeepPreviousCenter, &DMatrix::zeros(2, 2));
            best = best.min(lloyd(&y, &init, &LloydConfig::with_max_iters(50)).unwrap().final_cost());
        }
        worst_cost = worst_cost.max((best - exhaustive_two_means(&y)).abs());
    }
    let mut rng = rng_from_seed(111);
    let mut mismatches = 0;
    for t in 0..100 {
        let k = 2 + t % 3;
        let n = 30;
        let z: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let z_hat: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let brute = permutations(k)
            .iter()
            .map(|p| z.iter().zip(&z_hat).filter(|(a, b)| p[**a] != **b).count())
            .min()
            .unwrap() as f64
            / n as f64;
        mismatches += (misclustering_rate(&z_hat, &z, k).unwrap().0 != brute) as usize;
    }
    (
        worst_cost <= 1e-9 && mismatches == 0,
        format!("max cost gap {worst_cost:.2e} (need <= 1e-9), misclustering mismatches {mismatches}/100"),
    )
}

fn c10_numerical_core() -> Outcome {
    let mut worst_res = 0.0f64;
    let mut worst_orth = 0.0f64;
    for i in 0..100u64 {
        let n = 2 * (i as usize + 1);
        let g = gaussian_matrix(n, n, derive_seed(112, i));
        let a = SymmetricMatrix::new((&g + g.transpose()) * 0.5).unwrap();
        let es = sym_eig(&a, n, EigenOrdering::AlgebraicDescending).unwrap();
        let norm = spectral_norm(&a).unwrap();
        for (j, &l) in es.values.iter().enumerate() {
            let v = es.vectors.column(j);
            worst_res = worst_res.max((a.as_matrix() * v - v * l).norm() / (1.0 + norm));
        }
        let gram = es.vectors.transpose() * &es.vectors;
        worst_orth = worst_orth.max((gram - DMatrix::identity(n, n)).amax());
    }
    let mut worst_paths = 0.0f64;
    let mut worst_recon = 0.0f64;
    let mut worst_rowsum = 0.0f64;
    for i in 0..20u64 {
        let (n, p) = (10 + 2 * i as usize, 2 + i as usize % 3);
        let x = gaussian_matrix(n, p, derive_seed(113, i));
        let d2 = squared_distances(&x).unwrap();
        let a = cmds_embedding(&CmdsInput::Points(x.clone()), p, false).unwrap();
        let b = cmds_embedding(&CmdsInput::SquaredDissimilarity(d2.clone()), p, false).unwrap();
        worst_paths = worst_paths.max((&a - &b).amax());
        worst_recon = worst_recon.max((squared_distances(&a).unwrap().as_matrix() - d2.as_matrix()).amax());
        let bc = double_center(&d2).unwrap();
        for r in 0..n {
            worst_rowsum = worst_rowsum.max(bc.as_matrix().row(r).sum().abs());
        }
    }
    (
        worst_res <= 1e-8 && worst_orth <= 1e-10 && worst_paths <= 1e-8 && worst_recon <= 1e-8 && worst_rowsum <= 1e-10,
        format!(
            "residual {worst_res:.1e}, orthonormality {worst_orth:.1e}, cmds paths {worst_paths:.1e}, reconstruction {worst_recon:.1e}, row sums {worst_rowsum:.1e}"
        ),
    )
}

fn c11_rotation() -> Outcome {
    let spec = gaussian_pair(3.0, 1.0, 3).unwrap();
    let s = sample_mixture(&spec, 200, 114).unwrap();
    let init = kmeanspp_seed(s.observed(), 2, 115).unwrap().centers;
    let cfg = LloydConfig::with_max_iters(20);
    let base = run_lloyd_with_truth(s.observed(), &init, s.labels(), Some(spec.centers()), &cfg).unwrap();
    let mut worst = 0.0f64;
    let mut exact = true;
    for i in 0..20u64 {
        let o = gaussian_matrix(3, 3, derive_seed(116, i)).qr().q();
        let rot = run_lloyd_with_truth(
            &(s.observed() * &o),
            &(&init * &o),
            s.labels(),
            Some(&(spec.centers() * &o)),
            &cfg,
        )
        .unwrap();
        exact &= rot.iterations.len() == base.iterations.len();
        for (a, b) in base.iterations.iter().zip(&rot.iterations) {
            exact &= a.assignments == b.assignments;
            worst = worst.max((a.a_s - b.a_s).abs()).max((a.g_s - b.g_s).abs());
        }
    }
    (exact && worst <= 1e-9, format!("assignments identical: {exact}; max metric gap {worst:.1e}"))
}

fn c12_dfm() -> Outcome {
    let c = cfg(
        ExperimentKind::Dfm,
        50,
        117,
        Params {
            n: Some(200),
            r: Some(2),
            delta_over_sigma: Some(6.0),
            sigma: Some(0.1),
            t_len: Some(2000),
            factor_model: Some(FactorKind::Iid),
            noise_var: Some(0.25),
            restarts: Some(10),
            ..Params::default()
        },
    );
    let out = run_experiment(&c).unwrap();
    let good = out.records.iter().filter(|r| r.a_s.unwrap() <= 0.02).count();
    (
        good as f64 / 50.0 >= 0.90,
        format!("{good}/50 with A_s <= 0.02 (need >= 45); max A_s {:.3}", out.summary.max_a_s.unwrap()),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria = [
        Criterion { id: 1, name: "misclustering bound, unperturbed", limit: secs(30), run: c1_bound_unperturbed },
        Criterion { id: 2, name: "misclustering bound, shared-direction perturbation", limit: secs(30), run: c2_bound_perturbed },
        Criterion { id: 3, name: "four-cluster trap versus oracle start", limit: secs(5), run: c3_figure_one },
        Criterion { id: 4, name: "k-means++ seed separation trend", limit: secs(60), run: c4_seed_separation },
        Criterion { id: 5, name: "k-means++ second-seed distribution", limit: secs(10), run: c5_kmeanspp_distribution },
        Criterion { id: 6, name: "SigClust size and power", limit: secs(300), run: c6_sigclust },
        Criterion { id: 7, name: "SBM exact recovery", limit: secs(120), run: c7_sbm },
        Criterion { id: 8, name: "noisy SBM exact recovery", limit: secs(180), run: c8_noisy_sbm },
        Criterion { id: 9, name: "brute-force k-means and misclustering oracles", limit: secs(30), run: c9_brute_force },
        Criterion { id: 10, name: "eigensolver and CMDS invariants", limit: secs(30), run: c10_numerical_core },
        Criterion { id: 11, name: "rotation invariance of Lloyd trajectories", limit: secs(30), run: c11_rotation },
        Criterion { id: 12, name: "factor-model loadings clustering", limit: secs(120), run: c12_dfm },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str()) || *f == c.id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run));
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let in_time = elapsed <= c.limit;
        let pass = ok && in_time;
        println!(
            "{} criterion {:>2} ({}): {}; {:.2}s of {}s",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
