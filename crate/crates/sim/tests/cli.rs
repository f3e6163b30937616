use std::path::Path;
use std::process::Command;

fn plloyd(args: &[&str], out_dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_plloyd"))
        .args(args)
        .env("PLLOYD_OUTPUT_DIR", out_dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "kind = \"mixture-lloyd\"\nreplicates = 2\nseed = 9\noutput_dir = \"ignored\"\n[params]\nn = 80\ndelta_over_sigma = 6.0\n";

#[test]
fn validate_run_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("out");
    let (code, stdout, _) = plloyd(&["validate", &cfg], &out);
    assert_eq!(code, 0);
    assert!(stdout.contains("mixture-lloyd"));
    let (code, stdout, stderr) = plloyd(&["run", &cfg], &out);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("bound_satisfied_rate"));
    let csv = std::fs::read_to_string(out.join("small.records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("small.summary.txt").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = write(dir.path(), "m.toml", "kind = \"noisy-sbm\"\nreplicates = 1\nseed = 1\n[params]\nn = 50\nrho_n = 0.1\n");
    let (code, _, stderr) = plloyd(&["run", &missing], &out);
    assert_eq!(code, 2);
    assert!(stderr.contains("params.alpha_n"), "{stderr}");
    let cfg = write(dir.path(), "small.toml", SMALL);
    assert_eq!(plloyd(&["sweep", &cfg, "--param", "delta_over_sigma", "--values"], &out).0, 2);
    assert_eq!(plloyd(&["sweep", &cfg, "--param", "nonsense", "--values", "1"], &out).0, 2);
    assert_eq!(plloyd(&["validate", "/definitely/not/here.toml"], &out).0, 2);
    assert!(!out.exists());
}

#[test]
fn runtime_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // ρ_n · max(B₀) > 1 is only detected when the graph is generated.
    let cfg = write(dir.path(), "bad.toml", "kind = \"sbm-recovery\"\nreplicates = 1\nseed = 1\n[params]\nn = 40\nrho_n = 1.5\n");
    let (code, _, stderr) = plloyd(&["run", &cfg], &dir.path().join("out"));
    assert_eq!(code, 1, "{stderr}");
}

#[test]
fn sweep_writes_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("out");
    let (code, _, stderr) = plloyd(&["sweep", &cfg, "--param", "delta_over_sigma", "--values", "4,8"], &out);
    assert_eq!(code, 0, "{stderr}");
    let csv = std::fs::read_to_string(out.join("small.sweep-delta_over_sigma.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("param,value,replicate,seed,a_s"));
    assert!(lines[3].starts_with("delta_over_sigma,8,0,"));
}

#[test]
fn sigclust_subcommand_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("x_1,x_2,label\n");
    for i in 0..40 {
        let side = if i % 2 == 0 { -5.0 } else { 5.0 };
        body.push_str(&format!("{},{},{}\n", side + (i as f64 * 0.37).sin(), (i as f64 * 1.3).cos(), i % 2));
    }
    let data = write(dir.path(), "pts.csv", &body);
    let out = dir.path().join("out");
    let (code, stdout, stderr) = plloyd(
        &["sigclust", &data, "--n-sim", "19", "--out-dir", out.to_str().unwrap()],
        &out,
    );
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("ci_observed") && stdout.contains("sigma_hat"));
    assert!(stdout.contains("p_value: 0.05\n"), "{stdout}");
    assert_eq!(std::fs::read_to_string(out.join("pts.null.csv")).unwrap().lines().count(), 20);

    let bad = write(dir.path(), "bad.csv", "x_1\nabc\n");
    assert_eq!(plloyd(&["sigclust", &bad], &out).0, 1);
}
