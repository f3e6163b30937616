use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use perturb_lloyd::sigclust::{sigclust_auto, Clusterer};
use perturb_lloyd_sim::{run_experiment, sweep, ExperimentConfig, SimError, SimResult};

#[derive(Parser)]
#[command(name = "plloyd", version, about = "Run Lloyd-under-perturbation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run the experiment once per value of one numeric parameter.
    Sweep {
        config: PathBuf,
        /// Name of a field under `[params]`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Two-cluster significance test on a point cloud CSV (header row; a
    /// `label` column, if present, is ignored).
    Sigclust {
        data: PathBuf,
        #[arg(long, default_value_t = 99)]
        n_sim: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the report and null CSVs; nothing is written if omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into())
}

fn read_points(path: &Path) -> SimResult<DMatrix<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let keep: Vec<usize> = reader
        .headers()?
        .iter()
        .enumerate()
        .filter(|(_, h)| h.trim() != "label")
        .map(|(i, _)| i)
        .collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        for &i in &keep {
            let field = record.get(i).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}: row {}: '{field}' is not a number", path.display(), rows + 1),
                )
            })?;
            values.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, keep.len(), &values))
}

fn execute(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            println!("ok: {} ({} replicates)", cfg.kind.name(), cfg.replicates);
        }
        Command::Sigclust { data, n_sim, restarts, seed, out_dir } => {
            let y = read_points(&data)?;
            let report = sigclust_auto(&y, n_sim, &Clusterer { restarts }, seed)?;
            println!("ci_observed: {}", report.ci_observed);
            println!("sigma_hat: {}", report.sigma_hat);
            println!("p_value: {}", report.p_value);
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)?;
                let s = stem(&data);
                report.write_csv(std::fs::File::create(dir.join(format!("{s}.sigclust.csv")))?)?;
                report.write_null_csv(std::fs::File::create(dir.join(format!("{s}.null.csv")))?)?;
            }
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let out = run_experiment(&cfg)?;
            let (records, summary) = out.save(&cfg.resolved_output_dir(), &stem(&config))?;
            print!("{}", out.summary.to_text());
            println!("records: {}\nsummary: {}", records.display(), summary.display());
        }
        Command::Sweep { config, param, values } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let out = sweep(&cfg, &param, &values)?;
            let dir = cfg.resolved_output_dir();
            std::fs::create_dir_all(&dir)?;
            let base = format!("{}.sweep-{param}", stem(&config));
            let csv_path = dir.join(format!("{base}.csv"));
            out.write_csv(std::fs::File::create(&csv_path)?)?;
            let text = out.summary_text();
            std::fs::write(dir.join(format!("{base}.summary.txt")), &text)?;
            print!("{text}");
            println!("records: {}", csv_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            report_exit(&e)
        }
    }
}

fn report_exit(e: &SimError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
