//! One-parameter sweeps with long-format output.

use std::io::Write;

use crate::config::ExperimentConfig;
use crate::error::{SimError, SimResult};
use crate::runner::{run_experiment, ExperimentOutput};

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub param: String,
    pub points: Vec<(f64, ExperimentOutput)>,
}

/// Copy of `template` with `params.<name> = value`. Setting `rho_n` clears
/// `rho_scale` and vice versa.
pub fn with_param(template: &ExperimentConfig, name: &str, value: f64) -> SimResult<ExperimentConfig> {
    let field = format!("params.{name}");
    let not_numeric = || SimError::config(field.clone(), "is not a numeric parameter");
    let base = toml::Value::try_from(template).map_err(|e| SimError::config("config", e.to_string()))?;
    let attempt = |v: toml::Value| -> Option<ExperimentConfig> {
        let mut root = base.clone();
        let params = root
            .as_table_mut()?
            .entry("params")
            .or_insert_with(|| toml::Value::Table(Default::default()))
            .as_table_mut()?;
        match name {
            "rho_n" => drop(params.remove("rho_scale")),
            "rho_scale" => drop(params.remove("rho_n")),
            _ => {}
        }
        params.insert(name.to_string(), v);
        root.try_into().ok()
    };
    let cfg = attempt(toml::Value::Float(value))
        .or_else(|| {
            (value.fract() == 0.0 && value >= 0.0)
                .then(|| attempt(toml::Value::Integer(value as i64)))
                .flatten()
        })
        .ok_or_else(not_numeric)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the template once per value of `params.<name>`.
pub fn sweep(template: &ExperimentConfig, name: &str, values: &[f64]) -> SimResult<SweepOutput> {
    if values.is_empty() {
        return Err(SimError::config("values", "sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .map(|&v| with_param(template, name, v).map(|c| (v, c)))
        .collect::<SimResult<Vec<_>>>()?;
    let points = configs
        .into_iter()
        .map(|(v, c)| run_experiment(&c).map(|out| (v, out)))
        .collect::<SimResult<Vec<_>>>()?;
    Ok(SweepOutput {
        param: name.to_string(),
        points,
    })
}

impl SweepOutput {
    /// Columns `param,value` followed by the record columns.
    pub fn write_csv<W: Write>(&self, out: W) -> SimResult<()> {
        let mut w = csv::Writer::from_writer(out);
        let Some((_, first)) = self.points.first() else {
            return Ok(());
        };
        let mut header = vec!["param".to_string(), "value".to_string()];
        header.extend(first.header());
        w.write_record(&header)?;
        for (v, out) in &self.points {
            for r in &out.records {
                let mut row = vec![self.param.clone(), v.to_string()];
                row.extend(out.row(r));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn summary_text(&self) -> String {
        self.points
            .iter()
            .map(|(v, out)| format!("[{} = {v}]\n{}", self.param, out.summary.to_text()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
