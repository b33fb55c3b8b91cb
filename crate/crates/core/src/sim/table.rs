//! Result tables in CSV and JSON.
//!
//! CSV columns, in order: `model, pattern, r, gamma, method, [t], estimate, se,
//! repetitions, seed, [relative_power], [conservative_count]`. Bracketed columns appear
//! only when some row carries them: `t` for ecdf curves, `relative_power` for power runs
//! and γ sweeps, `conservative_count` for null-ecdf sweeps. Floats use the shortest
//! representation that round-trips.

use std::io::Write;

use serde::Serialize;

use super::{EcdfCurve, ExperimentConfig, GammaPoint, Method, SimResult};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub model: String,
    pub pattern: String,
    pub r: f64,
    pub gamma: usize,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub estimate: f64,
    pub se: f64,
    pub repetitions: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservative_count: Option<usize>,
}

impl ResultRow {
    pub fn new(cfg: &ExperimentConfig, result: &SimResult) -> Self {
        ResultRow {
            model: cfg.model.label(),
            pattern: cfg.pattern.label.clone(),
            r: cfg.pattern.r,
            gamma: cfg.gamma,
            method: result.method,
            t: None,
            estimate: result.estimate.value(),
            se: result.std_error,
            repetitions: result.repetitions,
            seed: cfg.seed,
            relative_power: None,
            conservative_count: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Power rows with relative power filled in.
    pub fn push_power(&mut self, cfg: &ExperimentConfig, results: &[SimResult]) -> Result<()> {
        let relative = super::relative_power(results)?;
        for (res, (_, rel)) in results.iter().zip(relative) {
            let mut row = ResultRow::new(cfg, res);
            row.relative_power = Some(rel);
            self.rows.push(row);
        }
        Ok(())
    }

    pub fn push_gamma_sweep(&mut self, cfg: &ExperimentConfig, sweep: &[GammaPoint]) {
        for point in sweep {
            let cfg = cfg.clone().with_gamma(point.gamma);
            for (res, &rel) in point.results.iter().zip(&point.relative) {
                let mut row = ResultRow::new(&cfg, res);
                row.relative_power = Some(rel);
                self.rows.push(row);
            }
        }
    }

    /// Null-ecdf rows; `cfg` carries the base pattern, the row label names the modified one.
    pub fn push_null_ecdf(&mut self, cfg: &ExperimentConfig, count: usize, results: &[SimResult]) {
        for res in results {
            let mut row = ResultRow::new(cfg, res);
            row.pattern = format!("{}+{count}", cfg.pattern.label);
            row.conservative_count = Some(count);
            self.rows.push(row);
        }
    }

    pub fn push_curves(&mut self, cfg: &ExperimentConfig, curves: &[EcdfCurve]) {
        for curve in curves {
            for (t, res) in curve.grid.iter().zip(&curve.values) {
                let mut row = ResultRow::new(cfg, res);
                row.t = Some(*t);
                self.rows.push(row);
            }
        }
    }

    pub fn columns(&self) -> Vec<&'static str> {
        let has_t = self.rows.iter().any(|r| r.t.is_some());
        let has_rel = self.rows.iter().any(|r| r.relative_power.is_some());
        let has_count = self.rows.iter().any(|r| r.conservative_count.is_some());
        let mut cols = vec!["model", "pattern", "r", "gamma", "method"];
        if has_t {
            cols.push("t");
        }
        cols.extend(["estimate", "se", "repetitions", "seed"]);
        if has_rel {
            cols.push("relative_power");
        }
        if has_count {
            cols.push("conservative_count");
        }
        cols
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let cols = self.columns();
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&cols)?;
        for row in &self.rows {
            let record: Vec<String> = cols
                .iter()
                .map(|&c| match c {
                    "model" => row.model.clone(),
                    "pattern" => row.pattern.clone(),
                    "r" => row.r.to_string(),
                    "gamma" => row.gamma.to_string(),
                    "method" => row.method.name().to_string(),
                    "t" => opt(row.t),
                    "estimate" => row.estimate.to_string(),
                    "se" => row.se.to_string(),
                    "repetitions" => row.repetitions.to_string(),
                    "seed" => row.seed.to_string(),
                    "relative_power" => opt(row.relative_power),
                    "conservative_count" => row.conservative_count.map(|c| c.to_string()).unwrap_or_default(),
                    _ => unreachable!("unknown column {c}"),
                })
                .collect();
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `{"metadata": …, "columns": […], "rows": […]}`.
    pub fn write_json<W: Write>(&self, writer: W, metadata: &serde_json::Value) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: &'a serde_json::Value,
            columns: Vec<&'static str>,
            rows: &'a [ResultRow],
        }
        let doc = Doc { metadata, columns: self.columns(), rows: &self.rows };
        let mut writer = writer;
        serde_json::to_writer_pretty(&mut writer, &doc)?;
        writeln!(writer)?;
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
