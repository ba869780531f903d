//! Long-format result rows: one value per (scenario, parameter value, metric,
//! source, seed).

use std::io::Write;

use mdcnet_core::report::AnalyticReport;
use mdcnet_sim::{RunReport, SimReport};
use serde::Serialize;

/// Column order of every CSV the harness writes. Bump [`SCHEMA_VERSION`]
/// when this changes.
pub const COLUMNS: [&str; 10] =
    ["scenario_id", "param_name", "param_value", "metric", "source", "value", "ci_low", "ci_high", "status", "seed"];

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Analytic,
    Sim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Past the stability bound; the computable part is still reported.
    Unstable,
    /// A fixed point or quadrature failed.
    NotConverged,
    NoData,
    Error,
}

/// One CSV line. Empty `seed` on a sim row marks the pooled estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub scenario_id: String,
    pub param_name: String,
    pub param_value: Option<f64>,
    pub metric: String,
    pub source: Source,
    pub value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub status: Status,
    pub seed: Option<u64>,
}

/// Where a block of rows sits in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub scenario_id: String,
    pub param_name: String,
    pub param_value: Option<f64>,
}

impl Point {
    pub fn single(scenario_id: &str) -> Point {
        Point { scenario_id: scenario_id.to_string(), param_name: String::new(), param_value: None }
    }

    fn row(&self, metric: &str, source: Source, value: Option<f64>, status: Status) -> Row {
        Row {
            scenario_id: self.scenario_id.clone(),
            param_name: self.param_name.clone(),
            param_value: self.param_value,
            metric: metric.to_string(),
            source,
            value,
            ci_low: None,
            ci_high: None,
            status,
            seed: None,
        }
    }

    /// Whatever the report computed; a failed report gets an extra `failure`
    /// row with no value.
    pub fn analytic_rows(&self, report: &AnalyticReport, status: Status) -> Vec<Row> {
        let mut rows: Vec<Row> =
            report.metrics().into_iter().map(|(m, v)| self.row(m, Source::Analytic, Some(v), status)).collect();
        if report.failure.is_some() {
            rows.push(self.row("failure", Source::Analytic, None, status));
        }
        rows
    }

    /// Pooled rows first, then each replication in seed order.
    pub fn sim_rows(&self, report: &SimReport) -> Vec<Row> {
        let mut rows: Vec<Row> = report
            .pooled
            .iter()
            .map(|p| Row { ci_low: Some(p.ci_low), ci_high: Some(p.ci_high), ..self.row(p.name, Source::Sim, Some(p.mean), Status::Ok) })
            .collect();
        for run in &report.runs {
            rows.extend(self.run_rows(run));
        }
        rows
    }

    pub fn run_rows(&self, run: &RunReport) -> Vec<Row> {
        run.estimates
            .iter()
            .map(|&(m, v)| Row { seed: Some(run.seed), ..self.row(m, Source::Sim, Some(v), Status::Ok) })
            .collect()
    }

    pub fn failure_row(&self, source: Source, status: Status) -> Row {
        self.row("failure", source, None, status)
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_columns() {
        let p = Point::single("x");
        let mut buf = Vec::new();
        write_rows(&mut buf, &[p.failure_row(Source::Sim, Status::NoData)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "x,,,failure,sim,,,,no_data,");
        let mut empty = Vec::new();
        write_rows(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), COLUMNS.join(","));
    }
}
