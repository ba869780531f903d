//! The `analytic`, `simulate` and `sweep` workflows.

use std::fmt::Write as _;
use std::path::Path;

use mdcnet_core::coverage::ApCoverageModel;
use mdcnet_core::params::{parse_config, resolve_key, NetworkConfig};
use mdcnet_core::queue::QueueError;
use mdcnet_core::report::{analyze_with, AnalyticError, AnalyticReport};
use mdcnet_sim::{replicate, run, SimError, SimOptions};
use rayon::prelude::*;

use crate::rows::{Point, Row, Source, Status};
use crate::CliError;

/// Reads a config file, or the baseline when no path is given. Returns a
/// scenario id (the file stem) with the config.
pub fn load_config(path: Option<&Path>) -> Result<(String, NetworkConfig), CliError> {
    let Some(path) = path else {
        return Ok(("baseline".to_string(), NetworkConfig::baseline()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let id = path.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
    Ok((id, cfg))
}

/// Replication settings shared by `simulate`, `sweep` and `validate`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSettings {
    pub seeds: Vec<u64>,
    pub horizon_slots: u64,
    pub warmup_frac: f64,
    pub options: SimOptions,
}

impl SimSettings {
    pub fn warmup_slots(&self) -> u64 {
        (self.horizon_slots as f64 * self.warmup_frac).round() as u64
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("no seeds given".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_frac) {
            return Err(CliError::Config(format!("warm-up fraction {} is not in [0, 1)", self.warmup_frac)));
        }
        if self.horizon_slots == 0 {
            return Err(CliError::Config("horizon must be at least one slot".into()));
        }
        Ok(())
    }
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { seeds: (1..=4).collect(), horizon_slots: 20_000, warmup_frac: 0.1, options: SimOptions { stationary_start: true, trace_every: 0 } }
    }
}

/// Parses `N..M` (inclusive) or a single `N`.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("bad seed `{x}`: {e}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if b < a {
                return Err(format!("empty seed range {s}"));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![parse(s)?]),
    }
}

pub fn status_of(report: &AnalyticReport) -> Status {
    match &report.failure {
        None => Status::Ok,
        Some(AnalyticError::Queue(QueueError::Unstable { .. } | QueueError::CapacityExceeded { .. })) => Status::Unstable,
        Some(AnalyticError::Coverage(_) | AnalyticError::Contact(_)) => Status::NotConverged,
        Some(_) => Status::Error,
    }
}

/// Why the report stopped, naming the stability bound when that is the cause.
pub fn failure_message(report: &AnalyticReport) -> Option<String> {
    let e = report.failure.as_ref()?;
    Some(match (e, report.arrival_bound) {
        (AnalyticError::Queue(QueueError::Unstable { rho, p_ct }), Some(bound)) => format!(
            "unstable: arrival rate xi = {} pkt/s is not below the stability bound P_ct P_cov^M / delta = {bound:.4} pkt/s (rho = {rho:.4}, P_ct = {p_ct:.4})",
            report.config.xi
        ),
        _ => e.to_string(),
    })
}

pub fn analytic(scenario: &str, cfg: &NetworkConfig, model: ApCoverageModel) -> (Vec<Row>, AnalyticReport) {
    let report = analyze_with(cfg, model);
    let rows = Point::single(scenario).analytic_rows(&report, status_of(&report));
    (rows, report)
}

/// A short human-readable digest of an analytic report.
pub fn summary(report: &AnalyticReport) -> String {
    let mut s = String::new();
    let get = |m: &str| report.metric(m);
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let line = |s: &mut String, label: &str, names: &[(&str, &str)]| {
        let parts: Vec<String> =
            names.iter().filter_map(|&(m, unit)| get(m).map(|v| format!("{m} = {}{unit}", number(v)))).collect();
        if !parts.is_empty() {
            let _ = writeln!(s, "{label:<9} {}", parts.join(", "));
        }
    };
    line(&mut s, "contact", &[("e_ct", " s"), ("e_ict", " s"), ("p_ct", "")]);
    line(&mut s, "coverage", &[("p_cov_m", ""), ("p_cov_a", ""), ("lambda_s_eff", " /m2"), ("lambda_m_eff", " /m2")]);
    line(&mut s, "queue", &[("xi_cap", ""), ("rho", ""), ("e_psi", ""), ("e_l", ""), ("xi_bound", " pkt/s")]);
    line(&mut s, "delay", &[("d_q_s", " s"), ("d_t_s", " s"), ("d_q_m", " s"), ("d_q_m_averaged", " s"), ("d_t_m", " s"), ("total_delay", " s")]);
    line(&mut s, "energy", &[("e_sensor", " mJ/pkt"), ("e_network", " mJ/pkt/m2")]);
    if let Some(m) = failure_message(report) {
        let _ = writeln!(s, "stopped: {m}");
    }
    s
}

fn number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.4e}")
    } else if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v}")
    } else {
        format!("{v:.6}")
    }
}

fn sim_rows(point: &Point, cfg: &NetworkConfig, settings: &SimSettings) -> Result<Vec<Row>, SimError> {
    let warm = settings.warmup_slots();
    if settings.seeds.len() == 1 {
        let r = run(cfg, settings.seeds[0], settings.horizon_slots, warm, settings.options)?;
        return Ok(point.run_rows(&r));
    }
    let report = replicate(cfg, &settings.seeds, settings.horizon_slots, warm, settings.options)?;
    Ok(point.sim_rows(&report))
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::NoDeliveries { .. } => CliError::NoData(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Pooled rows followed by per-replication rows; a single seed gives only
/// the replication rows.
pub fn simulate(scenario: &str, cfg: &NetworkConfig, settings: &SimSettings) -> Result<Vec<Row>, CliError> {
    settings.check()?;
    sim_rows(&Point::single(scenario), cfg, settings).map_err(sim_error)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Analytic,
    Sim,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Canonical config key.
    pub param: &'static str,
    pub grid: Vec<f64>,
    pub mode: Mode,
    pub sim: SimSettings,
}

impl SweepSpec {
    pub fn new(param: &str, grid: Vec<f64>, mode: Mode, sim: SimSettings) -> Result<SweepSpec, CliError> {
        let key = resolve_key(param)
            .filter(|&k| k != "boundary_mode")
            .ok_or_else(|| CliError::Config(format!("unknown sweep parameter `{param}`")))?;
        if grid.is_empty() {
            return Err(CliError::Config("sweep grid is empty".into()));
        }
        if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(CliError::Config(format!("sweep grid must be strictly increasing ({} then {})", w[0], w[1])));
        }
        if mode != Mode::Analytic {
            sim.check()?;
        }
        Ok(SweepSpec { param: key, grid, mode, sim })
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad grid value `{x}`: {e}"))).collect()
}

/// One block of rows per grid point, in grid order. Points that fail keep
/// their computable rows and a status; the sweep carries on.
pub fn sweep(scenario: &str, base: &NetworkConfig, spec: &SweepSpec) -> Vec<Row> {
    let blocks: Vec<Vec<Row>> = spec
        .grid
        .par_iter()
        .map(|&x| {
            let point = Point { scenario_id: scenario.to_string(), param_name: spec.param.to_string(), param_value: Some(x) };
            let cfg = match base.with_param(spec.param, x) {
                Ok(c) => c,
                Err(_) => {
                    let mut rows = Vec::new();
                    if spec.mode != Mode::Sim {
                        rows.push(point.failure_row(Source::Analytic, Status::Error));
                    }
                    if spec.mode != Mode::Analytic {
                        rows.push(point.failure_row(Source::Sim, Status::Error));
                    }
                    return rows;
                }
            };
            let mut rows = Vec::new();
            if spec.mode != Mode::Sim {
                let report = analyze_with(&cfg, ApCoverageModel::default());
                rows.extend(point.analytic_rows(&report, status_of(&report)));
            }
            if spec.mode != Mode::Analytic {
                match sim_rows(&point, &cfg, &spec.sim) {
                    Ok(r) => rows.extend(r),
                    Err(SimError::NoDeliveries { .. }) => rows.push(point.failure_row(Source::Sim, Status::NoData)),
                    Err(_) => rows.push(point.failure_row(Source::Sim, Status::Error)),
                }
            }
            rows
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("3").unwrap(), vec![3]);
        assert_eq!(parse_seed_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seed_range("1..=2").unwrap(), vec![1, 2]);
        assert!(parse_seed_range("5..4").is_err());
        assert!(parse_seed_range("a..4").is_err());
    }

    #[test]
    fn sweep_spec_contract() {
        let s = SimSettings::default();
        assert!(SweepSpec::new("v", vec![5.0, 10.0], Mode::Analytic, s.clone()).is_ok());
        assert_eq!(SweepSpec::new("R_s", vec![5.0], Mode::Analytic, s.clone()).unwrap().param, "r_s_m");
        assert!(SweepSpec::new("speed", vec![5.0], Mode::Analytic, s.clone()).is_err());
        assert!(SweepSpec::new("v", vec![], Mode::Analytic, s.clone()).is_err());
        assert!(SweepSpec::new("v", vec![10.0, 5.0], Mode::Analytic, s.clone()).is_err());
        assert!(SweepSpec::new("v", vec![5.0, 5.0], Mode::Analytic, s).is_err());
        assert_eq!(parse_grid("1, 2.5,3e-3").unwrap(), vec![1.0, 2.5, 3e-3]);
    }

    #[test]
    fn unstable_tail_is_flagged_and_head_intact() {
        let s = SimSettings::default();
        let spec = SweepSpec::new("xi", vec![0.3, 0.6, 5.0], Mode::Analytic, s).unwrap();
        let rows = sweep("t", &NetworkConfig::baseline(), &spec);
        let status_at = |x: f64| -> Vec<Status> { rows.iter().filter(|r| r.param_value == Some(x)).map(|r| r.status).collect() };
        assert!(status_at(0.3).iter().all(|&s| s == Status::Ok));
        assert!(status_at(0.6).iter().all(|&s| s == Status::Ok));
        assert!(status_at(5.0).iter().all(|&s| s == Status::Unstable));
        assert!(rows.iter().any(|r| r.param_value == Some(5.0) && r.metric == "failure"));
        let values: Vec<f64> = rows.iter().map(|r| r.param_value.unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "grid order kept");
    }

    #[test]
    fn contact_radius_sweep_trends() {
        let grid: Vec<f64> = (0..8).map(|k| 4.0 + 26.0 * k as f64 / 7.0).collect();
        let spec = SweepSpec::new("r_s", grid, Mode::Analytic, SimSettings::default()).unwrap();
        // w = 10 s must exceed 2R/v over the whole grid
        let base = NetworkConfig::baseline().with_param("v", 10.0).unwrap();
        let rows = sweep("t", &base, &spec);
        let series = |m: &str| -> Vec<f64> { rows.iter().filter(|r| r.metric == m).map(|r| r.value.unwrap()).collect() };
        let (ct, ict) = (series("e_ct"), series("e_ict"));
        assert_eq!(ct.len(), 8);
        assert!(ct.windows(2).all(|w| w[1] > w[0]), "{ct:?}");
        assert!(ict.windows(2).all(|w| w[1] < w[0]), "{ict:?}");
    }

    #[test]
    fn unstable_message_names_the_bound() {
        let (_, report) = analytic("t", &NetworkConfig::baseline().with_param("xi", 3.0).unwrap(), ApCoverageModel::default());
        let m = failure_message(&report).unwrap();
        assert!(m.contains("stability bound"), "{m}");
    }
}
