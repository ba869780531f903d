//! The acceptance suite. Every criterion runs at pinned sizes and seeds and
//! yields a list of checks; a criterion passes when all of its checks do.

use std::fmt;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use mdcnet_core::contact::{contact_stats, expected_chord, ChordMethod, ContactStats, CHORD_FIT};
use mdcnet_core::coverage::{
    coverage_ap_with, coverage_mdc_with, interference_kernel, solve_ap_fixed_point, solve_mdc_fixed_point,
    solve_steady_state, ApCoverageModel, FixedPointOptions, AP_TOLERANCE, MDC_TOLERANCE,
};
use mdcnet_core::params::NetworkConfig;
use mdcnet_core::quadrature::Tolerance;
use mdcnet_core::queue::{
    arrival_rate_bound, service_lst, service_lst_derivative, solve_g_limited, vacation_lst, vacation_lst_derivative,
    QueueInputs, SlotQueue, C64,
};
use mdcnet_core::report::{analyze, AnalyticReport};
use mdcnet_sim::contact_trace::{trace, TraceSpec};
use mdcnet_sim::queue_oracle::{run_contact_queue, run_vacation_queue};
use mdcnet_sim::sinr_probe::probe_mdc;
use mdcnet_sim::{replicate, SimOptions, SimReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::verdict::ComparisonVerdict;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl From<ComparisonVerdict> for Check {
    fn from(v: ComparisonVerdict) -> Check {
        Check { label: v.metric.clone(), pass: v.pass, detail: v.to_string() }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Context that is reported but not gated on.
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl CriterionReport {
    fn new(id: u8) -> CriterionReport {
        CriterionReport { id, title: TITLES[usize::from(id) - 1], checks: Vec::new(), notes: Vec::new(), elapsed: Duration::ZERO }
    }

    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { label: label.into(), pass, detail: detail.into() });
    }

    fn verdict(&mut self, v: ComparisonVerdict) {
        self.checks.push(v.into());
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Records an error as a failed check and returns `None`.
    fn attempt<T, E: fmt::Display>(&mut self, label: &str, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(x) => Some(x),
            Err(e) => {
                self.check(label, false, e.to_string());
                None
            }
        }
    }

    /// The one-line verdict.
    pub fn line(&self) -> String {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        format!(
            "criterion {:>2} {} {} ({passed}/{} checks, {:.1} s)",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len(),
            self.elapsed.as_secs_f64()
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.line())?;
        for c in &self.checks {
            writeln!(f, "    [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.label, c.detail)?;
        }
        for n in &self.notes {
            writeln!(f, "    note: {n}")?;
        }
        Ok(())
    }
}

pub const TITLES: [&str; 10] = [
    "contact statistics",
    "mean chord fit",
    "MDC coverage flatness in speed",
    "AP coverage vs threshold",
    "vacation queue vs oracle",
    "stability dichotomy",
    "delay shapes",
    "MDC queueing delay variants",
    "energy trends",
    "numerical hygiene",
];

pub fn run(id: u8) -> Option<CriterionReport> {
    let f: fn(&mut CriterionReport) = match id {
        1 => contact_statistics,
        2 => chord_fit,
        3 => mdc_coverage_flatness,
        4 => ap_coverage,
        5 => vacation_queue,
        6 => stability_dichotomy,
        7 => delay_shapes,
        8 => mdc_delay_variants,
        9 => energy_trends,
        10 => numerical_hygiene,
        _ => return None,
    };
    let mut rep = CriterionReport::new(id);
    let t0 = Instant::now();
    f(&mut rep);
    rep.elapsed = t0.elapsed();
    Some(rep)
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=10).filter_map(run).collect()
}

const SEED: u64 = 20_170_601;

fn cfg_with(base: &NetworkConfig, params: &[(&str, f64)]) -> NetworkConfig {
    params.iter().fold(base.clone(), |c, &(k, v)| c.with_param(k, v).unwrap_or_else(|e| panic!("pinned {k} = {v}: {e}")))
}

fn stationary() -> SimOptions {
    SimOptions { stationary_start: true, ..SimOptions::default() }
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn fmt_series(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(", ")
}

// 1 ------------------------------------------------------------------------

const CT_HORIZON: f64 = 20_000.0;
const CT_WARMUP: f64 = 2_000.0;
const CT_MIN_EVENTS: u64 = 10_000;
const CT_MAX_RUNTIME: Duration = Duration::from_secs(300);

fn contact_statistics(rep: &mut CriterionReport) {
    let base = cfg_with(&NetworkConfig::baseline(), &[("lambda_s", 1e-3), ("lambda_m", 1e-4)]);
    for r_s in [5.0, 10.0, 20.0] {
        for v in [5.0, 10.0, 20.0, 30.0] {
            let cfg = cfg_with(&base, &[("r_s", r_s), ("v", v)]);
            let label = format!("v={v} R_s={r_s}");
            let Some(c) = rep.attempt(&label, contact_stats(&cfg)) else { continue };
            let mut spec = TraceSpec::from_config(&cfg, CT_HORIZON, CT_WARMUP);
            // a Poisson MDC count would move the realized density by ~10%
            spec.exact_count = true;
            let t0 = Instant::now();
            let s = trace(&spec, SEED).summary();
            let took = t0.elapsed();
            let ct = s.pair_ct.mean().unwrap_or(f64::NAN);
            let ict = s.idle.mean().unwrap_or(f64::NAN);
            rep.verdict(ComparisonVerdict::relative(format!("e_ct {label}"), c.e_ct, ct, 0.05));
            rep.verdict(ComparisonVerdict::relative(format!("e_ict {label}"), c.e_ict, ict, 0.05));
            let n = s.pair_ct.count().min(s.idle.count());
            rep.check(format!("events {label}"), n >= CT_MIN_EVENTS, format!("{} contacts, {} gaps", s.pair_ct.count(), s.idle.count()));
            rep.check(format!("runtime {label}"), took <= CT_MAX_RUNTIME, format!("{:.1} s", took.as_secs_f64()));
            // occupancy over crossing rate, the exact mean for this mobility
            let exact = std::f64::consts::PI * r_s * (cfg.w + cfg.p) / (2.0 * v * cfg.w);
            rep.note(format!("{label}: traced e_ct {ct:.4} vs occupancy/rate {exact:.4} ({:+.2}%)", 100.0 * (ct / exact - 1.0)));
        }
    }
}

// 2 ------------------------------------------------------------------------

fn chord_fit(rep: &mut CriterionReport) {
    let t0 = Instant::now();
    for k in 0..20 {
        let r = 4.0 + 26.0 * k as f64 / 19.0;
        let label = format!("e_d R_s={r:.3}");
        if let Some(e_d) = rep.attempt(&label, expected_chord(r, ChordMethod::Integral)) {
            rep.verdict(ComparisonVerdict::relative(label, e_d, CHORD_FIT * r, 0.01));
        }
    }
    let took = t0.elapsed();
    rep.check("runtime", took <= Duration::from_secs(10), format!("{:.2} s", took.as_secs_f64()));
}

// 3 ------------------------------------------------------------------------

const COV_SEEDS: [u64; 2] = [1, 2];
const COV_HORIZON: u64 = 8_000;
const COV_WARMUP: u64 = 2_000;
const COV_MIN_ATTEMPTS: u64 = 100_000;

fn mdc_coverage_flatness(rep: &mut CriterionReport) {
    let base = cfg_with(&NetworkConfig::baseline(), &[("lambda_s", 1e-3), ("lambda_m", 5e-4)]);
    let speeds = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let points: Vec<_> = speeds
        .par_iter()
        .map(|&v| {
            let cfg = cfg_with(&base, &[("v", v)]);
            let analytic = contact_stats(&cfg)
                .map_err(|e| e.to_string())
                .and_then(|c| solve_mdc_fixed_point(&cfg, &c, None, FixedPointOptions::default()).map_err(|e| e.to_string()));
            let sim = replicate(&cfg, &COV_SEEDS, COV_HORIZON, COV_WARMUP, stationary()).map_err(|e| e.to_string());
            (v, cfg, analytic, sim)
        })
        .collect();
    let (mut a_series, mut s_series) = (Vec::new(), Vec::new());
    for (v, cfg, analytic, sim) in points {
        let label = format!("v={v}");
        let (Some(a), Some(s)) = (rep.attempt(&label, analytic), rep.attempt(&label, sim)) else { continue };
        let p = s.get("p_cov_m").expect("every run counts sensor attempts");
        a_series.push(a.p_cov_m);
        s_series.push(p.mean);
        rep.verdict(ComparisonVerdict::absolute(format!("p_cov_m {label}"), a.p_cov_m, p.mean, 0.03).with_ci(p.ci_low, p.ci_high));
        let attempts: u64 = s.runs.iter().map(|r| r.counts.attempts_s).sum();
        rep.check(format!("attempts {label}"), attempts >= COV_MIN_ATTEMPTS, attempts.to_string());
        let probe = probe_mdc(&cfg, a.lambda_s_eff, 40_000, SEED);
        rep.note(format!(
            "{label}: PPP-interferer Monte Carlo at the solved density {:.4} ± {:.4}; simulated active density {:.3e} vs {:.3e}",
            probe.coverage,
            probe.std_error,
            s.mean("lambda_s_eff").unwrap_or(f64::NAN),
            a.lambda_s_eff
        ));
    }
    if a_series.len() == speeds.len() {
        rep.check("analytic flatness", spread(&a_series) <= 0.02, format!("spread {:.4} over [{}]", spread(&a_series), fmt_series(&a_series)));
    }
    if s_series.len() == speeds.len() {
        rep.check("simulated flatness", spread(&s_series) <= 0.02, format!("spread {:.4} over [{}]", spread(&s_series), fmt_series(&s_series)));
    }
}

// 4 ------------------------------------------------------------------------

const AP_SEEDS: [u64; 2] = [1, 2];
const AP_HORIZON: u64 = 20_000;
const AP_WARMUP: u64 = 5_000;

fn dense_config() -> NetworkConfig {
    cfg_with(&NetworkConfig::baseline(), &[("lambda_s", 2e-3), ("lambda_m", 1e-3), ("lambda_b", 4e-4), ("k", 128.0)])
}

fn ap_coverage(rep: &mut CriterionReport) {
    let base = dense_config();
    let thresholds = [-10.0, -5.0, 0.0, 5.0, 10.0];
    let points: Vec<_> = thresholds
        .par_iter()
        .map(|&t| {
            let cfg = cfg_with(&base, &[("t_a", t)]);
            let analytic = contact_stats(&cfg)
                .map_err(|e| e.to_string())
                .and_then(|c| solve_steady_state(&cfg, &c, ApCoverageModel::DiskAveraged).map_err(|e| e.to_string()));
            let plain = contact_stats(&cfg).ok().and_then(|c| solve_steady_state(&cfg, &c, ApCoverageModel::PlainPgfl).ok());
            let sim = replicate(&cfg, &AP_SEEDS, AP_HORIZON, AP_WARMUP, stationary()).map_err(|e| e.to_string());
            (t, analytic, plain, sim)
        })
        .collect();
    for (t, analytic, plain, sim) in points {
        let label = format!("T_a={t} dB");
        let (Some(a), Some(s)) = (rep.attempt(&label, analytic), rep.attempt(&label, sim)) else { continue };
        let Some(p) = s.get("p_cov_a") else {
            rep.check(&label, false, "no AP attempts after warm-up");
            continue;
        };
        rep.verdict(ComparisonVerdict::absolute(format!("p_cov_a {label}"), a.p_cov_a, p.mean, 0.03).with_ci(p.ci_low, p.ci_high));
        let attempts: u64 = s.runs.iter().map(|r| r.counts.attempts_a).sum();
        rep.note(format!(
            "{label}: {attempts} AP attempts; plain-PGFL model {:.4}; transmitting MDC density sim {:.3e} vs analytic {:.3e} (flow balance needs {:.3e})",
            plain.map_or(f64::NAN, |x| x.p_cov_a),
            s.mean("lambda_m_eff").unwrap_or(f64::NAN),
            a.lambda_m_eff,
            // every packet leaves through some MDC downlink slot
            base.lambda_s * base.xi * base.delta / p.mean
        ));
    }
    let rates = [0.3, 0.6, 0.9];
    let by_rate: Vec<_> = rates
        .par_iter()
        .map(|&xi| {
            let cfg = cfg_with(&base, &[("xi", xi)]);
            let analytic = contact_stats(&cfg).ok().and_then(|c| solve_steady_state(&cfg, &c, ApCoverageModel::DiskAveraged).ok());
            let sim = replicate(&cfg, &AP_SEEDS, AP_HORIZON, AP_WARMUP, stationary()).ok();
            (analytic.map(|a| a.p_cov_a), sim.and_then(|s| s.mean("p_cov_a")))
        })
        .collect();
    let analytic: Option<Vec<f64>> = by_rate.iter().map(|x| x.0).collect();
    let sim: Option<Vec<f64>> = by_rate.iter().map(|x| x.1).collect();
    match analytic {
        Some(a) => rep.check("analytic p_cov_a decreasing in xi", strictly_decreasing(&a), format!("xi 0.3/0.6/0.9: [{}]", fmt_series(&a))),
        None => rep.check("analytic p_cov_a decreasing in xi", false, "a grid point failed to solve"),
    }
    match sim {
        Some(s) => rep.note(format!("simulated p_cov_a at xi 0.3/0.6/0.9: [{}]", fmt_series(&s))),
        None => rep.note("simulated p_cov_a missing at some xi"),
    }
}

// 5 ------------------------------------------------------------------------

const ORACLE_CYCLES: u64 = 1_000_000;

struct QueueCase {
    name: &'static str,
    params: &'static [(&'static str, f64)],
    /// Target ρ / P_ct.
    load: f64,
}

const QUEUE_CASES: [QueueCase; 5] = [
    QueueCase { name: "baseline", params: &[], load: 0.2 },
    QueueCase { name: "baseline", params: &[], load: 0.5 },
    QueueCase { name: "baseline", params: &[], load: 0.8 },
    QueueCase { name: "fast MDCs", params: &[("v", 20.0)], load: 0.5 },
    QueueCase { name: "sparse MDCs, wide disk", params: &[("lambda_m", 5e-4), ("r_s", 15.0)], load: 0.8 },
];

/// Queue inputs with ξ set so that ρ/P_ct hits `load` at the solved coverage.
fn queue_inputs_at_load(cfg: &NetworkConfig, load: f64) -> Result<(QueueInputs, ContactStats), String> {
    let c = contact_stats(cfg).map_err(|e| e.to_string())?;
    let mut xi = cfg.xi;
    let mut p = 1.0;
    // coverage moves only weakly with ξ; a few rounds settle it
    for _ in 0..6 {
        let at = cfg.with_param("xi", xi).map_err(|e| e.to_string())?;
        p = solve_mdc_fixed_point(&at, &c, None, FixedPointOptions::default()).map_err(|e| e.to_string())?.p_cov_m;
        xi = load * c.p_ct * p / cfg.delta;
    }
    Ok((QueueInputs { xi, delta: cfg.delta, p_cov_m: p, e_ct: c.e_ct, e_ict: c.e_ict }, c))
}

fn vacation_queue(rep: &mut CriterionReport) {
    let results: Vec<_> = QUEUE_CASES
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let cfg = cfg_with(&NetworkConfig::baseline(), case.params);
            let out = queue_inputs_at_load(&cfg, case.load).and_then(|(inputs, _)| {
                let sol = solve_g_limited(&inputs).map_err(|e| e.to_string())?;
                let sq = SlotQueue { xi_cap: sol.xi_cap, arrival: inputs.xi * inputs.delta, p: inputs.p_cov_m, e_v: sol.e_v / inputs.delta };
                let oracle = run_vacation_queue(&sq, ORACLE_CYCLES, SEED + i as u64);
                Ok((inputs, sol, oracle))
            });
            (case, out)
        })
        .collect();
    for (case, out) in results {
        let label = format!("{} load {}", case.name, case.load);
        let Some((inputs, sol, oracle)) = rep.attempt(&label, out) else { continue };
        rep.verdict(ComparisonVerdict::relative(format!("E(L) {label}"), sol.e_l, oracle.e_l, 0.10));
        rep.verdict(ComparisonVerdict::relative(format!("D_q^s {label}"), sol.d_q_s, oracle.wait_slots * inputs.delta, 0.10));
        if sol.q.is_empty() {
            rep.check(format!("q {label}"), false, "no q vector (service cap above the solver limit)");
        } else {
            let tv = oracle.total_variation(&sol.q);
            rep.check(format!("q {label}"), tv <= 0.02, format!("total variation {tv:.5} (tol 0.02)"));
        }
        rep.note(format!(
            "{label}: xi {:.4} pkt/s, P {:.4}, rho/P_ct {:.3}, Xi {}, E(Psi) {:.2}",
            inputs.xi,
            inputs.p_cov_m,
            inputs.rho() / inputs.p_ct(),
            sol.xi_cap,
            sol.e_psi
        ));
    }
}

// 6 ------------------------------------------------------------------------

const DRIFT_ARENA: f64 = 400.0;
const DRIFT_HORIZON: f64 = 100_000.0;
/// Leading part of the trace left out of the drift test.
const DRIFT_WARMUP: f64 = 0.1;
const DRIFT_SAMPLE: f64 = 100.0;

/// The arrival rate at which ξ equals the stability bound evaluated at the
/// coverage that ξ itself produces.
fn critical_rate(cfg: &NetworkConfig, c: &ContactStats) -> Result<f64, String> {
    let gap = |xi: f64| -> Result<f64, String> {
        let at = cfg.with_param("xi", xi).map_err(|e| e.to_string())?;
        let p = solve_mdc_fixed_point(&at, c, None, FixedPointOptions::default()).map_err(|e| e.to_string())?.p_cov_m;
        Ok(arrival_rate_bound(p, cfg.delta, c.e_ct, c.e_ict) - xi)
    };
    let (mut lo, mut hi) = (1e-3, c.p_ct / cfg.delta);
    if gap(lo)? <= 0.0 || gap(hi)? >= 0.0 {
        return Err("stability bound not bracketed".into());
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn stability_dichotomy(rep: &mut CriterionReport) {
    let cfg = cfg_with(&NetworkConfig::baseline(), &[("arena_side", DRIFT_ARENA)]);
    let Some(c) = rep.attempt("contact", contact_stats(&cfg)) else { return };
    let Some(xi_star) = rep.attempt("bound", critical_rate(&cfg, &c)) else { return };
    let mut spec = TraceSpec::from_config(&cfg, DRIFT_HORIZON, 0.0);
    spec.exact_count = true;
    let tr = trace(&spec, SEED);
    let busy: Vec<Vec<(f64, f64)>> = tr.sensors.iter().map(|s| s.busy.clone()).collect();
    rep.note(format!(
        "critical rate {xi_star:.4} pkt/s; {} sensors; traced contact fraction {:.4} vs analytic {:.4}",
        busy.len(),
        tr.busy_fraction(),
        c.p_ct
    ));
    for (factor, bounded) in [(0.9, true), (1.1, false)] {
        let xi = factor * xi_star;
        let label = format!("xi = {factor} x bound");
        let at = cfg_with(&cfg, &[("xi", xi)]);
        let Some(fp) = rep.attempt(&label, solve_mdc_fixed_point(&at, &c, None, FixedPointOptions::default())) else { continue };
        let q = run_contact_queue(&busy, xi, fp.p_cov_m, cfg.delta, DRIFT_HORIZON, DRIFT_SAMPLE, SEED);
        let d = q.drift((DRIFT_WARMUP * q.trace.len() as f64) as usize);
        let last = q.trace.last().copied().unwrap_or(f64::NAN);
        let detail = format!(
            "last-quarter drift {:.3}%, slope {:.3e} pkt/s, final mean queue {last:.1}, served {}/{}",
            100.0 * d.last_quarter_change,
            d.slope,
            q.served,
            q.arrived
        );
        if bounded {
            rep.check(format!("bounded at {label}"), d.last_quarter_change < 0.01, detail);
        } else {
            rep.check(format!("divergent at {label}"), d.slope > 0.0 && d.last_quarter_change >= 0.01, detail);
        }
    }
}

// 7 ------------------------------------------------------------------------

fn delay_series(rep: &mut CriterionReport, base: &NetworkConfig, name: &str, grid: &[f64]) -> Option<Vec<f64>> {
    let reports: Vec<AnalyticReport> = grid.par_iter().map(|&x| analyze(&cfg_with(base, &[(name, x)]))).collect();
    let mut out = Vec::new();
    for (x, r) in grid.iter().zip(&reports) {
        match r.metric("total_delay") {
            Some(d) => out.push(d),
            None => {
                let why = r.failure.as_ref().map_or("incomplete".to_string(), |e| e.to_string());
                rep.check(format!("total delay at {name}={x:e}"), false, why);
                return None;
            }
        }
    }
    Some(out)
}

fn interior_minimum(xs: &[f64]) -> Option<usize> {
    let (i, _) = xs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    (i > 0 && i + 1 < xs.len()).then_some(i)
}

fn delay_shapes(rep: &mut CriterionReport) {
    let base = NetworkConfig::baseline();
    for (name, grid) in [
        ("lambda_s", vec![1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 3e-3, 4e-3, 4.5e-3, 5e-3]),
        ("lambda_m", vec![3e-4, 4e-4, 5e-4, 7e-4, 1e-3, 2e-3, 5e-3]),
    ] {
        if let Some(d) = delay_series(rep, &base, name, &grid) {
            let at = interior_minimum(&d);
            rep.check(
                format!("interior minimum in {name}"),
                at.is_some(),
                format!("minimum at {} over [{}]", at.map_or("an endpoint".into(), |i| format!("{:e}", grid[i])), fmt_series(&d)),
            );
        }
    }
    // w = 10 s cannot cross a 10 m disk at 2 m/s; 12 s can
    let slow = cfg_with(&base, &[("w", 12.0)]);
    let speeds = [2.0, 3.0, 5.0, 8.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    if let Some(d) = delay_series(rep, &slow, "v", &speeds) {
        rep.check("total delay decreasing in v", strictly_decreasing(&d), format!("[{}] at w = 12 s", fmt_series(&d)));
    }
}

// 8, 9 -------------------------------------------------------------------

const BASE_SEEDS: [u64; 4] = [1, 2, 3, 4];
const BASE_HORIZON: u64 = 20_000;
const BASE_WARMUP: u64 = 4_000;

fn baseline_sim() -> &'static Result<SimReport, String> {
    static SIM: OnceLock<Result<SimReport, String>> = OnceLock::new();
    SIM.get_or_init(|| replicate(&NetworkConfig::baseline(), &BASE_SEEDS, BASE_HORIZON, BASE_WARMUP, stationary()).map_err(|e| e.to_string()))
}

fn mdc_delay_variants(rep: &mut CriterionReport) {
    let a = analyze(&NetworkConfig::baseline());
    let Some(sim) = rep.attempt("baseline simulation", baseline_sim().as_ref()) else { return };
    let (Some(printed), Some(averaged), Some(d)) = (a.metric("d_q_m"), a.metric("d_q_m_averaged"), sim.get("d_q_m")) else {
        rep.check("inputs", false, "missing analytic or simulated MDC delay");
        return;
    };
    let v1 = ComparisonVerdict::relative("d_q_m (nearest-AP travel form)", printed, d.mean, 0.15).with_ci(d.ci_low, d.ci_high);
    let v2 = ComparisonVerdict::relative("d_q_m (averaged form)", averaged, d.mean, 0.15).with_ci(d.ci_low, d.ci_high);
    let within: Vec<&str> = [(&v1, "nearest-AP travel"), (&v2, "averaged")].iter().filter(|(v, _)| v.pass).map(|(_, n)| *n).collect();
    rep.note(v1.to_string());
    rep.note(v2.to_string());
    rep.note(format!(
        "simulated hops: collect {:.2} s, travel {:.2} s, unload {:.2} s; travel-only part of MDC delay {:.2} s",
        sim.mean("e_t_collect").unwrap_or(f64::NAN),
        sim.mean("e_t_smov").unwrap_or(f64::NAN),
        sim.mean("e_t_trans").unwrap_or(f64::NAN),
        sim.mean("d_q_m_travel").unwrap_or(f64::NAN)
    ));
    rep.check(
        "at least one variant within 15%",
        !within.is_empty(),
        if within.is_empty() { "neither variant".to_string() } else { format!("within: {}", within.join(", ")) },
    );
}

fn energy_trends(rep: &mut CriterionReport) {
    let base = cfg_with(&NetworkConfig::baseline(), &[("xi", 1.0)]);
    let grid = [1e-4, 2e-4, 5e-4, 1e-3, 1.5e-3, 2e-3];
    let reports: Vec<AnalyticReport> = grid.par_iter().map(|&x| analyze(&cfg_with(&base, &[("lambda_m", x)]))).collect();
    let mut e_s = Vec::new();
    let mut e_n = Vec::new();
    for (x, r) in grid.iter().zip(&reports) {
        match (r.metric("e_sensor"), r.metric("e_network")) {
            (Some(s), Some(n)) => {
                e_s.push(s);
                e_n.push(n);
            }
            _ => {
                let why = r.failure.as_ref().map_or("incomplete".to_string(), |e| e.to_string());
                rep.check(format!("energy at lambda_m={x:e}"), false, why);
            }
        }
    }
    if e_s.len() == grid.len() {
        rep.check("E_s decreasing in lambda_m", strictly_decreasing(&e_s), format!("[{}] mJ", fmt_series(&e_s)));
        rep.check("E_n decreasing in lambda_m", strictly_decreasing(&e_n), format!("[{}]", e_n.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")));
    } else {
        rep.note(format!("E_s over the evaluated points: [{}]", fmt_series(&e_s)));
        rep.note(format!("E_n over the evaluated points: [{}]", e_n.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")));
    }
    let a = analyze(&NetworkConfig::baseline());
    let Some(sim) = rep.attempt("baseline simulation", baseline_sim().as_ref()) else { return };
    match (a.metric("e_sensor"), sim.get("e_sensor")) {
        (Some(x), Some(s)) => {
            rep.verdict(ComparisonVerdict::relative("sensor energy per packet at baseline", x, s.mean, 0.10).with_ci(s.ci_low, s.ci_high));
            rep.note(format!(
                "simulated sensor success {:.4} vs analytic {:.4}",
                sim.mean("p_cov_m").unwrap_or(f64::NAN),
                a.metric("p_cov_m").unwrap_or(f64::NAN)
            ));
        }
        _ => rep.check("sensor energy per packet at baseline", false, "missing value"),
    }
}

// 10 ------------------------------------------------------------------------

fn central_diff(f: impl Fn(C64) -> C64, z: C64, h: f64) -> C64 {
    (f(z + h) - f(z - h)) / (2.0 * h)
}

fn relative_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn numerical_hygiene(rep: &mut CriterionReport) {
    let zs = [C64::new(0.05, 0.0), C64::new(0.5, 0.0), C64::new(2.0, 0.0), C64::new(0.2, 0.3), C64::new(1.0, -0.7)];
    let mut worst: f64 = 0.0;
    for p in [0.2, 0.6, 0.95] {
        for &z in &zs {
            let fd = central_diff(|s| service_lst(s, p), z, 1e-5);
            worst = worst.max(relative_gap(fd, service_lst_derivative(z, p)));
        }
    }
    for e_v in [0.5, 10.0, 200.0] {
        for &z in &zs {
            let h = 1e-5 / (1.0 + e_v * z.norm()).max(1.0);
            let fd = central_diff(|s| vacation_lst(s, e_v), z, h);
            worst = worst.max(relative_gap(fd, vacation_lst_derivative(z, e_v)));
        }
    }
    rep.check("LST derivatives vs finite differences", worst <= 1e-6, format!("worst relative gap {worst:.2e}"));

    let configs: [(&str, NetworkConfig); 5] = [
        ("baseline", NetworkConfig::baseline()),
        ("dense sensors and APs", dense_config()),
        ("near the stability edge", cfg_with(&NetworkConfig::baseline(), &[("lambda_s", 4.5e-3)])),
        ("sparse MDCs", cfg_with(&NetworkConfig::baseline(), &[("lambda_m", 5e-4)])),
        ("strict AP threshold", cfg_with(&NetworkConfig::baseline(), &[("t_a", 10.0)])),
    ];
    let opts = FixedPointOptions::default();
    for (name, cfg) in &configs {
        let Some(c) = rep.attempt(name, contact_stats(cfg)) else { continue };
        let m = (solve_mdc_fixed_point(cfg, &c, None, opts), solve_mdc_fixed_point(cfg, &c, Some(0.02), opts));
        if let (Some(a), Some(b)) = (rep.attempt(name, m.0), rep.attempt(name, m.1)) {
            let gap = (a.p_cov_m - b.p_cov_m).abs();
            rep.check(format!("MDC fixed point, two starts, {name}"), gap <= 1e-5, format!("{:.8} vs {:.8}", a.p_cov_m, b.p_cov_m));
        }
        let psi = cfg.xi * (c.e_ct + c.e_ict);
        let model = ApCoverageModel::DiskAveraged;
        let a = (solve_ap_fixed_point(cfg, &c, psi, model, None, opts), solve_ap_fixed_point(cfg, &c, psi, model, Some(0.02), opts));
        if let (Some(a), Some(b)) = (rep.attempt(name, a.0), rep.attempt(name, a.1)) {
            let gap = (a.p_cov_a - b.p_cov_a).abs();
            rep.check(format!("AP fixed point, two starts, {name}"), gap <= 1e-5, format!("{:.8} vs {:.8}", a.p_cov_a, b.p_cov_a));
        }
    }

    let cfg = NetworkConfig::baseline();
    let halving = |label: &str, tol: Tolerance, f: &dyn Fn(Tolerance) -> Result<f64, String>| -> Check {
        match (f(tol), f(tol.halved())) {
            (Ok(a), Ok(b)) => {
                let allowed = tol.abs.max(tol.rel * a.abs());
                Check {
                    label: format!("halved tolerance, {label}"),
                    pass: (a - b).abs() <= allowed,
                    detail: format!("{a:.10} vs {b:.10}, allowed {allowed:.1e}"),
                }
            }
            (Err(e), _) | (_, Err(e)) => Check { label: format!("halved tolerance, {label}"), pass: false, detail: e },
        }
    };
    for lambda in [6.668e-5, 5e-4] {
        rep.checks.push(halving(&format!("MDC coverage at {lambda:e}"), MDC_TOLERANCE, &|t| {
            coverage_mdc_with(lambda, &cfg, t).map(|e| e.value).map_err(|e| e.to_string())
        }));
    }
    for model in ApCoverageModel::ALL {
        rep.checks.push(halving(&format!("AP coverage, {model}"), AP_TOLERANCE, &|t| {
            coverage_ap_with(5.46e-6, &cfg, model, t).map(|e| e.value).map_err(|e| e.to_string())
        }));
    }
    for (a, t) in [(0.0, 1.0), (1.0, 10.0), (0.3, 0.1)] {
        rep.checks.push(halving(&format!("kernel G({a}) at T={t}"), Tolerance::abs(1e-10), &|tol| {
            interference_kernel(a, t, 3.0, tol).map(|e| e.value).map_err(|e| e.to_string())
        }));
    }
}
