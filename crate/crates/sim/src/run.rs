//! Single runs and pooled replications.

use mdcnet_core::params::NetworkConfig;
use rayon::prelude::*;
use thiserror::Error;

use crate::stats::{normal_ci, Running};
use crate::world::{Counters, SimOptions, World};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunCounts {
    pub delivered: u64,
    pub uplink_packets: u64,
    pub contacts: u64,
    pub collections: u64,
    pub attempts_s: u64,
    pub attempts_a: u64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("horizon of {horizon} slots does not exceed the warm-up of {warmup} slots")]
    BadHorizon { horizon: u64, warmup: u64 },
    #[error("no packet reached an AP after warm-up (seed {seed}; {counts:?})")]
    NoDeliveries { seed: u64, counts: RunCounts },
    #[error("at least two seeds are needed for a confidence interval, got {0}")]
    TooFewSeeds(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    pub horizon_slots: u64,
    pub warmup_slots: u64,
    /// (metric, value) for every metric with at least one sample.
    pub estimates: Vec<(&'static str, f64)>,
    pub counts: RunCounts,
    /// Mean per-sensor queue length every `trace_every` slots, from slot 0.
    pub queue_trace: Vec<f64>,
    pub trace_every: u64,
}

impl RunReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.estimates.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

/// Every metric a run can report, in output order.
pub const SIM_METRICS: [&str; 21] = [
    "e_ct",
    "e_ct_union",
    "e_ict",
    "e_ict_s",
    "p_cov_m",
    "p_cov_a",
    "lambda_s_eff",
    "lambda_m_eff",
    "e_t_collect",
    "e_t_smov",
    "e_t_trans",
    "d_q_s",
    "d_t_s",
    "d_q_m",
    "d_q_m_travel",
    "d_t_m",
    "total_delay",
    "total_delay_sum",
    "e_l",
    "e_sensor",
    "e_network",
];

fn estimates(cfg: &NetworkConfig, c: &Counters, sensors: usize) -> Vec<(&'static str, f64)> {
    let area = cfg.arena_side * cfg.arena_side;
    let slots = c.measured_slots as f64;
    let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
    let mean = |r: &Running| r.mean();
    let lambda_s_eff = (slots > 0.0).then(|| c.active_sensor_sum as f64 / slots / area);
    let lambda_m_eff = (slots > 0.0).then(|| c.tx_mdc_sum as f64 / slots / area);
    let sensor_energy = cfg.delta * (cfg.p_s * c.sensor_tx_slots as f64 + cfg.p_sleep * c.sensor_sleep_slots as f64);
    let e_sensor = (c.uplink_packets > 0).then(|| sensor_energy / c.uplink_packets as f64);
    let mdc_per_packet = (c.delivered > 0).then(|| cfg.p_m * cfg.delta * c.mdc_tx_slots as f64 / c.delivered as f64);
    let e_network = match (lambda_s_eff, e_sensor, lambda_m_eff, mdc_per_packet) {
        (Some(ls), Some(es), Some(lm), Some(em)) => Some(ls * es + lm * em),
        _ => None,
    };
    let parts = [mean(&c.d_q_s), mean(&c.d_t_s), mean(&c.d_q_m), mean(&c.d_t_m)];
    let sum = parts.iter().try_fold(0.0, |acc, p| p.map(|v| acc + v));
    let values = [
        mean(&c.pair_contact),
        mean(&c.contact_busy),
        mean(&c.contact_idle),
        mean(&c.mdc_idle),
        ratio(c.successes_s, c.attempts_s),
        ratio(c.successes_a, c.attempts_a),
        lambda_s_eff,
        lambda_m_eff,
        mean(&c.t_collect),
        mean(&c.t_smov),
        mean(&c.t_trans),
        parts[0],
        parts[1],
        parts[2],
        mean(&c.d_q_m_travel),
        parts[3],
        mean(&c.total),
        sum,
        (slots > 0.0 && sensors > 0).then(|| c.queue_area / slots / sensors as f64),
        e_sensor,
        e_network,
    ];
    SIM_METRICS.iter().zip(values).filter_map(|(&n, v)| v.map(|v| (n, v))).collect()
}

/// One replication: deploy with `seed`, run `horizon_slots`, measure after
/// `warmup_slots`.
pub fn run(cfg: &NetworkConfig, seed: u64, horizon_slots: u64, warmup_slots: u64, opts: SimOptions) -> Result<RunReport, SimError> {
    if horizon_slots <= warmup_slots {
        return Err(SimError::BadHorizon { horizon: horizon_slots, warmup: warmup_slots });
    }
    let mut world = World::deploy(cfg, seed, opts);
    world.set_warmup(warmup_slots);
    world.run_slots(horizon_slots);
    let c = world.counters();
    let counts = RunCounts {
        delivered: c.delivered,
        uplink_packets: c.uplink_packets,
        contacts: c.pair_contact.count(),
        collections: c.t_collect.count(),
        attempts_s: c.attempts_s,
        attempts_a: c.attempts_a,
    };
    if c.delivered == 0 {
        return Err(SimError::NoDeliveries { seed, counts });
    }
    Ok(RunReport {
        seed,
        horizon_slots,
        warmup_slots,
        estimates: estimates(cfg, c, world.sensor_count()),
        counts,
        queue_trace: world.queue_trace().to_vec(),
        trace_every: opts.trace_every,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pooled {
    pub name: &'static str,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Replications that reported the metric.
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub config: NetworkConfig,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunReport>,
    pub pooled: Vec<Pooled>,
}

impl SimReport {
    pub fn get(&self, name: &str) -> Option<&Pooled> {
        self.pooled.iter().find(|p| p.name == name)
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.mean)
    }
}

/// Pools per-replication estimates; metrics reported by fewer than two
/// replications are left out.
pub fn pool(runs: &[RunReport]) -> Vec<Pooled> {
    SIM_METRICS
        .iter()
        .filter_map(|&name| {
            let xs: Vec<f64> = runs.iter().filter_map(|r| r.get(name)).collect();
            normal_ci(&xs).map(|ci| Pooled { name, mean: ci.mean, ci_low: ci.lo, ci_high: ci.hi, n: ci.n })
        })
        .collect()
}

/// Independent replications in parallel; output order follows `seeds`.
pub fn replicate(cfg: &NetworkConfig, seeds: &[u64], horizon_slots: u64, warmup_slots: u64, opts: SimOptions) -> Result<SimReport, SimError> {
    if seeds.len() < 2 {
        return Err(SimError::TooFewSeeds(seeds.len()));
    }
    let runs = seeds
        .par_iter()
        .map(|&s| run(cfg, s, horizon_slots, warmup_slots, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimReport { config: cfg.clone(), seeds: seeds.to_vec(), pooled: pool(&runs), runs })
}
