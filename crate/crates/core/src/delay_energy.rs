//! Per-hop delays, end-to-end delay and energy per packet.

use thiserror::Error;

use crate::contact::ContactStats;
use crate::coverage::{Lifecycle, SteadyState};
use crate::params::NetworkConfig;

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum DelayError {
    #[error("coverage probability {0} is not in (0, 1]")]
    ZeroCoverage(f64),
}

/// Delays in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayBreakdown {
    /// Waiting in the sensor queue.
    pub d_q_s: f64,
    /// Sensor to MDC, retransmissions included.
    pub d_t_s: f64,
    /// Time in the MDC buffer before unloading starts: E(T_collect) + E(T_Smov).
    pub d_q_m: f64,
    /// The same hop averaged over the collection slot of a random packet.
    pub d_q_m_averaged: f64,
    /// MDC to AP.
    pub d_t_m: f64,
    pub total: f64,
}

impl DelayBreakdown {
    /// Total with the averaged MDC hop in place of `d_q_m`.
    pub fn total_averaged(&self) -> f64 {
        self.d_q_s + self.d_t_s + self.d_q_m_averaged + self.d_t_m
    }
}

/// Mean slots to success are geometric with mean 1/P.
pub fn transmission_delays(delta: f64, p_cov_m: f64, p_cov_a: f64) -> Result<(f64, f64), DelayError> {
    for p in [p_cov_m, p_cov_a] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(DelayError::ZeroCoverage(p));
        }
    }
    Ok((delta / p_cov_m, delta / p_cov_a))
}

/// Returns (verbatim, averaged) MDC-hop delays.
pub fn mdc_queueing_delay(contact: &ContactStats, lifecycle: &Lifecycle) -> (f64, f64) {
    let verbatim = lifecycle.e_t_collect + lifecycle.e_t_smov;
    let cycle = contact.e_ct + contact.e_ict_s;
    let averaged = (lifecycle.n_c - 1.0) / 2.0 * cycle + contact.e_ct / 2.0 + lifecycle.e_t_smov;
    (verbatim, averaged)
}

pub fn end_to_end_delay(cfg: &NetworkConfig, contact: &ContactStats, steady: &SteadyState, d_q_s: f64) -> Result<DelayBreakdown, DelayError> {
    let (d_t_s, d_t_m) = transmission_delays(cfg.delta, steady.p_cov_m, steady.p_cov_a)?;
    let lifecycle = Lifecycle {
        n_c: steady.n_c,
        e_ht: steady.e_ht,
        e_t_collect: steady.e_t_collect,
        e_t_smov: steady.e_t_smov,
        e_t_trans: steady.e_t_trans,
        e_t_ag: steady.e_t_ag,
    };
    let (d_q_m, d_q_m_averaged) = mdc_queueing_delay(contact, &lifecycle);
    Ok(DelayBreakdown { d_q_s, d_t_s, d_q_m, d_q_m_averaged, d_t_m, total: d_q_s + d_t_s + d_q_m + d_t_m })
}

/// Energy in mJ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    /// Per packet at a sensor.
    pub e_sensor: f64,
    /// Per packet per m², sensors and MDCs together.
    pub e_network: f64,
}

/// `rho` is the sensor's busy fraction ξδ/P_cov^M.
pub fn energy(cfg: &NetworkConfig, steady: &SteadyState, rho: f64) -> EnergyReport {
    let e_sensor = cfg.p_s * cfg.delta / steady.p_cov_m + (1.0 - rho) / cfg.xi * cfg.p_sleep;
    let e_network = steady.lambda_s_eff * e_sensor + steady.lambda_m_eff * cfg.p_m * cfg.delta / steady.p_cov_a;
    EnergyReport { e_sensor, e_network }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::contact_stats;
    use crate::coverage::{solve_steady_state, ApCoverageModel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Geometric};

    fn baseline() -> (NetworkConfig, ContactStats, SteadyState) {
        let cfg = NetworkConfig::baseline();
        let contact = contact_stats(&cfg).unwrap();
        let ss = solve_steady_state(&cfg, &contact, ApCoverageModel::DiskAveraged).unwrap();
        (cfg, contact, ss)
    }

    #[test]
    fn transmission_delay_is_geometric_mean() {
        assert_eq!(transmission_delays(0.1, 1.0, 1.0).unwrap(), (0.1, 0.1));
        assert_relative_eq!(transmission_delays(0.1, 0.5, 0.5).unwrap().0, 0.2);
        assert!(transmission_delays(0.1, 0.0, 0.5).is_err());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = Geometric::new(0.8).unwrap();
        let n = 100_000;
        // rand_distr counts failures before the first success
        let mean = (0..n).map(|_| g.sample(&mut rng) as f64 + 1.0).sum::<f64>() / n as f64;
        assert!((mean * 0.8 - 1.0).abs() < 0.01);
    }

    #[test]
    fn mdc_hop_variants() {
        let (cfg, contact, ss) = baseline();
        let d = end_to_end_delay(&cfg, &contact, &ss, 0.0).unwrap();
        assert!((d.d_q_m - 110.36).abs() < 0.1, "{}", d.d_q_m);
        assert!((d.d_q_m_averaged - 57.0).abs() < 0.1, "{}", d.d_q_m_averaged);
        assert!(d.d_q_m > d.d_q_m_averaged);
        // one contact's worth of buffer: both collapse to E(CT) scale + travel
        let l = Lifecycle { n_c: 1.0, e_ht: 6.0, e_t_collect: contact.e_ct + contact.e_ict_s / 2.0, e_t_smov: ss.e_t_smov, e_t_trans: 0.0, e_t_ag: 0.0 };
        let (v, a) = mdc_queueing_delay(&contact, &l);
        assert_relative_eq!(a, contact.e_ct / 2.0 + ss.e_t_smov, max_relative = 1e-12);
        assert!(v - ss.e_t_smov < contact.e_ct + contact.e_ict_s);
    }

    #[test]
    fn baseline_total_dominated_by_mdc_hop() {
        let (cfg, contact, ss) = baseline();
        let d = end_to_end_delay(&cfg, &contact, &ss, 1.0).unwrap();
        assert_relative_eq!(d.total, d.d_q_s + d.d_t_s + d.d_q_m + d.d_t_m);
        assert!(d.d_q_m / d.total > 0.95);
    }

    #[test]
    fn energy_limits_and_linearity() {
        let (cfg, _, mut ss) = baseline();
        ss.p_cov_m = 1.0;
        let zero_sleep = cfg.with_param("p_sleep", 1e-300).unwrap();
        assert_relative_eq!(energy(&zero_sleep, &ss, 0.3).e_sensor, cfg.p_s * cfg.delta, max_relative = 1e-12);
        let e1 = energy(&cfg, &ss, 1.0);
        assert_relative_eq!(e1.e_sensor, cfg.p_s * cfg.delta, max_relative = 1e-12);
        let e = energy(&cfg, &ss, 0.2);
        assert!(e.e_network >= ss.lambda_s_eff * e.e_sensor);
        for name in ["p_s", "p_m", "p_sleep"] {
            let at = |k: f64| energy(&cfg.with_param(name, cfg.get(name).unwrap() * k).unwrap(), &ss, 0.2);
            let (x1, x2, x3) = (at(1.0), at(2.0), at(3.0));
            assert_relative_eq!(x3.e_network - x2.e_network, x2.e_network - x1.e_network, max_relative = 1e-9, epsilon = 1e-30);
            assert_relative_eq!(x3.e_sensor - x2.e_sensor, x2.e_sensor - x1.e_sensor, max_relative = 1e-9, epsilon = 1e-30);
        }
    }

    proptest! {
        #[test]
        fn delay_decreases_with_coverage(pm in 0.05f64..0.95, pa in 0.05f64..0.95, bump in 0.001f64..0.05) {
            let (cfg, contact, ss) = baseline();
            let mut lo = ss;
            lo.p_cov_m = pm;
            lo.p_cov_a = pa;
            let mut hi_m = lo;
            hi_m.p_cov_m = pm + bump;
            let mut hi_a = lo;
            hi_a.p_cov_a = pa + bump;
            let d = end_to_end_delay(&cfg, &contact, &lo, 1.0).unwrap().total;
            prop_assert!(end_to_end_delay(&cfg, &contact, &hi_m, 1.0).unwrap().total < d);
            prop_assert!(end_to_end_delay(&cfg, &contact, &hi_a, 1.0).unwrap().total < d);
        }

        #[test]
        fn verbatim_exceeds_averaged(n_c in 1.01f64..50.0, ct in 0.5f64..20.0, icts in 0.5f64..50.0) {
            let contact = ContactStats { e_ct: ct, e_ict: icts, e_ict_s: icts, e_d: 1.0, p_pause: 0.0, e_tw: 0.0, e_tp: 0.0, p_ct: 0.5 };
            let l = Lifecycle { n_c, e_ht: icts / 2.0, e_t_collect: n_c * (ct + icts) - icts / 2.0, e_t_smov: 3.0, e_t_trans: 1.0, e_t_ag: 4.0 };
            let (v, a) = mdc_queueing_delay(&contact, &l);
            prop_assert!(v > a);
        }
    }
}
