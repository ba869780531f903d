//! Full analytic evaluation of one configuration.

use thiserror::Error;

use crate::contact::{contact_probability_approx, contact_stats, ContactError, ContactStats};
use crate::coverage::{solve_steady_state, ApCoverageModel, CoverageError, SteadyState};
use crate::delay_energy::{end_to_end_delay, energy, DelayBreakdown, DelayError, EnergyReport};
use crate::params::{ConfigWarning, NetworkConfig};
use crate::queue::{arrival_rate_bound, solve_g_limited, GLimitedSolution, QueueError, QueueInputs};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Delay(#[from] DelayError),
}

/// Whatever could be computed. Later stages are `None` once an earlier one
/// fails; `failure` says why.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticReport {
    pub config: NetworkConfig,
    pub warnings: Vec<ConfigWarning>,
    pub ap_model: ApCoverageModel,
    pub contact: Option<ContactStats>,
    pub p_ct_approx: f64,
    pub steady: Option<SteadyState>,
    /// Largest stable arrival rate at the solved coverage, packets/s.
    pub arrival_bound: Option<f64>,
    pub queue: Option<GLimitedSolution>,
    pub delays: Option<DelayBreakdown>,
    pub energy: Option<EnergyReport>,
    pub failure: Option<AnalyticError>,
}

impl AnalyticReport {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Every computed scalar as (metric name, value), in a fixed order.
    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        let mut m = Vec::new();
        if let Some(c) = &self.contact {
            m.extend([
                ("e_d", c.e_d),
                ("e_ct", c.e_ct),
                ("e_ict", c.e_ict),
                ("e_ict_s", c.e_ict_s),
                ("p_ct", c.p_ct),
                ("p_ct_approx", self.p_ct_approx),
            ]);
        }
        if let Some(s) = &self.steady {
            m.extend([
                ("p_cov_m", s.p_cov_m),
                ("p_q", s.p_q),
                ("p_act_s", s.p_act_s),
                ("lambda_s_eff", s.lambda_s_eff),
                ("p_cov_a", s.p_cov_a),
                ("p_act_m", s.p_act_m),
                ("lambda_m_eff", s.lambda_m_eff),
                ("a_b", s.a_b),
                ("n_c", s.n_c),
                ("e_t_collect", s.e_t_collect),
                ("e_t_smov", s.e_t_smov),
                ("e_t_trans", s.e_t_trans),
            ]);
        }
        if let Some(b) = self.arrival_bound {
            m.push(("xi_bound", b));
        }
        if let Some(q) = &self.queue {
            m.extend([
                ("xi_cap", q.xi_cap as f64),
                ("rho", q.rho),
                ("e_psi", q.e_psi),
                ("e_l_star", q.e_l_star),
                ("e_l_star_printed", q.e_l_star_printed),
                ("e_l", q.e_l),
                ("d_q_s_printed", q.d_q_s_printed),
            ]);
        }
        if let Some(d) = &self.delays {
            m.extend([
                ("d_q_s", d.d_q_s),
                ("d_t_s", d.d_t_s),
                ("d_q_m", d.d_q_m),
                ("d_q_m_averaged", d.d_q_m_averaged),
                ("d_t_m", d.d_t_m),
                ("total_delay", d.total),
                ("total_delay_averaged", d.total_averaged()),
            ]);
        }
        if let Some(e) = &self.energy {
            m.extend([("e_sensor", e.e_sensor), ("e_network", e.e_network)]);
        }
        m
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

pub fn analyze(cfg: &NetworkConfig) -> AnalyticReport {
    analyze_with(cfg, ApCoverageModel::default())
}

pub fn analyze_with(cfg: &NetworkConfig, ap_model: ApCoverageModel) -> AnalyticReport {
    let mut r = AnalyticReport {
        config: cfg.clone(),
        warnings: cfg.warnings(),
        ap_model,
        contact: None,
        p_ct_approx: contact_probability_approx(cfg.r_s, cfg.v, cfg.w, cfg.p, cfg.lambda_m),
        steady: None,
        arrival_bound: None,
        queue: None,
        delays: None,
        energy: None,
        failure: None,
    };
    if let Err(e) = fill(&mut r, cfg, ap_model) {
        r.failure = Some(e);
    }
    r
}

fn fill(r: &mut AnalyticReport, cfg: &NetworkConfig, ap_model: ApCoverageModel) -> Result<(), AnalyticError> {
    let contact = contact_stats(cfg)?;
    r.contact = Some(contact);
    let steady = solve_steady_state(cfg, &contact, ap_model)?;
    r.steady = Some(steady);
    r.arrival_bound = Some(arrival_rate_bound(steady.p_cov_m, cfg.delta, contact.e_ct, contact.e_ict));
    let queue = solve_g_limited(&QueueInputs {
        xi: cfg.xi,
        delta: cfg.delta,
        p_cov_m: steady.p_cov_m,
        e_ct: contact.e_ct,
        e_ict: contact.e_ict,
    })?;
    let delays = end_to_end_delay(cfg, &contact, &steady, queue.d_q_s)?;
    r.energy = Some(energy(cfg, &steady, queue.rho));
    r.queue = Some(queue);
    r.delays = Some(delays);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_report() {
        let r = analyze(&NetworkConfig::baseline());
        assert!(r.is_complete(), "{:?}", r.failure);
        assert!((r.metric("p_ct").unwrap() - 0.2595).abs() < 1e-3);
        assert!((r.metric("e_ct").unwrap() - 4.205).abs() < 1e-3);
        assert_eq!(r.metric("xi_cap"), Some(37.0));
        // the sensor hop waits about one contact cycle, E(Ψ)/ξ ≈ 16 s
        let total = r.metric("total_delay").unwrap();
        let d_q_s = r.metric("d_q_s").unwrap();
        assert!((d_q_s - 16.2).abs() < 0.5, "{d_q_s}");
        assert!((total - 127.2).abs() < 0.5, "{total}");
        assert!(r.metric("d_q_m").unwrap() / total > 0.85);
        let names: Vec<_> = r.metrics().iter().map(|m| m.0).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn unstable_report_is_partial() {
        let cfg = NetworkConfig::baseline().with_param("xi", 3.0).unwrap();
        let r = analyze(&cfg);
        assert!(matches!(r.failure, Some(AnalyticError::Queue(QueueError::Unstable { .. }))));
        assert!(r.contact.is_some() && r.steady.is_some() && r.arrival_bound.is_some());
        assert!(r.delays.is_none() && r.energy.is_none());
        assert!(r.arrival_bound.unwrap() < 3.0);
    }
}
