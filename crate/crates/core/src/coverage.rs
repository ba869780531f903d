//! SINR coverage at MDCs and APs, and the two self-consistent operating points
//! that tie coverage to traffic.
//!
//! Interferers are taken as PPPs thinned by their activity probability. With
//! Rayleigh fading, the interference Laplace transform of a PPP beyond distance
//! `a·r₀` reduces to exp(−2πλ′ r₀² G(a)) with
//!
//! ```text
//! G(a) = ∫_a^∞ T t / (T + t^α) dt.
//! ```
//!
//! MDC coverage is P(λ_s′) and λ_s′ depends on P through the sensor's busy
//! probability; the AP side has the same structure through the MDC transmit
//! duty cycle. Both are solved by damped iteration.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::contact::ContactStats;
use crate::params::NetworkConfig;
use crate::quadrature::{integrate, Estimate, QuadratureError, Tolerance};

/// Default tolerance of the MDC coverage integral.
pub const MDC_TOLERANCE: Tolerance = Tolerance { abs: 1e-9, rel: 0.0, max_subdivisions: 2000 };
/// Default tolerance of the AP coverage integral.
pub const AP_TOLERANCE: Tolerance = Tolerance { abs: 1e-8, rel: 0.0, max_subdivisions: 2000 };

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CoverageError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("{which} fixed point did not converge after {iterations} iterations: last {last}, residual {residual}")]
    FixedPointNotConverged { which: &'static str, last: f64, residual: f64, iterations: usize },
}

/// Which interference model the AP coverage integral uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ApCoverageModel {
    /// Interferer distance averaged over the aggregation disk before the
    /// PGFL exponent, inner integral from that distance outward.
    #[default]
    DiskAveraged,
    /// Plain PGFL: interferers beyond the link distance r₀, no disk layer.
    PlainPgfl,
}

impl ApCoverageModel {
    pub const ALL: [ApCoverageModel; 2] = [ApCoverageModel::DiskAveraged, ApCoverageModel::PlainPgfl];

    pub fn name(self) -> &'static str {
        match self {
            ApCoverageModel::DiskAveraged => "disk_averaged",
            ApCoverageModel::PlainPgfl => "plain_pgfl",
        }
    }
}

impl fmt::Display for ApCoverageModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// G(a) = ∫_a^∞ T t/(T + t^α) dt for α > 2.
///
/// The tail beyond max(a, 1) is mapped onto a finite interval by t = 1/s.
pub fn interference_kernel(a: f64, t: f64, alpha: f64, tol: Tolerance) -> Result<Estimate, QuadratureError> {
    assert!(alpha > 2.0 && a >= 0.0 && t >= 0.0);
    if t == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    // G grows like √T, so an absolute target alone is unreachable for large thresholds
    let tol = Tolerance { rel: tol.rel.max(1e-11), ..tol };
    let split = a.max(1.0);
    let near = if a < 1.0 {
        integrate(|x| t * x / (t + x.powf(alpha)), a, 1.0, tol)?
    } else {
        Estimate { value: 0.0, error: 0.0 }
    };
    let far = integrate(
        |s| {
            if s == 0.0 {
                return if alpha == 3.0 { t } else { 0.0 };
            }
            t * s.powf(alpha - 3.0) / (t * s.powf(alpha) + 1.0)
        },
        0.0,
        1.0 / split,
        tol,
    )?;
    Ok(Estimate { value: near.value + far.value, error: near.error + far.error })
}

/// MDC coverage for a density `lambda_s_eff` of active interfering sensors.
pub fn coverage_mdc(lambda_s_eff: f64, cfg: &NetworkConfig) -> Result<f64, QuadratureError> {
    coverage_mdc_with(lambda_s_eff, cfg, MDC_TOLERANCE).map(|e| e.value)
}

pub fn coverage_mdc_with(lambda_s_eff: f64, cfg: &NetworkConfig, tol: Tolerance) -> Result<Estimate, QuadratureError> {
    // error in G enters the exponent scaled by 2πλ′r²
    let scale = 2.0 * PI * lambda_s_eff * cfg.r_s * cfg.r_s;
    let g_abs = if scale > 0.0 { tol.abs * 1e-3 / scale } else { 1.0 };
    let g = interference_kernel(1.0, cfg.t_s, cfg.alpha, Tolerance { abs: g_abs, ..tol })?;
    let r = cfg.r_s;
    let noise = cfg.t_s * cfg.noise_mw() / cfg.p_s;
    let e = integrate(
        |r0| (-noise * r0.powf(cfg.alpha) - 2.0 * PI * lambda_s_eff * r0 * r0 * g.value).exp() * 2.0 * r0 / (r * r),
        0.0,
        r,
        tol,
    )?;
    Ok(Estimate { value: e.value, error: e.error + 2.0 * PI * lambda_s_eff * r * r * g.error })
}

/// AP coverage for a density `lambda_m_eff` of transmitting MDCs.
pub fn coverage_ap(lambda_m_eff: f64, cfg: &NetworkConfig, model: ApCoverageModel) -> Result<f64, QuadratureError> {
    coverage_ap_with(lambda_m_eff, cfg, model, AP_TOLERANCE).map(|e| e.value)
}

pub fn coverage_ap_with(
    lambda_m_eff: f64,
    cfg: &NetworkConfig,
    model: ApCoverageModel,
    tol: Tolerance,
) -> Result<Estimate, QuadratureError> {
    let ra = cfg.r_a;
    let (t, alpha) = (cfg.t_a, cfg.alpha);
    let noise = t * cfg.noise_mw() / cfg.p_m;
    // tolerances are set on the exponent 2πλ′·(layer), not on the layer
    let exp_tol = tol.abs * 1e-2;
    let inner_tol = Tolerance {
        abs: if lambda_m_eff > 0.0 { exp_tol / (2.0 * PI * lambda_m_eff) } else { 1.0 },
        rel: tol.rel.max(1e-10),
        ..tol
    };
    let mut failure = None;
    let mut extra_error: f64 = 0.0;
    let exponent = |r0: f64, failure: &mut Option<QuadratureError>, extra: &mut f64| -> f64 {
        if r0 == 0.0 || lambda_m_eff == 0.0 {
            return 0.0;
        }
        let layer = match model {
            ApCoverageModel::PlainPgfl => interference_kernel(1.0, t, alpha, Tolerance { abs: inner_tol.abs / (r0 * r0), ..inner_tol }).map(|g| Estimate { value: r0 * r0 * g.value, error: r0 * r0 * g.error }),
            ApCoverageModel::DiskAveraged => {
                let mut inner_failure = None;
                let mid = integrate(
                    |rx| {
                        if rx == 0.0 {
                            // G is finite at 0; the 2r_x weight vanishes anyway
                            return 0.0;
                        }
                        match interference_kernel(rx / r0, t, alpha, Tolerance { abs: 0.1 * inner_tol.abs / (r0 * r0), ..inner_tol }) {
                            Ok(g) => 2.0 * rx / (ra * ra) * r0 * r0 * g.value,
                            Err(e) => {
                                inner_failure.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    0.0,
                    ra,
                    inner_tol,
                );
                match (mid, inner_failure) {
                    (_, Some(e)) => Err(e),
                    (m, None) => m,
                }
            }
        };
        match layer {
            Ok(l) => {
                *extra = extra.max(2.0 * PI * lambda_m_eff * l.error);
                2.0 * PI * lambda_m_eff * l.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let e = integrate(
        |r0| 2.0 * r0 / (ra * ra) * (-noise * r0.powf(alpha) - exponent(r0, &mut failure, &mut extra_error)).exp(),
        0.0,
        ra,
        tol,
    )?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(Estimate { value: e.value, error: e.error + extra_error })
}

/// Probability that the tagged sensor has something to send while in
/// contact: min{δξ(E(CT)+E(ICT))/P, E(CT)} / E(CT).
pub fn sensor_nonempty_probability(p_cov_m: f64, cfg: &NetworkConfig, contact: &ContactStats) -> f64 {
    let busy = cfg.delta * cfg.xi * (contact.e_ct + contact.e_ict) / p_cov_m;
    busy.min(contact.e_ct) / contact.e_ct
}

/// 1 − (1 + λ_m/(3.5λ_b))^{−3.5}.
pub fn ap_association_probability(lambda_m: f64, lambda_b: f64) -> f64 {
    1.0 - (1.0 + lambda_m / (3.5 * lambda_b)).powf(-3.5)
}

/// Damped iteration x ← (1−γ)x + γF(x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub damping: f64,
    /// Stop once |Δx| falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { damping: 0.5, tol: 1e-9, max_iter: 2000 }
    }
}

struct Iterated {
    x: f64,
    iterations: usize,
    residual: f64,
}

fn damped_iteration<F>(which: &'static str, start: f64, opts: FixedPointOptions, mut f: F) -> Result<Iterated, CoverageError>
where
    F: FnMut(f64) -> Result<f64, CoverageError>,
{
    let mut x = start;
    for it in 1..=opts.max_iter {
        let next = (1.0 - opts.damping) * x + opts.damping * f(x)?;
        let step = (next - x).abs();
        x = next;
        if step < opts.tol {
            let residual = (f(x)? - x).abs();
            return Ok(Iterated { x, iterations: it, residual });
        }
    }
    let residual = (f(x)? - x).abs();
    Err(CoverageError::FixedPointNotConverged { which, last: x, residual, iterations: opts.max_iter })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MdcFixedPoint {
    pub p_cov_m: f64,
    pub p_q: f64,
    pub p_act_s: f64,
    pub lambda_s_eff: f64,
    pub iterations: usize,
    pub residual: f64,
    /// The sensor queue is busy for the whole contact at every candidate
    /// coverage, so the fixed point is a single evaluation.
    pub saturated: bool,
}

/// Solves P = coverage_mdc(P_ct · P_q(P) · λ_s). `start` defaults to the
/// interference-free coverage, which bounds every fixed point from above.
pub fn solve_mdc_fixed_point(
    cfg: &NetworkConfig,
    contact: &ContactStats,
    start: Option<f64>,
    opts: FixedPointOptions,
) -> Result<MdcFixedPoint, CoverageError> {
    let at = |x: f64| {
        let p_q = sensor_nonempty_probability(x, cfg, contact);
        let p_act_s = contact.p_ct * p_q;
        (p_q, p_act_s, p_act_s * cfg.lambda_s)
    };
    let free = coverage_mdc(0.0, cfg)?;
    if at(free).0 >= 1.0 {
        // P_q saturates at every x ≤ the interference-free coverage
        let lambda = contact.p_ct * cfg.lambda_s;
        let p = coverage_mdc(lambda, cfg)?;
        let (p_q, p_act_s, lambda_s_eff) = at(p);
        return Ok(MdcFixedPoint { p_cov_m: p, p_q, p_act_s, lambda_s_eff, iterations: 1, residual: 0.0, saturated: true });
    }
    let it = damped_iteration("MDC coverage", start.unwrap_or(free), opts, |x| {
        Ok(coverage_mdc(at(x).2, cfg)?)
    })?;
    let (p_q, p_act_s, lambda_s_eff) = at(it.x);
    Ok(MdcFixedPoint {
        p_cov_m: it.x,
        p_q,
        p_act_s,
        lambda_s_eff,
        iterations: it.iterations,
        residual: it.residual,
        saturated: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifecycle {
    /// Contacts needed to fill the buffer.
    pub n_c: f64,
    /// Time to the first contact, s.
    pub e_ht: f64,
    pub e_t_collect: f64,
    /// Travel time to the AP, s.
    pub e_t_smov: f64,
    pub e_t_trans: f64,
    pub e_t_ag: f64,
}

/// Mean travel time from an MDC to the aggregation disk of its nearest AP,
/// counting only trips that start outside it.
pub fn mdc_move_time(cfg: &NetworkConfig) -> Result<f64, QuadratureError> {
    // r = L u with πλ_b L² = 1 puts the bulk of the integrand near u ≈ 1
    let l = 1.0 / (PI * cfg.lambda_b).sqrt();
    let a = cfg.r_a / l;
    let tail = crate::quadrature::integrate_to_infinity(|u| 2.0 * u * u * (-u * u).exp(), a, Tolerance::abs(1e-12))?;
    Ok(l / cfg.v * tail.value)
}

pub fn lifecycle_times(cfg: &NetworkConfig, contact: &ContactStats, e_psi: f64, p_cov_a: f64) -> Result<Lifecycle, QuadratureError> {
    let e_t_smov = mdc_move_time(cfg)?;
    Ok(lifecycle_with_move_time(cfg, contact, e_psi, p_cov_a, e_t_smov))
}

fn lifecycle_with_move_time(cfg: &NetworkConfig, contact: &ContactStats, e_psi: f64, p_cov_a: f64, e_t_smov: f64) -> Lifecycle {
    let k = f64::from(cfg.k);
    let n_c = k / e_psi;
    let e_ht = contact.e_ict_s / 2.0;
    let e_t_collect = n_c * (contact.e_ct + contact.e_ict_s) - contact.e_ict_s / 2.0;
    let e_t_trans = k * cfg.delta / p_cov_a;
    Lifecycle { n_c, e_ht, e_t_collect, e_t_smov, e_t_trans, e_t_ag: e_t_smov + e_t_trans }
}

/// Fraction of time an MDC spends transmitting to its AP.
pub fn mdc_active_probability(l: &Lifecycle) -> f64 {
    l.e_t_trans / (l.e_t_collect + l.e_t_ag)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApFixedPoint {
    pub p_cov_a: f64,
    pub p_act_m: f64,
    pub lambda_m_eff: f64,
    pub a_b: f64,
    pub lifecycle: Lifecycle,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves P = coverage_ap(𝒜_b · P_act^M(P) · λ_b) with E(T_trans) = Kδ/P.
pub fn solve_ap_fixed_point(
    cfg: &NetworkConfig,
    contact: &ContactStats,
    e_psi: f64,
    model: ApCoverageModel,
    start: Option<f64>,
    opts: FixedPointOptions,
) -> Result<ApFixedPoint, CoverageError> {
    let e_t_smov = mdc_move_time(cfg)?;
    let a_b = ap_association_probability(cfg.lambda_m, cfg.lambda_b);
    let at = |y: f64| {
        let l = lifecycle_with_move_time(cfg, contact, e_psi, y, e_t_smov);
        let p_act_m = mdc_active_probability(&l);
        (l, p_act_m, a_b * p_act_m * cfg.lambda_b)
    };
    let free = coverage_ap(0.0, cfg, model)?;
    let it = damped_iteration("AP coverage", start.unwrap_or(free), opts, |y| Ok(coverage_ap(at(y).2, cfg, model)?))?;
    let (lifecycle, p_act_m, lambda_m_eff) = at(it.x);
    Ok(ApFixedPoint { p_cov_a: it.x, p_act_m, lambda_m_eff, a_b, lifecycle, iterations: it.iterations, residual: it.residual })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyState {
    pub p_cov_m: f64,
    pub p_cov_a: f64,
    pub p_q: f64,
    pub p_act_s: f64,
    pub lambda_s_eff: f64,
    pub p_act_m: f64,
    pub lambda_m_eff: f64,
    pub a_b: f64,
    pub n_c: f64,
    pub e_t_collect: f64,
    pub e_ht: f64,
    pub e_t_smov: f64,
    pub e_t_trans: f64,
    pub e_t_ag: f64,
    pub iterations_m: usize,
    pub iterations_a: usize,
    pub residual_m: f64,
    pub residual_a: f64,
    pub ap_model: ApCoverageModel,
}

/// Both operating points, with E(Ψ) = ξ(E(CT)+E(ICT)).
pub fn solve_steady_state(cfg: &NetworkConfig, contact: &ContactStats, model: ApCoverageModel) -> Result<SteadyState, CoverageError> {
    let opts = FixedPointOptions::default();
    let m = solve_mdc_fixed_point(cfg, contact, None, opts)?;
    let e_psi = cfg.xi * (contact.e_ct + contact.e_ict);
    let a = solve_ap_fixed_point(cfg, contact, e_psi, model, None, opts)?;
    let l = a.lifecycle;
    Ok(SteadyState {
        p_cov_m: m.p_cov_m,
        p_cov_a: a.p_cov_a,
        p_q: m.p_q,
        p_act_s: m.p_act_s,
        lambda_s_eff: m.lambda_s_eff,
        p_act_m: a.p_act_m,
        lambda_m_eff: a.lambda_m_eff,
        a_b: a.a_b,
        n_c: l.n_c,
        e_t_collect: l.e_t_collect,
        e_ht: l.e_ht,
        e_t_smov: l.e_t_smov,
        e_t_trans: l.e_t_trans,
        e_t_ag: l.e_t_ag,
        iterations_m: m.iterations,
        iterations_a: a.iterations,
        residual_m: m.residual,
        residual_a: a.residual,
        ap_model: model,
    })
}
