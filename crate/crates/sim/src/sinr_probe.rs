//! Monte Carlo SINR coverage under the interference geometry the coverage
//! integrals assume: link distance with density 2r/R², Rayleigh fading on
//! every link, and a planar PPP of interferers.
//!
//! The disk-averaged AP model is a PPP whose points at distance u from the AP
//! are kept with probability min(u²/R_a², 1); averaging the exclusion radius
//! over the disk in the exponent is exactly this thinning.
//!
//! Interferers are drawn out to [`FAR_FIELD`] link radii. Beyond that the
//! interference is replaced by its mean, which is off only at second order,
//! by about s²·Var(I_far)/2 in the Laplace transform (below 10⁻³ at the
//! densities used here).

use std::f64::consts::PI;

use mdcnet_core::coverage::ApCoverageModel;
use mdcnet_core::params::NetworkConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::seed::SeedSplitter;

/// Interferers are sampled out to this many link radii.
pub const FAR_FIELD: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    /// Largest link distance, m.
    pub radius: f64,
    pub power: f64,
    pub threshold: f64,
    pub alpha: f64,
    /// Noise, mW.
    pub noise: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interferers {
    /// Density λ beyond the link distance.
    BeyondLink(f64),
    /// Density λ, kept with probability min(u²/R², 1) at distance u.
    DiskThinned { density: f64, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    pub coverage: f64,
    /// Binomial standard error.
    pub std_error: f64,
    pub draws: u64,
}

pub fn probe(link: &Link, field: Interferers, draws: u64, seed: u64) -> ProbeResult {
    let mut rng = SeedSplitter::new(seed).rng(&[0x53]);
    let mut hits = 0u64;
    for _ in 0..draws {
        let r0 = link.radius * rng.random::<f64>().sqrt();
        if covered(link, field, r0, &mut rng) {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    ProbeResult { coverage: p, std_error: (p * (1.0 - p) / draws as f64).sqrt(), draws }
}

fn covered(link: &Link, field: Interferers, r0: f64, rng: &mut ChaCha8Rng) -> bool {
    let h: f64 = Exp1.sample(rng);
    let signal = link.power * h * r0.powf(-link.alpha);
    let (density, inner) = match field {
        Interferers::BeyondLink(d) => (d, r0),
        Interferers::DiskThinned { density, .. } => (density, 0.0),
    };
    if density <= 0.0 || r0 == 0.0 {
        return signal > link.threshold * link.noise;
    }
    let t = link.threshold;
    let outer = FAR_FIELD * link.radius;
    let mean = density * PI * (outer * outer - inner * inner);
    let n = Poisson::new(mean).expect("finite mean").sample(rng) as u64;
    // Campbell: 2πλP ∫_R^∞ u^{1−α} du
    let far = 2.0 * PI * density * link.power * outer.powf(2.0 - link.alpha) / (link.alpha - 2.0);
    // interference allowed before the link fails
    let budget = signal / t - link.noise - far;
    if budget <= 0.0 {
        return false;
    }
    let mut total = 0.0;
    for _ in 0..n {
        let u = (inner * inner + rng.random::<f64>() * (outer * outer - inner * inner)).sqrt();
        if let Interferers::DiskThinned { radius, .. } = field {
            if u < radius && rng.random::<f64>() >= (u / radius).powi(2) {
                continue;
            }
        }
        let g: f64 = Exp1.sample(rng);
        total += link.power * g * u.max(1e-9).powf(-link.alpha);
        if total >= budget {
            return false;
        }
    }
    true
}

/// Sensor-to-MDC coverage with active sensors of density `lambda_s_eff`.
pub fn probe_mdc(cfg: &NetworkConfig, lambda_s_eff: f64, draws: u64, seed: u64) -> ProbeResult {
    let link = Link { radius: cfg.r_s, power: cfg.p_s, threshold: cfg.t_s, alpha: cfg.alpha, noise: cfg.noise_mw() };
    probe(&link, Interferers::BeyondLink(lambda_s_eff), draws, seed)
}

/// MDC-to-AP coverage with transmitting MDCs of density `lambda_m_eff`.
pub fn probe_ap(cfg: &NetworkConfig, lambda_m_eff: f64, model: ApCoverageModel, draws: u64, seed: u64) -> ProbeResult {
    let link = Link { radius: cfg.r_a, power: cfg.p_m, threshold: cfg.t_a, alpha: cfg.alpha, noise: cfg.noise_mw() };
    let field = match model {
        ApCoverageModel::PlainPgfl => Interferers::BeyondLink(lambda_m_eff),
        ApCoverageModel::DiskAveraged => Interferers::DiskThinned { density: lambda_m_eff, radius: cfg.r_a },
    };
    probe(&link, field, draws, seed)
}

/// Mean interference at the origin from PPP points of density `density`
/// outside `exclusion`, unit power and fading, out to `outer`.
pub fn mean_interference(density: f64, alpha: f64, exclusion: f64, outer: f64, draws: u64, seed: u64) -> f64 {
    let mut rng = SeedSplitter::new(seed).rng(&[0x54]);
    let mean = density * PI * (outer * outer - exclusion * exclusion);
    let count = Poisson::new(mean).expect("finite mean");
    let mut sum = 0.0;
    for _ in 0..draws {
        let n = count.sample(&mut rng) as u64;
        for _ in 0..n {
            let u = (exclusion * exclusion + rng.random::<f64>() * (outer * outer - exclusion * exclusion)).sqrt();
            let g: f64 = Exp1.sample(&mut rng);
            sum += g * u.powf(-alpha);
        }
    }
    sum / draws as f64
}
