//! Sensor–MDC contact statistics under simple random waypoint mobility.
//!
//! An MDC pauses for `p`, then walks for `w` at speed `v` in a uniform random
//! direction, and repeats. A sensor is "in contact" while some MDC is within
//! `R_s`. Contact and inter-contact periods alternate, so the long-run contact
//! probability is E(CT) / (E(CT) + E(ICT)).

use std::f64::consts::PI;

use thiserror::Error;

use crate::params::NetworkConfig;
use crate::quadrature::{integrate, QuadratureError, Tolerance};

/// Linear fit of E(D) in units of R_s.
pub const CHORD_FIT: f64 = 1.1318;

/// Coefficient of the small-R_s correction in the approximate contact probability.
pub const CONTACT_FIT: f64 = 0.6428;

/// Angular grid of the trapezoid rule used for E(D).
pub const CHORD_ANGLE_POINTS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChordMethod {
    /// Numerical evaluation of the defining triple integral.
    Integral,
    /// 1.1318 · R_s.
    Fit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactMethod {
    /// E(CT) / (E(CT) + E(ICT)).
    Exact,
    /// Closed form with the E(D) fit folded in.
    Approx,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ContactError {
    #[error("density is zero: no contact ever happens")]
    ZeroDensity,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactStats {
    /// Mean contact time, s.
    pub e_ct: f64,
    /// Mean inter-contact time seen by a sensor, s.
    pub e_ict: f64,
    /// Mean gap between an MDC's contacts with successive sensors, s.
    pub e_ict_s: f64,
    /// Mean distance from a uniform point in the contact disk to a uniform
    /// point on its rim, m.
    pub e_d: f64,
    /// Probability that a crossing MDC pauses inside the disk.
    pub p_pause: f64,
    /// Mean straight crossing time, s.
    pub e_tw: f64,
    /// Mean time of a crossing with a pause inside, s.
    pub e_tp: f64,
    /// Long-run fraction of time a sensor is in contact.
    pub p_ct: f64,
}

/// Mean distance between a uniform point inside a disk of radius `r_s` and a
/// uniform point on its boundary.
///
/// The integral method applies a 256-point trapezoid rule to both angles and
/// adaptive quadrature to the radius, to relative tolerance 10⁻⁴ (the
/// trapezoid is spectrally accurate on the periodic angular integrand).
pub fn expected_chord(r_s: f64, method: ChordMethod) -> Result<f64, QuadratureError> {
    assert!(r_s > 0.0, "contact radius must be positive");
    match method {
        ChordMethod::Fit => Ok(CHORD_FIT * r_s),
        ChordMethod::Integral => chord_integral(r_s, CHORD_ANGLE_POINTS, 1e-10),
    }
}

fn chord_integral(r_s: f64, n: usize, inner_rel: f64) -> Result<f64, QuadratureError> {
    // The integrand depends on the angles only through α − θ, and on a common
    // uniform grid that difference takes just n values; compute each radial
    // integral once.
    let h = 2.0 * PI / n as f64;
    let mut radial = Vec::with_capacity(n);
    for d in 0..n {
        let c = (d as f64 * h).cos();
        let e = integrate(
            |r| r * (r * r + r_s * r_s - 2.0 * r * r_s * c).max(0.0).sqrt(),
            0.0,
            r_s,
            Tolerance { abs: 1e-300, rel: inner_rel, max_subdivisions: 2000 },
        )?;
        radial.push(e.value);
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += radial[(i + n - j) % n];
        }
    }
    Ok(sum * h * h / (2.0 * PI * PI * r_s * r_s))
}

/// (P_p, E(T_w), E(T_p)) for a given mean chord `e_d`.
pub fn components_with_chord(r_s: f64, v: f64, w: f64, p: f64, e_d: f64) -> (f64, f64, f64) {
    let p_pause = PI * r_s / (2.0 * w * v);
    let e_tw = PI * r_s / (2.0 * v);
    let e_tp = 2.0 * e_d / v + p;
    (p_pause, e_tw, e_tp)
}

/// (P_p, E(T_w), E(T_p)) with E(D) from the integral.
pub fn contact_components(cfg: &NetworkConfig) -> Result<(f64, f64, f64), QuadratureError> {
    let e_d = expected_chord(cfg.r_s, ChordMethod::Integral)?;
    Ok(components_with_chord(cfg.r_s, cfg.v, cfg.w, cfg.p, e_d))
}

/// E(CT) = πR[2v(w+p) + 4E(D) − πR] / (4wv²).
pub fn contact_time_closed_form(r_s: f64, v: f64, w: f64, p: f64, e_d: f64) -> f64 {
    PI * r_s * (2.0 * v * (w + p) + 4.0 * e_d - PI * r_s) / (4.0 * w * v * v)
}

pub fn expected_contact_time(cfg: &NetworkConfig) -> Result<f64, QuadratureError> {
    let e_d = expected_chord(cfg.r_s, ChordMethod::Integral)?;
    Ok(contact_time_closed_form(cfg.r_s, cfg.v, cfg.w, cfg.p, e_d))
}

/// Mean gap between contacts with a population of the given density:
/// (w+p) / (2wv·density·R). With the MDC density this is E(ICT); with the
/// sensor density it is E(ICT_s).
pub fn expected_intercontact_time(r: f64, v: f64, w: f64, p: f64, density: f64) -> Result<f64, ContactError> {
    if density <= 0.0 {
        return Err(ContactError::ZeroDensity);
    }
    Ok((w + p) / (2.0 * w * v * density * r))
}

pub fn contact_probability(cfg: &NetworkConfig, method: ContactMethod) -> Result<f64, ContactError> {
    match method {
        ContactMethod::Exact => {
            let ct = expected_contact_time(cfg)?;
            match expected_intercontact_time(cfg.r_s, cfg.v, cfg.w, cfg.p, cfg.lambda_m) {
                Ok(ict) => Ok(ct / (ct + ict)),
                Err(ContactError::ZeroDensity) => Ok(0.0),
                Err(e) => Err(e),
            }
        }
        ContactMethod::Approx => Ok(contact_probability_approx(cfg.r_s, cfg.v, cfg.w, cfg.p, cfg.lambda_m)),
    }
}

/// 1 / (1 + 1/(πR²λ_m[1 + 0.6428R/(v(w+p))])).
pub fn contact_probability_approx(r_s: f64, v: f64, w: f64, p: f64, lambda_m: f64) -> f64 {
    let x = PI * r_s * r_s * lambda_m * (1.0 + CONTACT_FIT * r_s / (v * (w + p)));
    if x <= 0.0 {
        0.0
    } else {
        1.0 / (1.0 + 1.0 / x)
    }
}

/// Every contact quantity for a configuration, E(D) by the integral.
pub fn contact_stats(cfg: &NetworkConfig) -> Result<ContactStats, ContactError> {
    let e_d = expected_chord(cfg.r_s, ChordMethod::Integral)?;
    contact_stats_with_chord(cfg, e_d)
}

pub fn contact_stats_with_chord(cfg: &NetworkConfig, e_d: f64) -> Result<ContactStats, ContactError> {
    let (p_pause, e_tw, e_tp) = components_with_chord(cfg.r_s, cfg.v, cfg.w, cfg.p, e_d);
    let e_ct = contact_time_closed_form(cfg.r_s, cfg.v, cfg.w, cfg.p, e_d);
    let e_ict = expected_intercontact_time(cfg.r_s, cfg.v, cfg.w, cfg.p, cfg.lambda_m)?;
    let e_ict_s = expected_intercontact_time(cfg.r_s, cfg.v, cfg.w, cfg.p, cfg.lambda_s)?;
    Ok(ContactStats { e_ct, e_ict, e_ict_s, e_d, p_pause, e_tw, e_tp, p_ct: e_ct / (e_ct + e_ict) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ConfigCandidate;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg_with(f: impl FnOnce(&mut ConfigCandidate)) -> NetworkConfig {
        let mut c = ConfigCandidate::baseline();
        f(&mut c);
        c.validate().unwrap()
    }

    #[test]
    fn chord_fit_and_integral() {
        assert_relative_eq!(expected_chord(10.0, ChordMethod::Fit).unwrap(), 11.318, max_relative = 1e-12);
        let e = expected_chord(10.0, ChordMethod::Integral).unwrap();
        assert!((e / 11.318 - 1.0).abs() < 0.01);
        // Independent closed form for the disk-to-rim mean distance: 32R/(9π).
        assert_relative_eq!(e, 320.0 / (9.0 * PI), max_relative = 1e-4);
    }

    #[test]
    fn chord_integral_is_converged() {
        let coarse = chord_integral(1.0, 128, 1e-8).unwrap();
        let fine = chord_integral(1.0, 512, 1e-12).unwrap();
        assert!((coarse / fine - 1.0).abs() < 1e-4);
    }

    #[test]
    fn chord_scales_linearly() {
        let a = expected_chord(7.0, ChordMethod::Integral).unwrap();
        let b = expected_chord(14.0, ChordMethod::Integral).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-6);
    }

    #[test]
    fn baseline_components() {
        let cfg = NetworkConfig::baseline();
        let (p_pause, e_tw, e_tp) = components_with_chord(10.0, 5.0, 10.0, 2.0, 11.318);
        assert_relative_eq!(p_pause, PI / 10.0, max_relative = 1e-12);
        assert_relative_eq!(e_tw, PI, max_relative = 1e-12);
        assert_relative_eq!(e_tp, 6.5272, max_relative = 1e-12);
        let (pp, tw, _) = contact_components(&cfg).unwrap();
        assert_eq!((pp, tw), (p_pause, e_tw));
    }

    #[test]
    fn baseline_contact_time() {
        let cfg = NetworkConfig::baseline();
        let ct = expected_contact_time(&cfg).unwrap();
        assert!((ct - 4.205).abs() < 5e-4, "{ct}");
        let s = contact_stats(&cfg).unwrap();
        let mix = (1.0 - s.p_pause) * s.e_tw + s.p_pause * s.e_tp;
        assert_relative_eq!(s.e_ct, mix, max_relative = 1e-3);
        assert_relative_eq!(s.e_ict, 12.0, max_relative = 1e-12);
        assert_relative_eq!(s.e_ict_s, 12.0, max_relative = 1e-12);
        assert!((s.p_ct - 0.2595).abs() < 5e-5, "{}", s.p_ct);
    }

    #[test]
    fn intercontact_time() {
        assert_relative_eq!(expected_intercontact_time(10.0, 5.0, 10.0, 2.0, 1e-3).unwrap(), 12.0, max_relative = 1e-12);
        assert_relative_eq!(expected_intercontact_time(10.0, 5.0, 10.0, 2.0, 1e-4).unwrap(), 120.0, max_relative = 1e-12);
        assert_eq!(expected_intercontact_time(10.0, 5.0, 10.0, 2.0, 0.0), Err(ContactError::ZeroDensity));
    }

    #[test]
    fn contact_probability_methods() {
        let cfg = NetworkConfig::baseline();
        let approx = contact_probability(&cfg, ContactMethod::Approx).unwrap();
        assert!((approx - 0.258).abs() < 5e-4, "{approx}");
        assert!(contact_probability_approx(10.0, 5.0, 10.0, 2.0, 0.0) == 0.0);
        // vanishing MDC density drives both towards zero
        let sparse = cfg_with(|c| c.lambda_m = 1e-12);
        assert!(contact_probability(&sparse, ContactMethod::Exact).unwrap() < 1e-9);
    }

    #[test]
    fn monotone_trends() {
        // w = 60 s keeps every grid point valid
        let at = |v: f64, r: f64, lm: f64| {
            contact_stats(&cfg_with(|c| {
                c.v = v;
                c.r_s = r;
                c.lambda_m = lm;
                c.w = 60.0;
            }))
            .unwrap()
        };
        let speeds = [1.0, 2.0, 5.0, 10.0, 20.0, 30.0];
        for pair in speeds.windows(2) {
            let (lo, hi) = (at(pair[0], 10.0, 1e-3), at(pair[1], 10.0, 1e-3));
            assert!(hi.e_ct < lo.e_ct && hi.e_ict < lo.e_ict);
        }
        let radii = [4.0, 8.0, 12.0, 20.0, 30.0];
        for pair in radii.windows(2) {
            let (lo, hi) = (at(5.0, pair[0], 1e-3), at(5.0, pair[1], 1e-3));
            assert!(hi.e_ct > lo.e_ct && hi.e_ict < lo.e_ict);
        }
        assert!(at(5.0, 10.0, 2e-3).e_ict < at(5.0, 10.0, 1e-3).e_ict);
    }

    #[test]
    fn approx_tracks_exact() {
        for r in [5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
            for v in [1.0f64, 2.0, 5.0, 10.0, 20.0, 30.0] {
                // keep the walk long enough for the model to apply
                let w = (2.0 * r / v * 1.01).max(10.0);
                let cfg = cfg_with(|c| {
                    c.r_s = r;
                    c.v = v;
                    c.w = w;
                });
                let exact = contact_probability(&cfg, ContactMethod::Exact).unwrap();
                let approx = contact_probability(&cfg, ContactMethod::Approx).unwrap();
                assert!((approx / exact - 1.0).abs() < 0.02, "R={r} v={v}: {exact} vs {approx}");
            }
        }
    }

    #[test]
    fn velocity_has_little_effect_on_contact_probability() {
        for v in [5.0, 10.0, 20.0] {
            let cfg = cfg_with(|c| {
                c.v = v;
                c.w = 100.0;
            });
            if cfg.v * (cfg.w + cfg.p) < 50.0 * cfg.r_s {
                continue;
            }
            let fast = cfg.with_param("v", 2.0 * v).unwrap();
            let a = contact_probability(&cfg, ContactMethod::Exact).unwrap();
            let b = contact_probability(&fast, ContactMethod::Exact).unwrap();
            assert!((a - b).abs() <= 0.01, "v={v}: {a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn stats_invariants(r in 2.0f64..40.0, v in 0.5f64..30.0, extra in 0.1f64..50.0, p in 0.0f64..20.0, lm in 1e-5f64..5e-3) {
            let cfg = cfg_with(|c| {
                c.r_s = r;
                c.v = v;
                c.w = 2.0 * r / v + extra;
                c.p = p.max(1e-3);
                c.lambda_m = lm;
                c.arena_side = 1000.0;
            });
            let s = contact_stats_with_chord(&cfg, 32.0 * r / (9.0 * PI)).unwrap();
            prop_assert!(s.e_ct >= 0.0 && s.e_ict >= 0.0 && s.e_ict_s >= 0.0);
            prop_assert!((0.0..=1.0).contains(&s.p_pause));
            prop_assert!((0.0..=1.0).contains(&s.p_ct));
            let mix = (1.0 - s.p_pause) * s.e_tw + s.p_pause * s.e_tp;
            prop_assert!((s.e_ct / mix - 1.0).abs() < 1e-9);
            prop_assert!((s.p_ct - s.e_ct / (s.e_ct + s.e_ict)).abs() < 1e-15);
        }
    }
}
