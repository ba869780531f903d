//! Continuous-time contact tracer.
//!
//! MDCs follow the pause/walk mobility exactly (no slots). Every leg of every
//! MDC is intersected with the contact disks of the sensors near it by solving
//! the segment/circle quadratic, so contact boundaries are exact.
//!
//! Two views come out of one trace:
//! - pair contacts: one sensor and one MDC, from entry to exit;
//! - the sensor's union process: busy while any MDC is in range, idle
//!   otherwise.

use mdcnet_core::geometry::{sample_ppp_with, Arena, Grid, Point};
use mdcnet_core::params::{BoundaryMode, NetworkConfig};
use rand::Rng;
use std::f64::consts::PI;

use crate::seed::{stream, SeedSplitter};
use crate::stats::Running;

/// Intervals closer than this are one contact.
const JOIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSpec {
    pub arena_side: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub r_s: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
    /// Seconds traced.
    pub horizon: f64,
    /// Periods starting before this are not counted, s.
    pub warmup: f64,
    /// Start each MDC at a uniform point of its pause/walk epoch.
    pub stationary_start: bool,
    /// Place exactly round(λ·area) nodes of each kind instead of a Poisson
    /// number, so the realized density is the nominal one.
    pub exact_count: bool,
}

impl TraceSpec {
    pub fn from_config(cfg: &NetworkConfig, horizon: f64, warmup: f64) -> TraceSpec {
        TraceSpec {
            arena_side: cfg.arena_side,
            lambda_s: cfg.lambda_s,
            lambda_m: cfg.lambda_m,
            r_s: cfg.r_s,
            v: cfg.v,
            w: cfg.w,
            p: cfg.p,
            horizon,
            warmup,
            stationary_start: true,
            exact_count: false,
        }
    }
}

/// Contact intervals of one sensor, sorted by start.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensorTrace {
    /// (mdc, start, end) per pair contact.
    pub pairs: Vec<(u32, f64, f64)>,
    /// Union of the pair contacts.
    pub busy: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactTrace {
    pub spec: TraceSpec,
    pub sensors: Vec<SensorTrace>,
    pub mdc_count: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ContactSummary {
    /// Pair contact durations.
    pub pair_ct: Running,
    /// Union busy periods.
    pub busy: Running,
    /// Union idle periods.
    pub idle: Running,
}

impl ContactTrace {
    /// Periods that start after warm-up and end before the horizon.
    pub fn summary(&self) -> ContactSummary {
        let (warm, end) = (self.spec.warmup, self.spec.horizon);
        let mut s = ContactSummary::default();
        for t in &self.sensors {
            for &(_, a, b) in &t.pairs {
                if a > warm && b < end {
                    s.pair_ct.push(b - a);
                }
            }
            for &(a, b) in &t.busy {
                if a > warm && b < end {
                    s.busy.push(b - a);
                }
            }
            for w in t.busy.windows(2) {
                if w[0].1 > warm {
                    s.idle.push(w[1].0 - w[0].1);
                }
            }
        }
        s
    }

    /// Fraction of sensor-time spent in contact over [warm-up, horizon].
    pub fn busy_fraction(&self) -> f64 {
        let (warm, end) = (self.spec.warmup, self.spec.horizon);
        let covered: f64 = self
            .sensors
            .iter()
            .flat_map(|t| t.busy.iter())
            .map(|&(a, b)| (b.min(end) - a.max(warm)).max(0.0))
            .sum();
        covered / ((end - warm) * self.sensors.len().max(1) as f64)
    }
}

/// Traces every sensor of a fresh deployment on a torus.
pub fn trace(spec: &TraceSpec, seed: u64) -> ContactTrace {
    let arena = Arena::new(spec.arena_side, BoundaryMode::Torus);
    let split = SeedSplitter::new(seed);
    let place = |density: f64, s: u64| {
        let mut rng = split.rng(&[s]);
        if spec.exact_count {
            let n = (density * arena.area()).round() as usize;
            (0..n).map(|_| arena.uniform_point(&mut rng)).collect()
        } else {
            sample_ppp_with(density, arena, &mut rng).points
        }
    };
    let sensors: Vec<Point> = place(spec.lambda_s, stream::SENSORS);
    let mdcs: Vec<Point> = place(spec.lambda_m, stream::MDCS);
    trace_positions(spec, &sensors, &mdcs, seed)
}

pub fn trace_positions(spec: &TraceSpec, sensors: &[Point], mdcs: &[Point], seed: u64) -> ContactTrace {
    let arena = Arena::new(spec.arena_side, BoundaryMode::Torus);
    // walks are cut into pieces short enough for the minimum image to be exact
    let chunk = 0.25 * spec.arena_side / spec.v.max(f64::MIN_POSITIVE);
    assert!(spec.r_s < 0.2 * spec.arena_side, "contact radius too large for the arena");
    let grid = Grid::new(sensors, arena, spec.r_s.max(1.0));
    let mut raw: Vec<Vec<(u32, f64, f64)>> = vec![Vec::new(); sensors.len()];
    let split = SeedSplitter::new(seed);
    for (m, &start) in mdcs.iter().enumerate() {
        let mut rng = split.rng(&[stream::DYNAMICS, m as u64]);
        let mut leg = |from: Point, to_vel: (f64, f64), t0: f64, t1: f64| {
            let dt = t1 - t0;
            let mid = arena.wrap(Point::new(from.x + 0.5 * dt * to_vel.0, from.y + 0.5 * dt * to_vel.1));
            let tm = 0.5 * (t0 + t1);
            let reach = 0.5 * dt * to_vel.0.hypot(to_vel.1) + spec.r_s;
            grid.for_each_within(mid, reach, |i, _| {
                let (dx, dy) = arena.displacement(mid, sensors[i]);
                if let Some((a, b)) = disk_window(dx, dy, to_vel, spec.r_s, t0 - tm, t1 - tm) {
                    raw[i].push((m as u32, tm + a, tm + b));
                }
            });
        };
        let mut pos = start;
        let epoch = spec.w + spec.p;
        // time into the current epoch at t = 0
        let mut phase = if spec.stationary_start { rng.random::<f64>() * epoch } else { 0.0 };
        let mut t = 0.0;
        while t < spec.horizon {
            if phase < spec.p {
                let t1 = (t + spec.p - phase).min(spec.horizon);
                leg(pos, (0.0, 0.0), t, t1);
                t = t1;
                phase = spec.p;
            } else {
                let th = 2.0 * PI * rng.random::<f64>();
                let vel = (spec.v * th.cos(), spec.v * th.sin());
                let end = (t + epoch - phase).min(spec.horizon);
                while t < end {
                    let t1 = (t + chunk).min(end);
                    leg(pos, vel, t, t1);
                    pos = arena.wrap(Point::new(pos.x + (t1 - t) * vel.0, pos.y + (t1 - t) * vel.1));
                    t = t1;
                }
                phase = 0.0;
            }
        }
    }
    let sensors = raw.into_iter().map(merge).collect();
    ContactTrace { spec: *spec, sensors, mdc_count: mdcs.len() }
}

/// Times in [lo, hi] at which a point moving with velocity `vel` from the
/// origin at time 0 is within `r` of (dx, dy).
fn disk_window(dx: f64, dy: f64, vel: (f64, f64), r: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let a = vel.0 * vel.0 + vel.1 * vel.1;
    let c = dx * dx + dy * dy - r * r;
    if a == 0.0 {
        return (c <= 0.0).then_some((lo, hi));
    }
    let b = -2.0 * (vel.0 * dx + vel.1 * dy);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let (t_in, t_out) = ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a));
    let (s, e) = (t_in.max(lo), t_out.min(hi));
    (s < e).then_some((s, e))
}

fn merge(mut raw: Vec<(u32, f64, f64)>) -> SensorTrace {
    raw.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut pairs: Vec<(u32, f64, f64)> = Vec::with_capacity(raw.len());
    for (m, a, b) in raw {
        match pairs.last_mut() {
            Some(last) if last.0 == m && a <= last.2 + JOIN => last.2 = last.2.max(b),
            _ => pairs.push((m, a, b)),
        }
    }
    pairs.sort_by(|x, y| x.1.total_cmp(&y.1));
    let mut busy: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for &(_, a, b) in &pairs {
        match busy.last_mut() {
            Some(last) if a <= last.1 + JOIN => last.1 = last.1.max(b),
            _ => busy.push((a, b)),
        }
    }
    SensorTrace { pairs, busy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use mdcnet_core::contact::contact_stats;
    use proptest::prelude::*;

    fn spec(lambda_m: f64, horizon: f64) -> TraceSpec {
        let cfg = NetworkConfig::baseline().with_param("lambda_m", lambda_m).unwrap();
        TraceSpec::from_config(&cfg, horizon, 0.1 * horizon)
    }

    #[test]
    fn straight_pass_through_centre() {
        let s = TraceSpec { arena_side: 1000.0, lambda_s: 0.0, lambda_m: 0.0, r_s: 10.0, v: 5.0, w: 1e9, p: 0.0, horizon: 50.0, warmup: 0.0, stationary_start: false, exact_count: false };
        // heading is random, so put the sensor on the MDC's start point: the
        // contact is the first R/v seconds whatever the direction
        let t = trace_positions(&s, &[Point::new(500.0, 500.0)], &[Point::new(500.0, 500.0)], 3);
        assert_eq!(t.sensors[0].pairs.len(), 1);
        let (_, a, b) = t.sensors[0].pairs[0];
        assert_eq!(a, 0.0);
        assert_relative_eq!(b, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn pause_inside_then_leave() {
        let s = TraceSpec { arena_side: 1000.0, lambda_s: 0.0, lambda_m: 0.0, r_s: 10.0, v: 5.0, w: 100.0, p: 7.0, horizon: 20.0, warmup: 0.0, stationary_start: false, exact_count: false };
        let t = trace_positions(&s, &[Point::new(500.0, 500.0)], &[Point::new(500.0, 500.0)], 3);
        // one contact: the whole pause plus R/v of walking
        assert_eq!(t.sensors[0].pairs.len(), 1);
        assert_relative_eq!(t.sensors[0].pairs[0].2, 9.0, max_relative = 1e-12);
    }

    #[test]
    fn window_wraps_across_the_torus_seam() {
        let s = TraceSpec { arena_side: 200.0, lambda_s: 0.0, lambda_m: 0.0, r_s: 5.0, v: 1.0, w: 1e9, p: 1e9, horizon: 10.0, warmup: 0.0, stationary_start: false, exact_count: false };
        let t = trace_positions(&s, &[Point::new(198.0, 100.0)], &[Point::new(1.0, 100.0)], 1);
        assert_eq!(t.sensors[0].busy, vec![(0.0, 10.0)]);
    }

    #[test]
    fn union_and_pairs_agree_when_sparse() {
        let sp = spec(1e-4, 4000.0);
        let t = trace(&sp, 5);
        let s = t.summary();
        assert!(s.pair_ct.count() > 1000);
        // overlapping contacts are rare at this density
        assert!(s.busy.count() as f64 > 0.95 * s.pair_ct.count() as f64);
        let frac = t.busy_fraction();
        let density = t.mdc_count as f64 / (sp.arena_side * sp.arena_side);
        let cover = 1.0 - (-density * PI * sp.r_s * sp.r_s).exp();
        assert!((frac / cover - 1.0).abs() < 0.05, "{frac} {cover}");
    }

    #[test]
    fn contact_rate_matches_flux() {
        // contacts start at rate 2R v λ_m w/(w+p): a kinematic count, not the
        // duration law under test elsewhere
        let sp = spec(5e-4, 3000.0);
        let t = trace(&sp, 8);
        let starts: usize = t.sensors.iter().flat_map(|s| &s.pairs).filter(|p| p.1 > sp.warmup && p.1 < sp.horizon).count();
        let rate = starts as f64 / (t.sensors.len() as f64 * (sp.horizon - sp.warmup));
        let density = t.mdc_count as f64 / (sp.arena_side * sp.arena_side);
        let expect = 2.0 * sp.r_s * sp.v * density * sp.w / (sp.w + sp.p);
        assert!((rate / expect - 1.0).abs() < 0.05, "{rate} {expect}");
    }

    #[test]
    fn union_busy_is_coverage_fraction() {
        // stationary SRWP keeps the MDCs a PPP, so a sensor is covered with
        // probability 1 − exp(−λ_m π R²)
        let sp = spec(1e-3, 1500.0);
        let t = trace(&sp, 2);
        let density = t.mdc_count as f64 / (sp.arena_side * sp.arena_side);
        let expect = 1.0 - (-density * PI * sp.r_s * sp.r_s).exp();
        assert!((t.busy_fraction() / expect - 1.0).abs() < 0.02, "{} {expect}", t.busy_fraction());
        let cfg = NetworkConfig::baseline().with_param("lambda_m", density).unwrap();
        let c = contact_stats(&cfg).unwrap();
        let idle = t.summary().idle.mean().unwrap();
        assert!((idle / c.e_ict - 1.0).abs() < 0.03, "{idle} {}", c.e_ict);
    }

    #[test]
    fn mean_pair_contact_is_occupancy_over_rate() {
        // time-in-disk fraction πR²/A divided by the crossing rate per pair
        // 2Rv·w/(w+p)/A gives E(CT) = πR(w+p)/(2vw) exactly
        for (r, v) in [(10.0, 5.0), (20.0, 10.0), (5.0, 20.0)] {
            let cfg = NetworkConfig::baseline().with_param("lambda_m", 1e-4).unwrap().with_param("r_s", r).unwrap().with_param("v", v).unwrap();
            let mut sp = TraceSpec::from_config(&cfg, 6000.0, 600.0);
            sp.exact_count = true;
            let t = trace(&sp, 4);
            assert_eq!(t.mdc_count, 100);
            let ct = t.summary().pair_ct.mean().unwrap();
            let exact = PI * r * (sp.w + sp.p) / (2.0 * v * sp.w);
            assert!((ct / exact - 1.0).abs() < 0.02, "R={r} v={v}: {ct} vs {exact}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn window_is_where_distance_is_within_r(dx in -30.0f64..30.0, dy in -30.0f64..30.0, th in 0.0f64..6.283, v in 0.1f64..20.0) {
            let vel = (v * th.cos(), v * th.sin());
            let win = disk_window(dx, dy, vel, 10.0, -5.0, 5.0);
            for k in 0..=200 {
                let t = -5.0 + 0.05 * k as f64;
                let d = (vel.0 * t - dx).hypot(vel.1 * t - dy);
                let within = win.is_some_and(|(a, b)| t >= a && t <= b);
                if d < 10.0 - 1e-6 {
                    prop_assert!(within);
                } else if d > 10.0 + 1e-6 {
                    prop_assert!(!within);
                }
            }
        }
    }
}
