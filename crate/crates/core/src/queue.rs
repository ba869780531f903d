//! The tagged sensor's queue: M/G/1 with exponential vacations and gated,
//! G-limited service.
//!
//! A sensor serves at most Ξ packets per contact, and only packets that were
//! already waiting when the contact began. Service takes a geometric number of
//! slots (one attempt per slot, success probability P = P_cov^M).
//!
//! All of the queue arithmetic runs per slot: the arrival rate is ξ' = ξδ
//! packets per slot, service times are in slots and the mean vacation E(V) is
//! in slots. Seconds appear only in [`QueueInputs`] and in the returned
//! [`GLimitedSolution`].

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Largest Ξ for which the root system is solved; beyond it the unlimited
/// (gated) approximation is used.
pub const XI_CAP_LIMIT: usize = 512;

const ROOT_ITERATIONS: usize = 200;
const ROOT_RESIDUAL: f64 = 1e-10;
const SOLVE_RESIDUAL: f64 = 1e-8;
const MASS_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QueueError {
    #[error("contact too short to serve a packet: floor(mu E(CT)) = 0")]
    XiZero,
    #[error("unstable queue: rho = {rho} is not below the contact probability {p_ct}")]
    Unstable { rho: f64, p_ct: f64 },
    #[error("boundary root {0} did not converge")]
    RootNotConverged(usize),
    #[error("boundary root {m} has modulus {modulus}, not inside the unit disk")]
    RootOnUnitCircle { m: usize, modulus: f64 },
    #[error("root system is singular")]
    SingularSystem,
    #[error("solved q_{k} = {value} is negative")]
    NegativeMass { k: usize, value: f64 },
    #[error("solved q has imaginary part {max_imag}")]
    ComplexSolution { max_imag: f64 },
    #[error("mean arrivals per cycle {e_psi} reach the per-contact service cap {xi_cap}")]
    CapacityExceeded { e_psi: f64, xi_cap: usize },
}

/// P e^{-z} / (1 − (1−P) e^{-z}): LST of a geometric(P) number of slots.
pub fn service_lst(z: C64, p_cov_m: f64) -> C64 {
    let e = (-z).exp();
    e * p_cov_m / (C64::new(1.0, 0.0) - e * (1.0 - p_cov_m))
}

/// 1 / (z E(V) + 1): LST of an exponential vacation.
pub fn vacation_lst(z: C64, e_v: f64) -> C64 {
    C64::new(1.0, 0.0) / (z * e_v + 1.0)
}

/// (2 − P)/P²: second moment of the geometric service time, slots².
pub fn service_second_moment(p_cov_m: f64) -> f64 {
    (2.0 - p_cov_m) / (p_cov_m * p_cov_m)
}

/// d/dz of [`service_lst`].
pub fn service_lst_derivative(z: C64, p: f64) -> C64 {
    let e = (-z).exp();
    let d = C64::new(1.0, 0.0) - e * (1.0 - p);
    -(e * p) / (d * d)
}

/// d/dz of [`vacation_lst`].
pub fn vacation_lst_derivative(z: C64, e_v: f64) -> C64 {
    let d = z * e_v + 1.0;
    C64::new(-e_v, 0.0) / (d * d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueueInputs {
    /// Arrival rate, packets/s.
    pub xi: f64,
    /// Slot length, s.
    pub delta: f64,
    /// Per-slot transmission success probability.
    pub p_cov_m: f64,
    /// Mean contact time, s.
    pub e_ct: f64,
    /// Mean inter-contact time, s.
    pub e_ict: f64,
}

impl QueueInputs {
    /// Service rate μ = P/δ, packets/s.
    pub fn mu(&self) -> f64 {
        self.p_cov_m / self.delta
    }

    pub fn rho(&self) -> f64 {
        self.xi / self.mu()
    }

    pub fn p_ct(&self) -> f64 {
        self.e_ct / (self.e_ct + self.e_ict)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleQuantities {
    /// Ξ = floor(μ E(CT)).
    pub xi_cap: usize,
    /// Mean arrivals per cycle, packets.
    pub e_psi: f64,
    /// Mean busy time per cycle, s.
    pub e_s: f64,
    /// Mean vacation, s.
    pub e_v: f64,
    pub rho: f64,
}

pub fn derive_cycle_quantities(inputs: &QueueInputs) -> Result<CycleQuantities, QueueError> {
    let mu = inputs.mu();
    let raw = mu * inputs.e_ct;
    // guard against μ·E(CT) landing a hair below an integer
    let xi_cap = (raw * (1.0 + 1e-12)).floor();
    if xi_cap < 1.0 {
        return Err(QueueError::XiZero);
    }
    let cycle = inputs.e_ct + inputs.e_ict;
    let rho = inputs.xi / mu;
    Ok(CycleQuantities {
        xi_cap: xi_cap as usize,
        e_psi: inputs.xi * cycle,
        e_s: rho * cycle,
        e_v: (1.0 - rho) * cycle,
        rho,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// P_ct − ρ.
    pub margin: f64,
}

/// The queue is stable iff ρ < P_ct.
pub fn check_stability(rho: f64, p_ct: f64) -> Stability {
    Stability { stable: rho < p_ct, margin: p_ct - rho }
}

/// Largest stable arrival rate μ E(CT) / (E(CT) + E(ICT)), packets/s.
pub fn arrival_rate_bound(p_cov_m: f64, delta: f64, e_ct: f64, e_ict: f64) -> f64 {
    p_cov_m / delta * e_ct / (e_ct + e_ict)
}

/// The per-slot queue model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotQueue {
    /// Ξ.
    pub xi_cap: usize,
    /// ξ' = ξδ, packets per slot.
    pub arrival: f64,
    /// Per-slot success probability.
    pub p: f64,
    /// Mean vacation, slots.
    pub e_v: f64,
}

impl SlotQueue {
    pub fn rho(&self) -> f64 {
        self.arrival / self.p
    }

    /// Mean arrivals per cycle in this model, ξ'E(V)/(1−ρ).
    pub fn e_psi(&self) -> f64 {
        self.arrival * self.e_v / (1.0 - self.rho())
    }

    pub fn b2(&self) -> f64 {
        service_second_moment(self.p)
    }

    /// V*(s)^{1/Ξ} B*(s) at s = ξ'(1 − z), and its z-derivative.
    fn kernel(&self, z: C64) -> (C64, C64) {
        let xi = self.xi_cap as f64;
        let s = (C64::new(1.0, 0.0) - z) * self.arrival;
        let v = vacation_lst(s, self.e_v);
        let b = service_lst(s, self.p);
        let v_root = v.powf(1.0 / xi);
        let dv_root = v_root / v * vacation_lst_derivative(s, self.e_v) / xi;
        let g = v_root * b;
        let dg_ds = dv_root * b + v_root * service_lst_derivative(s, self.p);
        (g, -dg_ds * self.arrival)
    }

    /// |z^Ξ − V*(s) B*(s)^Ξ|, the defining residual of a boundary root.
    pub fn root_residual(&self, z: C64) -> f64 {
        let s = (C64::new(1.0, 0.0) - z) * self.arrival;
        let rhs = vacation_lst(s, self.e_v) * service_lst(s, self.p).powu(self.xi_cap as u32);
        (z.powu(self.xi_cap as u32) - rhs).norm()
    }

    /// The Ξ−1 roots of z^Ξ = V*(ξ'−ξ'z) B*(ξ'−ξ'z)^Ξ inside the unit disk other
    /// than z = 1, ordered by m = 1..Ξ−1.
    pub fn boundary_roots(&self) -> Result<Vec<C64>, QueueError> {
        let n = self.xi_cap;
        let mut roots = Vec::with_capacity(n.saturating_sub(1));
        for m in 1..n {
            let w = C64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64);
            let mut z = C64::new(0.0, 0.0);
            for _ in 0..ROOT_ITERATIONS {
                let next = w * self.kernel(z).0;
                let done = (next - z).norm() < 1e-15;
                z = next;
                if done {
                    break;
                }
            }
            // Newton polish on z − w g(z)
            for _ in 0..8 {
                if self.root_residual(z) < 1e-14 {
                    break;
                }
                let (g, dg) = self.kernel(z);
                let step = (z - w * g) / (C64::new(1.0, 0.0) - w * dg);
                if !step.is_finite() {
                    break;
                }
                z -= step;
            }
            if !z.is_finite() || self.root_residual(z) >= ROOT_RESIDUAL {
                return Err(QueueError::RootNotConverged(m));
            }
            if z.norm() >= 1.0 - 1e-12 {
                return Err(QueueError::RootOnUnitCircle { m, modulus: z.norm() });
            }
            roots.push(z);
        }
        Ok(roots)
    }

    /// Solves for q_0..q_{Ξ−1}, the distribution of the queue length at the
    /// start of a service period restricted to values below Ξ.
    pub fn solve_q(&self, roots: &[C64]) -> Result<Vec<f64>, QueueError> {
        let n = self.xi_cap;
        assert_eq!(roots.len(), n - 1, "need Ξ−1 roots");
        for (i, a) in roots.iter().enumerate() {
            if roots[..i].iter().any(|b| (a - b).norm() < 1e-10) {
                return Err(QueueError::SingularSystem);
            }
        }
        let mut a = DMatrix::<C64>::zeros(n, n);
        let mut rhs = DVector::<C64>::zeros(n);
        for (row, &z) in roots.iter().enumerate() {
            let b = service_lst((C64::new(1.0, 0.0) - z) * self.arrival, self.p);
            let z_n = z.powu(n as u32);
            let b_n = b.powu(n as u32);
            let mut scale: f64 = 0.0;
            let (mut zk, mut bk) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
            for k in 0..n {
                let e = z_n * bk - b_n * zk;
                scale = scale.max(e.norm());
                a[(row, k)] = e;
                zk *= z;
                bk *= b;
            }
            if scale > 0.0 {
                for k in 0..n {
                    a[(row, k)] /= scale;
                }
            }
        }
        for k in 0..n {
            a[(n - 1, k)] = C64::new((n - k) as f64, 0.0);
        }
        rhs[n - 1] = C64::new(n as f64 - self.e_psi(), 0.0);

        let x = a.clone().lu().solve(&rhs).ok_or(QueueError::SingularSystem)?;
        let residual = (&a * &x - &rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !residual.is_finite() || residual > SOLVE_RESIDUAL * (n as f64).max(1.0) {
            return Err(QueueError::SingularSystem);
        }
        let max_imag = x.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if max_imag > SOLVE_RESIDUAL * (n as f64).max(1.0) {
            return Err(QueueError::ComplexSolution { max_imag });
        }
        let slack = MASS_SLACK * (n as f64).max(1.0);
        let q: Vec<f64> = x.iter().map(|c| c.re).collect();
        if let Some((k, &value)) = q.iter().enumerate().find(|(_, &v)| v < -slack) {
            return Err(QueueError::NegativeMass { k, value });
        }
        // rounding residue on masses that are truly ~0
        Ok(q.into_iter().map(|v| v.max(0.0)).collect())
    }

    /// Mean queue lengths from the solved q. See [`QueueLengths`].
    pub fn mean_queue_lengths(&self, q: &[f64]) -> Result<QueueLengths, QueueError> {
        let n = self.xi_cap as f64;
        let psi = self.e_psi();
        if psi >= n {
            return Err(QueueError::CapacityExceeded { e_psi: psi, xi_cap: self.xi_cap });
        }
        let rho = self.rho();
        let b2 = self.b2();
        let x = self.arrival;
        let q1: f64 = q.iter().sum();
        let q2: f64 = q.iter().enumerate().map(|(k, &v)| (k * k.saturating_sub(1)) as f64 * v).sum();
        let gap = n - psi;
        let tail = (1.0 + rho) * (q2 + n * (n - 1.0) * (1.0 - q1)) / (2.0 * gap);
        let residual_term = x * x * b2 * psi / (2.0 * (1.0 - rho) * gap);
        let e_l_star = psi * n / gap + residual_term - tail;
        let e_l_star_printed = psi * (n + 2.0 * (1.0 - rho) * psi) / gap + residual_term - tail;
        Ok(QueueLengths { e_l_star, e_l_star_printed, e_l: self.mg1_length() + e_l_star })
    }

    /// ρ + ξ'² b⁽²⁾ / (2(1−ρ)).
    pub fn mg1_length(&self) -> f64 {
        let rho = self.rho();
        rho + self.arrival * self.arrival * self.b2() / (2.0 * (1.0 - rho))
    }

    /// Mean wait before the first transmission attempt, slots.
    pub fn waiting_slots(&self, e_l_star: f64) -> f64 {
        let p = self.p;
        let x = self.arrival;
        x * (2.0 - p) / (2.0 * p * (p - x)) + e_l_star / x
    }
}

/// Mean queue lengths, packets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueueLengths {
    /// Queue length at the start of a service period, from the second
    /// derivative of the service-start PGF at 1.
    pub e_l_star: f64,
    /// The same quantity by the closed form as usually printed, which carries
    /// an extra 2(1−ρ)E(Ψ) term and overstates the queue; kept for comparison.
    pub e_l_star_printed: f64,
    /// Time-average queue length: M/G/1 part plus `e_l_star`.
    pub e_l: f64,
}

/// Sensor queueing delay in seconds: [ξ'(2−P)/(2P(P−ξ')) + E(L*)/ξ']·δ.
pub fn sensor_queueing_delay(xi: f64, delta: f64, p_cov_m: f64, e_l_star: f64) -> Result<f64, QueueError> {
    let x = xi * delta;
    if x >= p_cov_m {
        return Err(QueueError::Unstable { rho: x / p_cov_m, p_ct: 1.0 });
    }
    let q = SlotQueue { xi_cap: 1, arrival: x, p: p_cov_m, e_v: 0.0 };
    Ok(q.waiting_slots(e_l_star) * delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Approximation {
    /// Ξ above [`XI_CAP_LIMIT`]: the service cap is treated as never binding,
    /// so E(L*) = E(Ψ).
    UnlimitedService,
}

impl fmt::Display for Approximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Approximation::UnlimitedService => write!(f, "service cap above {XI_CAP_LIMIT}, unlimited-service approximation"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GLimitedSolution {
    pub xi_cap: usize,
    /// Mean arrivals per cycle, packets.
    pub e_psi: f64,
    /// Mean busy time per cycle, s.
    pub e_s: f64,
    /// Mean vacation, s.
    pub e_v: f64,
    pub rho: f64,
    /// Boundary roots, empty when the unlimited approximation is used.
    pub roots: Vec<C64>,
    pub q: Vec<f64>,
    pub e_l_star: f64,
    pub e_l_star_printed: f64,
    pub e_l: f64,
    /// Sensor queueing delay, s.
    pub d_q_s: f64,
    /// The delay the printed E(L*) would give, s.
    pub d_q_s_printed: f64,
    /// Second moment of service, slots².
    pub b2: f64,
    pub approximation: Option<Approximation>,
}

/// Solves the tagged-sensor queue end to end.
pub fn solve_g_limited(inputs: &QueueInputs) -> Result<GLimitedSolution, QueueError> {
    let cq = derive_cycle_quantities(inputs)?;
    let st = check_stability(cq.rho, inputs.p_ct());
    if !st.stable {
        return Err(QueueError::Unstable { rho: cq.rho, p_ct: inputs.p_ct() });
    }
    let sq = SlotQueue { xi_cap: cq.xi_cap, arrival: inputs.xi * inputs.delta, p: inputs.p_cov_m, e_v: cq.e_v / inputs.delta };
    let b2 = sq.b2();
    if cq.xi_cap > XI_CAP_LIMIT {
        let psi = sq.e_psi();
        let e_l_star = psi;
        let d = sq.waiting_slots(e_l_star) * inputs.delta;
        return Ok(GLimitedSolution {
            xi_cap: cq.xi_cap,
            e_psi: cq.e_psi,
            e_s: cq.e_s,
            e_v: cq.e_v,
            rho: cq.rho,
            roots: Vec::new(),
            q: Vec::new(),
            e_l_star,
            e_l_star_printed: e_l_star,
            e_l: sq.mg1_length() + e_l_star,
            d_q_s: d,
            d_q_s_printed: d,
            b2,
            approximation: Some(Approximation::UnlimitedService),
        });
    }
    if sq.e_psi() >= cq.xi_cap as f64 {
        return Err(QueueError::CapacityExceeded { e_psi: sq.e_psi(), xi_cap: cq.xi_cap });
    }
    let roots = sq.boundary_roots()?;
    let q = sq.solve_q(&roots)?;
    let lengths = sq.mean_queue_lengths(&q)?;
    Ok(GLimitedSolution {
        xi_cap: cq.xi_cap,
        e_psi: cq.e_psi,
        e_s: cq.e_s,
        e_v: cq.e_v,
        rho: cq.rho,
        roots,
        q,
        e_l_star: lengths.e_l_star,
        e_l_star_printed: lengths.e_l_star_printed,
        e_l: lengths.e_l,
        d_q_s: sq.waiting_slots(lengths.e_l_star) * inputs.delta,
        d_q_s_printed: sq.waiting_slots(lengths.e_l_star_printed) * inputs.delta,
        b2,
        approximation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn central_diff(f: impl Fn(f64) -> f64, h: f64) -> f64 {
        (f(h) - f(-h)) / (2.0 * h)
    }

    #[test]
    fn lst_normalization() {
        assert_eq!(service_lst(c(0.0), 0.37), c(1.0));
        assert_eq!(vacation_lst(c(0.0), 12.0), c(1.0));
        for z in [c(0.3), C64::new(0.2, 1.7)] {
            assert_relative_eq!((service_lst(z, 1.0) - (-z).exp()).norm(), 0.0, epsilon = 1e-15);
            assert_eq!(vacation_lst(z, 0.0), c(1.0));
        }
    }

    #[test]
    fn lst_derivatives_match_finite_differences() {
        for p in [0.2, 0.5, 0.8, 1.0] {
            let d = -central_diff(|h| service_lst(c(h), p).re, 1e-5);
            assert!((d * p - 1.0).abs() < 1e-6, "P={p}: {d}");
            let second = (service_lst(c(1e-4), p).re - 2.0 + service_lst(c(-1e-4), p).re) / 1e-8;
            assert!((second / service_second_moment(p) - 1.0).abs() < 1e-6 * 100.0);
            assert!((service_lst_derivative(c(0.0), p).re * p + 1.0).abs() < 1e-14);
        }
        for ev in [0.5, 10.0, 150.0] {
            let h = 1e-6 / ev;
            let d = -central_diff(|x| vacation_lst(c(x), ev).re, h);
            assert!((d / ev - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn second_moment_values() {
        assert_eq!(service_second_moment(1.0), 1.0);
        assert_relative_eq!(service_second_moment(0.5), 6.0, max_relative = 1e-15);
        assert_relative_eq!(service_second_moment(0.8), 1.875, max_relative = 1e-15);
        for p in [0.5, 0.8] {
            let truncated: f64 = (1..2000).map(|k| (k * k) as f64 * (1.0 - p as f64).powi(k - 1) * p).sum();
            assert_relative_eq!(service_second_moment(p), truncated, max_relative = 1e-12);
        }
    }

    fn baseline_inputs() -> QueueInputs {
        QueueInputs { xi: 0.6, delta: 0.1, p_cov_m: 0.8, e_ct: 4.205, e_ict: 12.0 }
    }

    #[test]
    fn baseline_cycle_quantities() {
        let cq = derive_cycle_quantities(&baseline_inputs()).unwrap();
        assert_eq!(cq.xi_cap, 33);
        assert_relative_eq!(cq.e_psi, 9.723, max_relative = 1e-12);
        assert_relative_eq!(cq.rho, 0.075, max_relative = 1e-12);
        assert_relative_eq!(cq.e_v, 0.925 * 16.205, max_relative = 1e-12);
        assert_relative_eq!(cq.e_s + cq.e_v, 16.205, max_relative = 1e-12);
        let short = QueueInputs { e_ct: 0.1, ..baseline_inputs() };
        assert_eq!(derive_cycle_quantities(&short), Err(QueueError::XiZero));
    }

    #[test]
    fn stability_boundary() {
        let s = check_stability(0.075, 0.2595);
        assert!(s.stable);
        assert_relative_eq!(s.margin, 0.1845, max_relative = 1e-12);
        assert!(!check_stability(0.2595, 0.2595).stable);
        assert_eq!(check_stability(0.0, 0.3), Stability { stable: true, margin: 0.3 });
        let bound = arrival_rate_bound(0.8, 0.1, 4.205, 12.0);
        assert_relative_eq!(bound / 8.0, 0.2595, max_relative = 1e-3);
    }

    #[test]
    fn single_slot_cap() {
        let q = SlotQueue { xi_cap: 1, arrival: 0.05, p: 0.8, e_v: 10.0 };
        let roots = q.boundary_roots().unwrap();
        assert!(roots.is_empty());
        let sol = q.solve_q(&roots).unwrap();
        assert_relative_eq!(sol[0], 1.0 - q.e_psi(), max_relative = 1e-12);
    }

    #[test]
    fn four_slot_roots() {
        let q = SlotQueue { xi_cap: 4, arrival: 0.05, p: 0.8, e_v: 40.0 };
        let roots = q.boundary_roots().unwrap();
        assert_eq!(roots.len(), 3);
        for z in &roots {
            assert!(z.norm() < 1.0);
            assert!(q.root_residual(*z) < 1e-10);
        }
        // conjugate pairing: root m and root Ξ−m
        assert!((roots[0] - roots[2].conj()).norm() < 1e-12);
        assert!(roots[1].im.abs() < 1e-12);
        let sol = q.solve_q(&roots).unwrap();
        let norm: f64 = sol.iter().enumerate().map(|(k, &v)| (4 - k) as f64 * v).sum();
        assert_relative_eq!(norm, 4.0 - q.e_psi(), max_relative = 1e-10);
        assert!(sol.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn overloaded_example_is_rejected() {
        // ξ'E(V)/(1−ρ) = 5.33 packets per cycle against a cap of 4
        let q = SlotQueue { xi_cap: 4, arrival: 0.05, p: 0.8, e_v: 100.0 };
        let roots = q.boundary_roots().unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots.iter().all(|z| q.root_residual(*z) < 1e-10));
        assert!(matches!(q.solve_q(&roots), Err(QueueError::NegativeMass { .. })));
        assert!(matches!(q.mean_queue_lengths(&[0.0; 4]), Err(QueueError::CapacityExceeded { .. })));
    }

    #[test]
    fn light_traffic_limits() {
        let q = SlotQueue { xi_cap: 6, arrival: 1e-6, p: 0.8, e_v: 30.0 };
        let roots = q.boundary_roots().unwrap();
        let lens = q.mean_queue_lengths(&q.solve_q(&roots).unwrap()).unwrap();
        assert!(lens.e_l_star.abs() < 1e-4, "{lens:?}");
        assert!(sensor_queueing_delay(5e-4, 0.1, 0.8, 0.0).unwrap() < 0.1);
    }

    #[test]
    fn delay_blows_up_at_saturation() {
        let mut prev = 0.0;
        for p in [0.9, 0.5, 0.3, 0.2, 0.15, 0.11, 0.101, 0.1001] {
            let d = sensor_queueing_delay(1.0, 0.1, p, 0.0).unwrap();
            assert!(d > prev);
            prev = d;
        }
        assert!(prev > 100.0);
        assert!(matches!(sensor_queueing_delay(1.0, 0.1, 0.1, 0.0), Err(QueueError::Unstable { .. })));
    }

    #[test]
    fn pollaczek_khinchine_limit() {
        // Vanishing vacations make the server work-conserving.
        let q = SlotQueue { xi_cap: 4, arrival: 0.3, p: 0.8, e_v: 1e-3 };
        let lens = q.mean_queue_lengths(&q.solve_q(&q.boundary_roots().unwrap()).unwrap()).unwrap();
        let pk = q.mg1_length();
        assert!((lens.e_l / pk - 1.0).abs() < 0.05, "{} vs {pk}", lens.e_l);
    }

    #[test]
    fn baseline_solution() {
        let sol = solve_g_limited(&baseline_inputs()).unwrap();
        assert_eq!(sol.roots.len(), 32);
        assert_eq!(sol.q.len(), 33);
        assert!(sol.e_l >= sol.e_l_star && sol.e_l_star >= 0.0);
        assert!(sol.e_l_star_printed > sol.e_l_star);
        assert!(sol.approximation.is_none());
        assert!(sol.d_q_s > 0.0 && sol.d_q_s_printed > sol.d_q_s);
    }

    #[test]
    fn huge_cap_falls_back() {
        let inputs = QueueInputs { xi: 0.6, delta: 0.001, p_cov_m: 0.8, e_ct: 4.205, e_ict: 12.0 };
        let sol = solve_g_limited(&inputs).unwrap();
        assert_eq!(sol.approximation, Some(Approximation::UnlimitedService));
        assert!(sol.xi_cap > XI_CAP_LIMIT);
        assert_relative_eq!(sol.e_l_star, 0.6 * 0.001 * sol.e_v / 0.001 / (1.0 - sol.rho), max_relative = 1e-12);
    }

    #[test]
    fn unstable_inputs_are_reported() {
        let inputs = QueueInputs { xi: 3.0, ..baseline_inputs() };
        assert!(matches!(solve_g_limited(&inputs), Err(QueueError::Unstable { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn solved_queues_are_consistent(xi_cap in 2usize..40, load in 0.05f64..0.9, p in 0.3f64..1.0, per_slot in 0.002f64..0.2) {
            // choose E(V) so that the per-cycle load is a fraction of the cap
            let arrival = per_slot.min(0.5 * p);
            let rho = arrival / p;
            let e_v = load * xi_cap as f64 * (1.0 - rho) / arrival;
            let q = SlotQueue { xi_cap, arrival, p, e_v };
            let roots = q.boundary_roots().unwrap();
            prop_assert_eq!(roots.len(), xi_cap - 1);
            for z in &roots {
                prop_assert!(z.norm() < 1.0);
                prop_assert!(roots.iter().any(|w| (w - z.conj()).norm() < 1e-8));
            }
            let sol = q.solve_q(&roots).unwrap();
            prop_assert!(sol.iter().all(|&v| v >= -1e-8));
            let lens = q.mean_queue_lengths(&sol).unwrap();
            prop_assert!(lens.e_l >= lens.e_l_star);
            prop_assert!(lens.e_l_star >= -1e-8);
        }
    }
}
