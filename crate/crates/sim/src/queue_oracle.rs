//! Discrete-event references for the tagged sensor's queue.
//!
//! [`run_vacation_queue`] is the vacation model itself: exponential vacations,
//! geometric service in whole slots, at most Ξ packets per service period and
//! only those waiting when it starts. [`run_contact_queue`] drops the model and
//! drives sensors with real contact periods from the tracer, one attempt per
//! slot while in contact, previous-cycle packets only.

use std::collections::VecDeque;

use mdcnet_core::queue::SlotQueue;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};

use crate::seed::SeedSplitter;

#[derive(Clone, Debug, PartialEq)]
pub struct VacationReport {
    pub cycles: u64,
    /// Frequency of each queue length seen at the start of a service period.
    pub l_star_hist: Vec<f64>,
    pub e_l_star: f64,
    /// Time-average number in system, packets.
    pub e_l: f64,
    /// Mean wait from arrival to first service attempt, slots.
    pub wait_slots: f64,
    pub served: u64,
}

impl VacationReport {
    /// Total variation distance to `q`, the probabilities of lengths
    /// 0..q.len(); the rest of each law is lumped into one tail cell.
    pub fn total_variation(&self, q: &[f64]) -> f64 {
        let h = |k: usize| self.l_star_hist.get(k).copied().unwrap_or(0.0);
        let head: f64 = q.iter().enumerate().map(|(k, &v)| (v - h(k)).abs()).sum();
        let tail_q = 1.0 - q.iter().sum::<f64>();
        let tail_h = 1.0 - (0..q.len()).map(h).sum::<f64>();
        0.5 * (head + (tail_q - tail_h).abs())
    }
}

/// Runs `cycles` vacation/service cycles of the per-slot model (time unit: one slot).
pub fn run_vacation_queue(q: &SlotQueue, cycles: u64, seed: u64) -> VacationReport {
    let mut rng = SeedSplitter::new(seed).rng(&[0x51]);
    let gap = Exp::new(q.arrival).expect("positive arrival rate");
    let vacation = (q.e_v > 0.0).then(|| Exp::new(1.0 / q.e_v).expect("positive mean"));
    let service = Geometric::new(q.p).expect("probability in (0, 1]");
    let mut queue: VecDeque<f64> = VecDeque::new();
    let mut next = gap.sample(&mut rng);
    let mut t = 0.0;
    let mut hist: Vec<u64> = Vec::new();
    let (mut area, mut waits, mut served) = (0.0, 0.0, 0u64);
    let admit = |until: f64, queue: &mut VecDeque<f64>, next: &mut f64, rng: &mut ChaCha8Rng| {
        while *next <= until {
            queue.push_back(*next);
            *next += gap.sample(rng);
        }
    };
    for _ in 0..cycles {
        admit(t, &mut queue, &mut next, &mut rng);
        let len = queue.len();
        if hist.len() <= len {
            hist.resize(len + 1, 0);
        }
        hist[len] += 1;
        for _ in 0..len.min(q.xi_cap) {
            let a = queue.pop_front().expect("counted above");
            waits += t - a;
            // rand_distr counts failures before the first success
            t += (service.sample(&mut rng) + 1) as f64;
            area += t - a;
            served += 1;
            admit(t, &mut queue, &mut next, &mut rng);
        }
        match vacation {
            Some(v) => t += v.sample(&mut rng),
            // without vacations an idle server waits for the next arrival
            None if len == 0 => t = t.max(next),
            None => {}
        }
    }
    area += queue.iter().map(|&a| t - a).sum::<f64>();
    let total: u64 = hist.iter().sum();
    let l_star_hist: Vec<f64> = hist.iter().map(|&c| c as f64 / total as f64).collect();
    let e_l_star = l_star_hist.iter().enumerate().map(|(k, &f)| k as f64 * f).sum();
    VacationReport {
        cycles,
        l_star_hist,
        e_l_star,
        e_l: area / t,
        wait_slots: if served > 0 { waits / served as f64 } else { f64::NAN },
        served,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactQueueReport {
    /// Mean queue length over the sensors, sampled every `sample_every` s.
    pub trace: Vec<f64>,
    pub sample_every: f64,
    pub served: u64,
    pub arrived: u64,
}

/// Verdict on a queue-length trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drift {
    /// Relative change of the running time-average over the last quarter.
    pub last_quarter_change: f64,
    /// Least-squares slope over the second half, packets/s.
    pub slope: f64,
}

impl ContactQueueReport {
    /// Drift of the trace after dropping the first `skip` samples (the
    /// transient from an empty start).
    pub fn drift(&self, skip: usize) -> Drift {
        let kept = &self.trace[skip.min(self.trace.len())..];
        let n = kept.len();
        let running = |k: usize| kept[..k].iter().sum::<f64>() / k as f64;
        let (q3, end) = ((3 * n / 4).max(1), n.max(1));
        let last_quarter_change = (running(end) - running(q3)).abs() / running(end).max(f64::MIN_POSITIVE);
        let half = &kept[n / 2..];
        let m = half.len() as f64;
        let tx = (m - 1.0) / 2.0;
        let ty = half.iter().sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, &y) in half.iter().enumerate() {
            let dx = i as f64 - tx;
            sxy += dx * (y - ty);
            sxx += dx * dx;
        }
        Drift { last_quarter_change, slope: sxy / sxx / self.sample_every }
    }
}

/// Independent sensors, each driven by its own contact periods `busy`
/// (sorted, disjoint, seconds). A slot is in contact when its start is; each
/// such slot is one attempt that succeeds with probability `p`. Packets that
/// arrive during a contact wait for the next one.
pub fn run_contact_queue(busy: &[Vec<(f64, f64)>], xi: f64, p: f64, delta: f64, horizon: f64, sample_every: f64, seed: u64) -> ContactQueueReport {
    let samples = (horizon / sample_every).floor() as usize;
    let mut sum = vec![0.0; samples];
    let gap = Exp::new(xi).expect("positive arrival rate");
    let split = SeedSplitter::new(seed);
    let (mut served, mut arrived) = (0u64, 0u64);
    for (i, periods) in busy.iter().enumerate() {
        let mut rng = split.rng(&[0x52, i as u64]);
        let mut arrivals: Vec<f64> = Vec::new();
        let mut t = gap.sample(&mut rng);
        while t < horizon {
            arrivals.push(t);
            t += gap.sample(&mut rng);
        }
        // departure time of each served packet, in FCFS order
        let mut departures: Vec<f64> = Vec::with_capacity(arrivals.len());
        for &(a, b) in periods {
            let first = (a / delta).ceil() as u64;
            let last = ((b.min(horizon)) / delta).ceil() as u64;
            let start = first as f64 * delta;
            // packets that were waiting when the contact began
            let eligible = arrivals.partition_point(|&x| x < start);
            let mut slot = first;
            while slot < last && departures.len() < eligible {
                if rng.random::<f64>() < p {
                    departures.push((slot + 1) as f64 * delta);
                }
                slot += 1;
            }
        }
        served += departures.len() as u64;
        arrived += arrivals.len() as u64;
        let (mut ia, mut id) = (0, 0);
        for (k, s) in sum.iter_mut().enumerate() {
            let at = (k + 1) as f64 * sample_every;
            while ia < arrivals.len() && arrivals[ia] <= at {
                ia += 1;
            }
            while id < departures.len() && departures[id] <= at {
                id += 1;
            }
            *s += (ia - id) as f64;
        }
    }
    let n = busy.len().max(1) as f64;
    ContactQueueReport { trace: sum.into_iter().map(|s| s / n).collect(), sample_every, served, arrived }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_vacation_unlimited_is_mg1() {
        // Ξ far above any backlog and no vacations: plain M/G/1
        let q = SlotQueue { xi_cap: 10_000, arrival: 0.3, p: 0.6, e_v: 0.0 };
        let r = run_vacation_queue(&q, 300_000, 1);
        let l = q.mg1_length();
        assert!((r.e_l / l - 1.0).abs() < 0.03, "{} vs {l}", r.e_l);
    }

    #[test]
    fn matches_solved_queue() {
        let q = SlotQueue { xi_cap: 4, arrival: 0.05, p: 0.8, e_v: 40.0 };
        let sol = q.solve_q(&q.boundary_roots().unwrap()).unwrap();
        let lengths = q.mean_queue_lengths(&sol).unwrap();
        let r = run_vacation_queue(&q, 400_000, 2);
        assert!(r.total_variation(&sol) < 0.01, "{}", r.total_variation(&sol));
        assert!((r.e_l_star / lengths.e_l_star - 1.0).abs() < 0.05);
        assert!((r.e_l / lengths.e_l - 1.0).abs() < 0.05, "{} vs {}", r.e_l, lengths.e_l);
        assert!((r.wait_slots / q.waiting_slots(lengths.e_l_star) - 1.0).abs() < 0.05);
    }

    #[test]
    fn deterministic_per_seed() {
        let q = SlotQueue { xi_cap: 3, arrival: 0.1, p: 0.5, e_v: 10.0 };
        assert_eq!(run_vacation_queue(&q, 1000, 9), run_vacation_queue(&q, 1000, 9));
    }

    #[test]
    fn total_variation_bounds() {
        let r = VacationReport { cycles: 1, l_star_hist: vec![0.5, 0.5], e_l_star: 0.5, e_l: 0.0, wait_slots: 0.0, served: 0 };
        assert_eq!(r.total_variation(&[0.5, 0.5]), 0.0);
        assert_eq!(r.total_variation(&[0.0, 0.0]), 1.0);
        assert!((r.total_variation(&[0.5]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn contact_queue_dichotomy_on_periodic_contacts() {
        // contact 4 s out of every 16 s, P = 0.9, δ = 0.1: capacity 2.25 pkt/s
        let periods: Vec<(f64, f64)> = (0..1500).map(|k| (16.0 * k as f64 + 3.0, 16.0 * k as f64 + 7.0)).collect();
        let busy = vec![periods; 50];
        let cap = 0.9 / 0.1 * 4.0 / 16.0;
        let ok = run_contact_queue(&busy, 0.8 * cap, 0.9, 0.1, 24_000.0, 20.0, 3);
        let bad = run_contact_queue(&busy, 1.1 * cap, 0.9, 0.1, 24_000.0, 20.0, 3);
        assert!(ok.drift(0).last_quarter_change < 0.01, "{:?}", ok.drift(0));
        assert!(bad.drift(0).slope > 0.5 * 0.1 * cap, "{:?}", bad.drift(0));
    }
}
