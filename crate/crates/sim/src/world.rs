//! The slotted network: deployment, per-slot dynamics and measurement.
//!
//! Slot n covers [nδ, (n+1)δ). Within a slot:
//!
//! 1. contact detection at the MDC positions of time nδ (collecting MDCs only);
//! 2. Poisson arrivals over the slot, tagged with the sensor's current cycle;
//! 3. sensor uplinks, decoded against every other transmitting sensor;
//! 4. MDC-to-AP transmissions by MDCs already at their stop point;
//! 5. kinematics from nδ to (n+1)δ;
//! 6. end-of-slot transitions: full buffers leave for the nearest AP, empty
//!    unloading MDCs resume their walk with a fresh pause.
//!
//! An AP serves one MDC at a time; MDCs reaching a busy AP wait at their stop
//! point in arrival order. A successful packet leaves at the end of its slot.

use std::collections::VecDeque;
use std::f64::consts::PI;

use mdcnet_core::geometry::{sample_ppp_with, Arena, Grid, Point};
use mdcnet_core::params::NetworkConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1};

use crate::seed::{stream, SeedSplitter};
use crate::stats::Running;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SimOptions {
    /// Start every MDC at a uniformly random point of its pause/walk epoch
    /// instead of at the beginning of a pause.
    pub stationary_start: bool,
    /// Record the mean per-sensor queue length every this many slots (0 = off).
    pub trace_every: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Pausing,
    Walking,
    MovingToAp,
    /// At the stop point, queued behind another MDC at the same AP.
    WaitingAtAp,
    Transmitting,
}

impl Phase {
    pub fn is_collecting(self) -> bool {
        matches!(self, Phase::Pausing | Phase::Walking)
    }
}

#[derive(Clone, Copy, Debug)]
struct Packet {
    arrival: f64,
    cycle: u64,
    first_attempt: f64,
}

#[derive(Clone, Copy, Debug)]
struct Carried {
    arrival: f64,
    first_attempt: f64,
    receipt: f64,
    ap_first: f64,
}

#[derive(Clone, Debug)]
struct Sensor {
    pos: Point,
    queue: VecDeque<Packet>,
    cycle: u64,
    next_arrival: f64,
    covered: bool,
    /// Start of the current contact or gap; NaN when it began before we
    /// could observe it.
    since: f64,
}

#[derive(Clone, Debug)]
struct Mdc {
    pos: Point,
    phase: Phase,
    timer: u64,
    heading: (f64, f64),
    buffer: VecDeque<Carried>,
    target_ap: usize,
    stop: Point,
    collect_since: f64,
    trigger_time: f64,
    arrive_time: f64,
    /// Sensors in range with the start of each contact, by sensor index.
    in_range: Vec<(u32, f64)>,
    gap_since: f64,
}

/// Post-warm-up tallies.
#[derive(Clone, Debug, Default)]
pub struct Counters {
    /// One sensor and one MDC, entry to exit.
    pub pair_contact: Running,
    /// Any MDC in range.
    pub contact_busy: Running,
    pub contact_idle: Running,
    pub mdc_idle: Running,
    pub attempts_s: u64,
    pub successes_s: u64,
    pub attempts_a: u64,
    pub successes_a: u64,
    pub d_q_s: Running,
    pub d_t_s: Running,
    pub d_q_m: Running,
    /// Receipt at the MDC to arrival at the stop point.
    pub d_q_m_travel: Running,
    pub d_t_m: Running,
    pub total: Running,
    pub t_collect: Running,
    pub t_smov: Running,
    pub t_trans: Running,
    pub sensor_tx_slots: u64,
    pub sensor_sleep_slots: u64,
    pub mdc_tx_slots: u64,
    /// Packets handed from sensors to MDCs.
    pub uplink_packets: u64,
    /// Packets delivered to APs.
    pub delivered: u64,
    pub active_sensor_sum: u64,
    pub tx_mdc_sum: u64,
    pub measured_slots: u64,
    pub queue_area: f64,
}

pub struct World {
    cfg: NetworkConfig,
    arena: Arena,
    opts: SimOptions,
    slot: u64,
    warmup_slot: u64,
    rng: ChaCha8Rng,
    sensors: Vec<Sensor>,
    sensor_grid: Grid,
    mdcs: Vec<Mdc>,
    aps: Vec<Point>,
    ap_grid: Option<Grid>,
    /// MDCs at each AP's aggregation disk; the front one transmits.
    ap_queue: Vec<VecDeque<u32>>,
    walk_slots: u64,
    pause_slots: u64,
    arrival_gap: Option<Exp<f64>>,
    noise: f64,
    serving: Vec<u32>,
    serving_d2: Vec<f64>,
    touched: Vec<u32>,
    scratch: Vec<u32>,
    counters: Counters,
    queued: u64,
    enqueued: u64,
    delivered_all: u64,
    trace: Vec<f64>,
}

fn slots(seconds: f64, delta: f64) -> u64 {
    ((seconds / delta).round() as u64).max(1)
}

impl World {
    /// Samples the three point processes from sub-streams of `seed`.
    pub fn deploy(cfg: &NetworkConfig, seed: u64, opts: SimOptions) -> World {
        let arena = Arena::new(cfg.arena_side, cfg.boundary_mode);
        let split = SeedSplitter::new(seed);
        let sensors = sample_ppp_with(cfg.lambda_s, arena, &mut split.rng(&[stream::SENSORS])).points;
        let mdcs = sample_ppp_with(cfg.lambda_m, arena, &mut split.rng(&[stream::MDCS])).points;
        let aps = sample_ppp_with(cfg.lambda_b, arena, &mut split.rng(&[stream::APS])).points;
        World::from_positions(cfg, sensors, mdcs, aps, seed, opts)
    }

    pub fn from_positions(cfg: &NetworkConfig, sensors: Vec<Point>, mdcs: Vec<Point>, aps: Vec<Point>, seed: u64, opts: SimOptions) -> World {
        let arena = Arena::new(cfg.arena_side, cfg.boundary_mode);
        let mut rng = SeedSplitter::new(seed).rng(&[stream::DYNAMICS]);
        let arrival_gap = (cfg.xi > 0.0).then(|| Exp::new(cfg.xi).expect("positive rate"));
        let walk_slots = slots(cfg.w, cfg.delta);
        let pause_slots = slots(cfg.p, cfg.delta);
        let sensor_grid = Grid::new(&sensors, arena, cfg.r_s.max(1.0));
        let ap_grid = (!aps.is_empty()).then(|| Grid::new(&aps, arena, 1.0 / cfg.lambda_b.sqrt()));
        let sensors: Vec<Sensor> = sensors
            .into_iter()
            .map(|pos| Sensor {
                pos,
                queue: VecDeque::new(),
                cycle: 0,
                next_arrival: arrival_gap.map_or(f64::INFINITY, |e| e.sample(&mut rng)),
                covered: false,
                since: f64::NAN,
            })
            .collect();
        let mdcs: Vec<Mdc> = mdcs
            .into_iter()
            .map(|pos| {
                let mut m = Mdc {
                    pos,
                    phase: Phase::Pausing,
                    timer: pause_slots,
                    heading: (1.0, 0.0),
                    buffer: VecDeque::new(),
                    target_ap: 0,
                    stop: pos,
                    collect_since: 0.0,
                    trigger_time: f64::NAN,
                    arrive_time: f64::NAN,
                    in_range: Vec::new(),
                    gap_since: f64::NAN,
                };
                if opts.stationary_start {
                    let epoch = walk_slots + pause_slots;
                    let at = rng.random_range(0..epoch);
                    if at < pause_slots {
                        m.timer = pause_slots - at;
                    } else {
                        m.phase = Phase::Walking;
                        m.timer = epoch - at;
                        m.heading = random_heading(&mut rng);
                    }
                }
                m
            })
            .collect();
        let n = sensors.len();
        let ap_queue = vec![VecDeque::new(); aps.len()];
        World {
            noise: cfg.noise_mw(),
            cfg: cfg.clone(),
            arena,
            opts,
            slot: 0,
            warmup_slot: 0,
            rng,
            sensors,
            sensor_grid,
            mdcs,
            aps,
            ap_grid,
            ap_queue,
            walk_slots,
            pause_slots,
            arrival_gap,
            serving: vec![NONE; n],
            serving_d2: vec![f64::INFINITY; n],
            touched: Vec::new(),
            scratch: Vec::new(),
            counters: Counters::default(),
            queued: 0,
            enqueued: 0,
            delivered_all: 0,
            trace: Vec::new(),
        }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    /// Measurements start at this slot.
    pub fn set_warmup(&mut self, slot: u64) {
        self.warmup_slot = slot;
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn time(&self) -> f64 {
        self.slot as f64 * self.cfg.delta
    }

    fn warmup_time(&self) -> f64 {
        self.warmup_slot as f64 * self.cfg.delta
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn queue_trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn sensor_count(&self) -> usize {
        self.sensors.len()
    }

    pub fn mdc_count(&self) -> usize {
        self.mdcs.len()
    }

    pub fn ap_count(&self) -> usize {
        self.aps.len()
    }

    pub fn sensor_position(&self, i: usize) -> Point {
        self.sensors[i].pos
    }

    pub fn sensor_queue_len(&self, i: usize) -> usize {
        self.sensors[i].queue.len()
    }

    pub fn mdc_position(&self, i: usize) -> Point {
        self.mdcs[i].pos
    }

    pub fn mdc_phase(&self, i: usize) -> Phase {
        self.mdcs[i].phase
    }

    pub fn mdc_buffer_len(&self, i: usize) -> usize {
        self.mdcs[i].buffer.len()
    }

    pub fn mdc_target_ap(&self, i: usize) -> Option<usize> {
        matches!(self.mdcs[i].phase, Phase::MovingToAp | Phase::WaitingAtAp | Phase::Transmitting).then_some(self.mdcs[i].target_ap)
    }

    pub fn ap_position(&self, i: usize) -> Point {
        self.aps[i]
    }

    /// Packets ever generated, sitting in sensor queues, in MDC buffers, and
    /// delivered, all over the whole run.
    pub fn packet_census(&self) -> (u64, u64, u64, u64) {
        let in_mdcs = self.mdcs.iter().map(|m| m.buffer.len() as u64).sum();
        (self.enqueued, self.queued, in_mdcs, self.delivered_all)
    }

    /// Gives a sensor `n` packets from before its current contact cycle.
    pub fn preload(&mut self, sensor: usize, n: usize) {
        let t = self.time();
        let s = &mut self.sensors[sensor];
        s.cycle = s.cycle.max(1);
        for _ in 0..n {
            s.queue.push_back(Packet { arrival: t, cycle: 0, first_attempt: f64::NAN });
        }
        self.queued += n as u64;
        self.enqueued += n as u64;
    }

    pub fn run_slots(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn step(&mut self) {
        let measuring = self.slot >= self.warmup_slot;
        let t0 = self.time();
        let t1 = t0 + self.cfg.delta;
        self.detect_contacts(t0, measuring);
        self.arrivals(t1);
        self.uplink(t0, t1, measuring);
        self.downlink(t0, t1, measuring);
        self.kinematics(t0);
        self.transitions(t1, measuring);
        if measuring {
            self.counters.measured_slots += 1;
            self.counters.queue_area += self.queued as f64;
        }
        self.slot += 1;
        if self.opts.trace_every > 0 && self.slot % self.opts.trace_every == 0 {
            self.trace.push(self.queued as f64 / self.sensors.len().max(1) as f64);
        }
    }

    fn detect_contacts(&mut self, t: f64, measuring: bool) {
        for &i in &self.touched {
            self.serving[i as usize] = NONE;
            self.serving_d2[i as usize] = f64::INFINITY;
        }
        self.touched.clear();
        let r_s = self.cfg.r_s;
        let warm = self.warmup_time();
        for (m, mdc) in self.mdcs.iter_mut().enumerate() {
            if !mdc.phase.is_collecting() {
                // contacts cut short by a trip to an AP are not counted
                mdc.in_range.clear();
                continue;
            }
            let (serving, serving_d2, touched, now) = (&mut self.serving, &mut self.serving_d2, &mut self.touched, &mut self.scratch);
            now.clear();
            self.sensor_grid.for_each_within(mdc.pos, r_s, |i, d2| {
                now.push(i as u32);
                if serving[i] == NONE {
                    touched.push(i as u32);
                }
                // nearest MDC serves; MDCs are visited in index order so ties keep the lower one
                if d2 < serving_d2[i] {
                    serving_d2[i] = d2;
                    serving[i] = m as u32;
                }
            });
            now.sort_unstable();
            if !now.is_empty() && mdc.in_range.is_empty() {
                if measuring && mdc.gap_since >= warm {
                    self.counters.mdc_idle.push(t - mdc.gap_since);
                }
            } else if now.is_empty() && !mdc.in_range.is_empty() {
                mdc.gap_since = t;
            }
            let counters = &mut self.counters;
            let mut next = Vec::with_capacity(now.len());
            let mut old = mdc.in_range.iter().peekable();
            for &i in now.iter() {
                while let Some(&&(j, since)) = old.peek() {
                    if j >= i {
                        break;
                    }
                    if measuring && since >= warm {
                        counters.pair_contact.push(t - since);
                    }
                    old.next();
                }
                match old.peek() {
                    Some(&&(j, since)) if j == i => {
                        next.push((i, since));
                        old.next();
                    }
                    _ => next.push((i, t)),
                }
            }
            for &(_, since) in old {
                if measuring && since >= warm {
                    counters.pair_contact.push(t - since);
                }
            }
            mdc.in_range = next;
        }
        for (i, s) in self.sensors.iter_mut().enumerate() {
            let now = self.serving[i] != NONE;
            if now == s.covered {
                continue;
            }
            if measuring && s.since >= warm {
                if now {
                    self.counters.contact_idle.push(t - s.since);
                } else {
                    self.counters.contact_busy.push(t - s.since);
                }
            }
            if now {
                s.cycle += 1;
            }
            s.covered = now;
            s.since = t;
        }
    }

    fn arrivals(&mut self, t1: f64) {
        let Some(gap) = self.arrival_gap else { return };
        for s in &mut self.sensors {
            while s.next_arrival < t1 {
                s.queue.push_back(Packet { arrival: s.next_arrival, cycle: s.cycle, first_attempt: f64::NAN });
                s.next_arrival += gap.sample(&mut self.rng);
                self.queued += 1;
                self.enqueued += 1;
            }
        }
    }

    fn uplink(&mut self, t0: f64, t1: f64, measuring: bool) {
        // (sensor, receiving MDC), sorted by receiver then sensor
        let mut active: Vec<(u32, u32)> = self
            .touched
            .iter()
            .filter_map(|&i| {
                let s = &self.sensors[i as usize];
                let eligible = s.queue.front().is_some_and(|p| p.cycle < s.cycle);
                (eligible && self.serving[i as usize] != NONE).then_some((i, self.serving[i as usize]))
            })
            .collect();
        active.sort_unstable_by_key(|&(i, m)| (m, i));
        if measuring {
            let a = active.len() as u64;
            self.counters.active_sensor_sum += a;
            self.counters.sensor_tx_slots += a;
            self.counters.sensor_sleep_slots += self.sensors.len() as u64 - a;
        }
        if active.is_empty() {
            return;
        }
        let alpha = self.cfg.alpha;
        let mut power = vec![0.0; active.len()];
        let mut start = 0;
        while start < active.len() {
            let m = active[start].1;
            let end = start + active[start..].iter().take_while(|x| x.1 == m).count();
            let rx = self.mdcs[m as usize].pos;
            let mut total = self.noise;
            for (k, &(j, _)) in active.iter().enumerate() {
                let d = self.arena.distance(self.sensors[j as usize].pos, rx).max(1e-6);
                let h: f64 = Exp1.sample(&mut self.rng);
                power[k] = self.cfg.p_s * h * d.powf(-alpha);
                total += power[k];
            }
            for k in start..end {
                let i = active[k].0 as usize;
                let sinr = power[k] / (total - power[k]);
                let sensor = &mut self.sensors[i];
                let head = sensor.queue.front_mut().expect("active sensors have a packet");
                if head.first_attempt.is_nan() {
                    head.first_attempt = t0;
                }
                if measuring {
                    self.counters.attempts_s += 1;
                }
                if sinr <= self.cfg.t_s {
                    continue;
                }
                if measuring {
                    self.counters.successes_s += 1;
                }
                let mdc = &mut self.mdcs[m as usize];
                if mdc.buffer.len() >= self.cfg.k as usize {
                    // buffer full: NACK, the packet stays
                    continue;
                }
                let p = sensor.queue.pop_front().expect("head exists");
                self.queued -= 1;
                mdc.buffer.push_back(Carried { arrival: p.arrival, first_attempt: p.first_attempt, receipt: t1, ap_first: f64::NAN });
                if measuring {
                    self.counters.uplink_packets += 1;
                }
            }
            start = end;
        }
    }

    fn downlink(&mut self, t0: f64, t1: f64, measuring: bool) {
        let mut tx: Vec<u32> = (0..self.mdcs.len() as u32).filter(|&m| self.mdcs[m as usize].phase == Phase::Transmitting).collect();
        if measuring {
            self.counters.tx_mdc_sum += tx.len() as u64;
            self.counters.mdc_tx_slots += tx.len() as u64;
        }
        if tx.is_empty() {
            return;
        }
        tx.sort_unstable_by_key(|&m| (self.mdcs[m as usize].target_ap, m));
        let alpha = self.cfg.alpha;
        let warm = self.warmup_time();
        let mut power = vec![0.0; tx.len()];
        let mut start = 0;
        while start < tx.len() {
            let ap = self.mdcs[tx[start] as usize].target_ap;
            let end = start + tx[start..].iter().take_while(|&&m| self.mdcs[m as usize].target_ap == ap).count();
            let rx = self.aps[ap];
            let mut total = self.noise;
            for (k, &m) in tx.iter().enumerate() {
                let d = self.arena.distance(self.mdcs[m as usize].pos, rx).max(1e-6);
                let h: f64 = Exp1.sample(&mut self.rng);
                power[k] = self.cfg.p_m * h * d.powf(-alpha);
                total += power[k];
            }
            for k in start..end {
                let mdc = &mut self.mdcs[tx[k] as usize];
                let head = mdc.buffer.front_mut().expect("transmitting MDCs hold packets");
                if head.ap_first.is_nan() {
                    head.ap_first = t0;
                }
                if measuring {
                    self.counters.attempts_a += 1;
                }
                if power[k] / (total - power[k]) <= self.cfg.t_a {
                    continue;
                }
                if measuring {
                    self.counters.successes_a += 1;
                    self.counters.delivered += 1;
                }
                let p = mdc.buffer.pop_front().expect("head exists");
                self.delivered_all += 1;
                // every hop is sampled from the same delivered packets
                if p.arrival >= warm {
                    let c = &mut self.counters;
                    c.d_q_s.push(p.first_attempt - p.arrival);
                    c.d_t_s.push(p.receipt - p.first_attempt);
                    c.d_q_m.push(p.ap_first - p.receipt);
                    c.d_t_m.push(t1 - p.ap_first);
                    c.total.push(t1 - p.arrival);
                }
            }
            start = end;
        }
    }

    fn kinematics(&mut self, t0: f64) {
        let step = self.cfg.v * self.cfg.delta;
        let warm = self.warmup_time();
        for (m, mdc) in self.mdcs.iter_mut().enumerate() {
            match mdc.phase {
                Phase::Pausing => {
                    mdc.timer -= 1;
                    if mdc.timer == 0 {
                        mdc.phase = Phase::Walking;
                        mdc.timer = self.walk_slots;
                        mdc.heading = random_heading(&mut self.rng);
                    }
                }
                Phase::Walking => {
                    mdc.pos = self.arena.wrap(Point::new(mdc.pos.x + step * mdc.heading.0, mdc.pos.y + step * mdc.heading.1));
                    mdc.timer -= 1;
                    if mdc.timer == 0 {
                        mdc.phase = Phase::Pausing;
                        mdc.timer = self.pause_slots;
                    }
                }
                Phase::MovingToAp => {
                    let (dx, dy) = self.arena.displacement(mdc.pos, mdc.stop);
                    let d = (dx * dx + dy * dy).sqrt();
                    if d <= step {
                        mdc.pos = mdc.stop;
                        let at = t0 + d / self.cfg.v;
                        arrive(m as u32, mdc, &mut self.ap_queue, at.max(mdc.trigger_time), warm, &mut self.counters);
                    } else {
                        mdc.pos = self.arena.wrap(Point::new(mdc.pos.x + step * dx / d, mdc.pos.y + step * dy / d));
                    }
                }
                Phase::WaitingAtAp | Phase::Transmitting => {}
            }
        }
    }

    fn transitions(&mut self, t1: f64, measuring: bool) {
        let k = self.cfg.k as usize;
        let warm = self.warmup_time();
        for m in 0..self.mdcs.len() {
            let phase = self.mdcs[m].phase;
            if phase.is_collecting() && self.mdcs[m].buffer.len() >= k {
                let Some(grid) = &self.ap_grid else { continue };
                let (ap, _) = grid.nearest(self.mdcs[m].pos).expect("grid is non-empty");
                let r = self.cfg.r_a * self.rng.random::<f64>().sqrt();
                let th = 2.0 * PI * self.rng.random::<f64>();
                let c = self.aps[ap];
                let stop = self.arena.wrap(Point::new(c.x + r * th.cos(), c.y + r * th.sin()));
                let mdc = &mut self.mdcs[m];
                if measuring && mdc.collect_since >= warm {
                    self.counters.t_collect.push(t1 - mdc.collect_since);
                }
                mdc.target_ap = ap;
                mdc.stop = stop;
                mdc.trigger_time = t1;
                mdc.in_range.clear();
                mdc.gap_since = f64::NAN;
                mdc.phase = Phase::MovingToAp;
                if self.arena.distance(mdc.pos, stop) == 0.0 {
                    arrive(m as u32, mdc, &mut self.ap_queue, t1, warm, &mut self.counters);
                }
            } else if phase == Phase::Transmitting && self.mdcs[m].buffer.is_empty() {
                let mdc = &mut self.mdcs[m];
                if measuring && mdc.arrive_time >= warm {
                    self.counters.t_trans.push(t1 - mdc.arrive_time);
                }
                mdc.phase = Phase::Pausing;
                mdc.timer = self.pause_slots;
                mdc.collect_since = t1;
                let queue = &mut self.ap_queue[mdc.target_ap];
                debug_assert_eq!(queue.front(), Some(&(m as u32)));
                queue.pop_front();
                if let Some(&next) = queue.front() {
                    let next = &mut self.mdcs[next as usize];
                    next.phase = Phase::Transmitting;
                    next.arrive_time = t1;
                }
            }
        }
    }
}

fn arrive(m: u32, mdc: &mut Mdc, ap_queue: &mut [VecDeque<u32>], at: f64, warm: f64, counters: &mut Counters) {
    let queue = &mut ap_queue[mdc.target_ap];
    mdc.phase = if queue.is_empty() { Phase::Transmitting } else { Phase::WaitingAtAp };
    queue.push_back(m);
    // transmission time is counted from when the AP takes this MDC
    mdc.arrive_time = at;
    if mdc.trigger_time >= warm {
        counters.t_smov.push(at - mdc.trigger_time);
    }
    for p in &mdc.buffer {
        if p.arrival >= warm {
            counters.d_q_m_travel.push(at - p.receipt);
        }
    }
}

fn random_heading(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let th = 2.0 * PI * rng.random::<f64>();
    (th.cos(), th.sin())
}
