//! Point processes on the square arena, distances under both boundary modes,
//! and grid-bucketed neighbour queries.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::params::BoundaryMode;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arena {
    pub side: f64,
    pub mode: BoundaryMode,
}

impl Arena {
    pub fn new(side: f64, mode: BoundaryMode) -> Arena {
        Arena { side, mode }
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Vector from `a` to `b`; the shortest one among periodic images on a torus.
    pub fn displacement(&self, a: Point, b: Point) -> (f64, f64) {
        let mut dx = b.x - a.x;
        let mut dy = b.y - a.y;
        if self.mode == BoundaryMode::Torus {
            let half = 0.5 * self.side;
            if dx > half {
                dx -= self.side;
            } else if dx < -half {
                dx += self.side;
            }
            if dy > half {
                dy -= self.side;
            } else if dy < -half {
                dy += self.side;
            }
        }
        (dx, dy)
    }

    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx * dx + dy * dy
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    /// Maps a torus position back into `[0, side)²`. Plane positions pass through.
    pub fn wrap(&self, p: Point) -> Point {
        match self.mode {
            BoundaryMode::Torus => Point::new(wrap_coord(p.x, self.side), wrap_coord(p.y, self.side)),
            BoundaryMode::Plane => p,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.side).contains(&p.x) && (0.0..self.side).contains(&p.y)
    }

    pub fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(rng.random::<f64>() * self.side, rng.random::<f64>() * self.side)
    }
}

fn wrap_coord(x: f64, side: f64) -> f64 {
    let r = x.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs
    if r >= side {
        0.0
    } else {
        r
    }
}

/// Distance between two arena positions.
pub fn distance(a: Point, b: Point, arena_side: f64, mode: BoundaryMode) -> f64 {
    Arena::new(arena_side, mode).distance(a, b)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("nearest-point query on an empty point set")]
    EmptyPointSet,
}

/// A realization of a homogeneous PPP.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub density: f64,
    pub arena: Arena,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exhaustive nearest-point search, ties to the lowest index.
    pub fn nearest(&self, from: Point) -> Result<(usize, f64), GeometryError> {
        nearest_in(&self.points, &self.arena, from)
    }
}

/// Exhaustive nearest-point search over a slice, ties to the lowest index.
pub fn nearest_in(points: &[Point], arena: &Arena, from: Point) -> Result<(usize, f64), GeometryError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in points.iter().enumerate() {
        let d2 = arena.distance_sq(from, p);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, d2)| (i, d2.sqrt())).ok_or(GeometryError::EmptyPointSet)
}

/// Samples a PPP of the given density on the arena, deterministic in `seed`.
pub fn sample_ppp(density: f64, arena: Arena, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ppp_with(density, arena, &mut rng)
}

pub fn sample_ppp_with<R: Rng + ?Sized>(density: f64, arena: Arena, rng: &mut R) -> PointSet {
    assert!(density >= 0.0, "PPP density must be nonnegative, got {density}");
    let mean = density * arena.area();
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
    } else {
        0
    };
    let points = (0..n).map(|_| arena.uniform_point(rng)).collect();
    PointSet { points, density, arena }
}

/// Uniform bucket grid over a static point list.
///
/// Cells are square with side at least the requested size; on a torus the
/// neighbourhood wraps, on a plane it is clipped.
#[derive(Clone, Debug)]
pub struct Grid {
    arena: Arena,
    n: usize,
    cell: f64,
    starts: Vec<u32>,
    items: Vec<u32>,
    points: Vec<Point>,
}

impl Grid {
    pub fn new(points: &[Point], arena: Arena, cell_hint: f64) -> Grid {
        let n = ((arena.side / cell_hint.max(1e-9)).floor() as usize).clamp(1, 4096);
        let cell = arena.side / n as f64;
        let mut counts = vec![0u32; n * n + 1];
        let cell_of: Vec<usize> = points.iter().map(|&p| Self::cell_index(n, cell, p)).collect();
        for &c in &cell_of {
            counts[c + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; points.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Grid { arena, n, cell, starts, items, points: points.to_vec() }
    }

    fn cell_coord(n: usize, cell: f64, x: f64) -> usize {
        ((x / cell).floor().max(0.0) as usize).min(n - 1)
    }

    fn cell_index(n: usize, cell: f64, p: Point) -> usize {
        Self::cell_coord(n, cell, p.y) * n + Self::cell_coord(n, cell, p.x)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    fn cell_items(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.n + cx;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Calls `f(index, distance²)` for every point within `radius` of `p`
    /// (inclusive), each point at most once, in no particular order.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, p: Point, radius: f64, mut f: F) {
        let r2 = radius * radius;
        let span = (radius / self.cell).ceil() as i64;
        if 2 * span + 1 >= self.n as i64 {
            for (i, &q) in self.points.iter().enumerate() {
                let d2 = self.arena.distance_sq(p, q);
                if d2 <= r2 {
                    f(i, d2);
                }
            }
            return;
        }
        let cx = Self::cell_coord(self.n, self.cell, p.x) as i64;
        let cy = Self::cell_coord(self.n, self.cell, p.y) as i64;
        let n = self.n as i64;
        for dy in -span..=span {
            let Some(y) = self.axis(cy + dy, n) else { continue };
            for dx in -span..=span {
                let Some(x) = self.axis(cx + dx, n) else { continue };
                for &i in self.cell_items(x, y) {
                    let d2 = self.arena.distance_sq(p, self.points[i as usize]);
                    if d2 <= r2 {
                        f(i as usize, d2);
                    }
                }
            }
        }
    }

    fn axis(&self, c: i64, n: i64) -> Option<usize> {
        match self.arena.mode {
            BoundaryMode::Torus => Some(c.rem_euclid(n) as usize),
            BoundaryMode::Plane => (0..n).contains(&c).then_some(c as usize),
        }
    }

    /// Nearest point to `p`, ties to the lowest index.
    pub fn nearest(&self, p: Point) -> Result<(usize, f64), GeometryError> {
        if self.points.is_empty() {
            return Err(GeometryError::EmptyPointSet);
        }
        let n = self.n as i64;
        let cx = Self::cell_coord(self.n, self.cell, p.x) as i64;
        let cy = Self::cell_coord(self.n, self.cell, p.y) as i64;
        let mut best: Option<(u32, f64)> = None;
        for ring in 0i64.. {
            if 2 * ring + 1 >= n {
                // the rings now overlap themselves; finish exhaustively
                return nearest_in(&self.points, &self.arena, p);
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (Some(x), Some(y)) = (self.axis(cx + dx, n), self.axis(cy + dy, n)) else {
                        continue;
                    };
                    for &i in self.cell_items(x, y) {
                        let d2 = self.arena.distance_sq(p, self.points[i as usize]);
                        if best.is_none_or(|(bi, bd)| d2 < bd || (d2 == bd && i < bi)) {
                            best = Some((i, d2));
                        }
                    }
                }
            }
            // everything outside the searched block is at least ring·cell away
            if let Some((i, d2)) = best {
                let reach = ring as f64 * self.cell;
                if d2 < reach * reach {
                    return Ok((i as usize, d2.sqrt()));
                }
            }
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TORUS: Arena = Arena { side: 1000.0, mode: BoundaryMode::Torus };
    const PLANE: Arena = Arena { side: 1000.0, mode: BoundaryMode::Plane };

    #[test]
    fn wrap_distance() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(999.0, 0.0);
        assert_eq!(distance(a, b, 1000.0, BoundaryMode::Torus), 1.0);
        assert_eq!(distance(a, b, 1000.0, BoundaryMode::Plane), 999.0);
        assert_eq!(distance(a, a, 1000.0, BoundaryMode::Torus), 0.0);
        assert_eq!(TORUS.wrap(Point::new(-1.0, 1000.5)), Point::new(999.0, 0.5));
        assert_eq!(TORUS.wrap(Point::new(-1e-18, 0.0)).x, 0.0);
    }

    #[test]
    fn empty_process() {
        let s = sample_ppp(0.0, TORUS, 3);
        assert!(s.is_empty());
        assert_eq!(s.nearest(Point::default()), Err(GeometryError::EmptyPointSet));
        let g = Grid::new(&s.points, TORUS, 10.0);
        assert_eq!(g.nearest(Point::default()), Err(GeometryError::EmptyPointSet));
    }

    #[test]
    fn sampling_is_deterministic_and_in_arena() {
        let a = sample_ppp(1e-3, TORUS, 42);
        let b = sample_ppp(1e-3, TORUS, 42);
        assert_eq!(a, b);
        assert!(a.points.iter().all(|&p| TORUS.contains(p)));
        assert_ne!(a, sample_ppp(1e-3, TORUS, 43));
    }

    #[test]
    fn poisson_count_moments() {
        let seeds = 200;
        let mean = (0..seeds).map(|s| sample_ppp(1e-3, TORUS, s).len() as f64).sum::<f64>() / seeds as f64;
        let three_sigma = 3.0 * (1000f64).sqrt() / (seeds as f64).sqrt();
        assert!((mean - 1000.0).abs() < three_sigma, "mean count {mean}");
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let pts: Vec<Point> = [(50.0, 0.0), (0.0, 10.0), (0.0, 3.0), (7.0, 7.0), (10.0, 10.0), (0.0, -3.0)]
            .iter()
            .map(|&(x, y)| Point::new(x + 500.0, y + 500.0))
            .collect();
        let from = Point::new(500.0, 500.0);
        assert_eq!(nearest_in(&pts, &PLANE, from).unwrap().0, 2);
        let g = Grid::new(&pts, PLANE, 2.0);
        assert_eq!(g.nearest(from).unwrap().0, 2);
        let single = [Point::new(3.0, 4.0)];
        assert_eq!(nearest_in(&single, &PLANE, Point::default()).unwrap(), (0, 5.0));
    }

    #[test]
    fn nearest_distance_law() {
        // Nearest-AP distance from a uniform probe is Rayleigh: 1 − exp(−πλr²).
        let lambda = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut d = Vec::new();
        for rep in 0..1000 {
            let set = sample_ppp(lambda, TORUS, 1000 + rep);
            let grid = Grid::new(&set.points, TORUS, 50.0);
            for _ in 0..10 {
                d.push(grid.nearest(TORUS.uniform_point(&mut rng)).unwrap().1);
            }
        }
        d.sort_by(f64::total_cmp);
        let n = d.len() as f64;
        let ks = d
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let f = 1.0 - (-std::f64::consts::PI * lambda * r * r).exp();
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS statistic {ks}");
    }

    proptest! {
        #[test]
        fn grid_matches_brute_force(seed in 0u64..500, torus in any::<bool>(), cell in 5.0f64..200.0, px in 0.0f64..1000.0, py in 0.0f64..1000.0) {
            let arena = if torus { TORUS } else { PLANE };
            let set = sample_ppp(1e-4, arena, seed);
            prop_assume!(!set.is_empty());
            let grid = Grid::new(&set.points, arena, cell);
            let p = Point::new(px, py);
            prop_assert_eq!(grid.nearest(p).unwrap(), set.nearest(p).unwrap());

            let radius = cell * 0.7;
            let mut got = Vec::new();
            grid.for_each_within(p, radius, |i, _| got.push(i));
            got.sort_unstable();
            let want: Vec<usize> = (0..set.len()).filter(|&i| arena.distance(p, set.points[i]) <= radius).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn torus_never_longer(ax in 0.0f64..1000.0, ay in 0.0f64..1000.0, bx in 0.0f64..1000.0, by in 0.0f64..1000.0) {
            let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
            let t = TORUS.distance(a, b);
            prop_assert!(t <= PLANE.distance(a, b) + 1e-12);
            prop_assert_eq!(t, TORUS.distance(b, a));
            prop_assert!(t <= 1000.0 * std::f64::consts::FRAC_1_SQRT_2 + 1e-9);
        }
    }
}
