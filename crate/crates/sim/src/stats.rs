//! Running moments and normal-approximation confidence intervals.

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }

    pub fn variance(&self) -> Option<f64> {
        (self.n > 1).then(|| self.m2 / (self.n - 1) as f64)
    }

    pub fn merge(&mut self, other: &Running) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Mean ± z·s/√n over independent replicate estimates; needs at least two.
pub fn normal_ci(samples: &[f64]) -> Option<Interval> {
    if samples.len() < 2 {
        return None;
    }
    let mut r = Running::default();
    samples.iter().for_each(|&x| r.push(x));
    let mean = r.mean()?;
    let half = Z95 * (r.variance()? / samples.len() as f64).sqrt();
    Some(Interval { mean, lo: mean - half, hi: mean + half, n: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn interval_basics() {
        assert!(normal_ci(&[1.0]).is_none());
        let ci = normal_ci(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(ci.mean, 2.5);
        assert_relative_eq!(ci.half_width(), Z95 * (5.0f64 / 3.0 / 4.0).sqrt(), max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn merge_matches_single_pass(xs in proptest::collection::vec(-1e3f64..1e3, 2..60), cut in 0usize..60) {
            let cut = cut.min(xs.len());
            let mut whole = Running::default();
            xs.iter().for_each(|&x| whole.push(x));
            let (mut a, mut b) = (Running::default(), Running::default());
            xs[..cut].iter().for_each(|&x| a.push(x));
            xs[cut..].iter().for_each(|&x| b.push(x));
            a.merge(&b);
            prop_assert_eq!(a.count(), whole.count());
            prop_assert!((a.mean().unwrap() - whole.mean().unwrap()).abs() < 1e-9);
            prop_assert!((a.variance().unwrap() - whole.variance().unwrap()).abs() < 1e-6 * (1.0 + whole.variance().unwrap()));
        }
    }
}
