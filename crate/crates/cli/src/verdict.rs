use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    /// |a − e| ≤ tol, for probabilities.
    Absolute,
    /// |a − e| ≤ tol·|a|, for times, lengths and energies.
    Relative,
}

/// Analytic value against an empirical one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonVerdict {
    pub metric: String,
    pub analytic: f64,
    pub empirical: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub tolerance: f64,
    pub kind: ToleranceKind,
    pub pass: bool,
}

impl ComparisonVerdict {
    pub fn new(metric: impl Into<String>, analytic: f64, empirical: f64, tolerance: f64, kind: ToleranceKind) -> ComparisonVerdict {
        let gap = (analytic - empirical).abs();
        let allowed = match kind {
            ToleranceKind::Absolute => tolerance,
            ToleranceKind::Relative => tolerance * analytic.abs(),
        };
        // a few ulps so that a gap sitting exactly on the limit passes
        let slack = 4.0 * f64::EPSILON * analytic.abs().max(empirical.abs());
        ComparisonVerdict {
            metric: metric.into(),
            analytic,
            empirical,
            ci_low: None,
            ci_high: None,
            tolerance,
            kind,
            // NaN on either side fails
            pass: gap <= allowed + slack,
        }
    }

    pub fn absolute(metric: impl Into<String>, analytic: f64, empirical: f64, tolerance: f64) -> ComparisonVerdict {
        ComparisonVerdict::new(metric, analytic, empirical, tolerance, ToleranceKind::Absolute)
    }

    pub fn relative(metric: impl Into<String>, analytic: f64, empirical: f64, tolerance: f64) -> ComparisonVerdict {
        ComparisonVerdict::new(metric, analytic, empirical, tolerance, ToleranceKind::Relative)
    }

    pub fn with_ci(mut self, lo: f64, hi: f64) -> ComparisonVerdict {
        self.ci_low = Some(lo);
        self.ci_high = Some(hi);
        self
    }

    /// Signed gap in the verdict's own units.
    pub fn gap(&self) -> f64 {
        match self.kind {
            ToleranceKind::Absolute => self.empirical - self.analytic,
            ToleranceKind::Relative => self.empirical / self.analytic - 1.0,
        }
    }
}

impl fmt::Display for ComparisonVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (gap, tol) = match self.kind {
            ToleranceKind::Absolute => (format!("{:+.4}", self.gap()), format!("{}", self.tolerance)),
            ToleranceKind::Relative => (format!("{:+.2}%", 100.0 * self.gap()), format!("{}%", 100.0 * self.tolerance)),
        };
        write!(
            f,
            "{} {}: analytic {:.6} empirical {:.6} gap {gap} (tol {tol})",
            if self.pass { "PASS" } else { "FAIL" },
            self.metric,
            self.analytic,
            self.empirical
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(ComparisonVerdict::absolute("p", 0.9, 0.93, 0.03).pass);
        assert!(!ComparisonVerdict::absolute("p", 0.9, 0.931, 0.03).pass);
        assert!(ComparisonVerdict::relative("t", 100.0, 104.9, 0.05).pass);
        assert!(!ComparisonVerdict::relative("t", 100.0, 94.9, 0.05).pass);
        assert!(!ComparisonVerdict::relative("t", 100.0, f64::NAN, 0.05).pass);
        assert!((ComparisonVerdict::relative("t", 4.0, 3.0, 0.05).gap() + 0.25).abs() < 1e-12);
    }
}
