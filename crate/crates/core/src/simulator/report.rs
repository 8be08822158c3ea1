use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Error count over a number of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    pub errors: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn new(errors: u64, trials: u64) -> Self {
        debug_assert!(errors <= trials);
        Estimate { errors, trials }
    }

    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }

    /// Wilson score interval at 95% confidence.
    pub fn interval(&self) -> (f64, f64) {
        if self.trials == 0 {
            return (0.0, 1.0);
        }
        let n = self.trials as f64;
        let p = self.rate();
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lo = if self.errors == 0 {
            0.0
        } else {
            (centre - half).max(0.0)
        };
        let hi = if self.errors == self.trials {
            1.0
        } else {
            (centre + half).min(1.0)
        };
        (lo, hi)
    }

    pub fn half_width(&self) -> f64 {
        let (lo, hi) = self.interval();
        0.5 * (hi - lo)
    }

    pub fn contains(&self, p: f64) -> bool {
        let (lo, hi) = self.interval();
        lo <= p && p <= hi
    }

    pub fn merge(&mut self, other: Estimate) {
        self.errors += other.errors;
        self.trials += other.trials;
    }
}

/// Flattened estimate for tabular output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub rate: f64,
    pub errors: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl From<Estimate> for RateSummary {
    fn from(e: Estimate) -> Self {
        let (ci_low, ci_high) = e.interval();
        RateSummary {
            rate: e.rate(),
            errors: e.errors,
            trials: e.trials,
            ci_low,
            ci_high,
        }
    }
}

/// Warns when `trials` cannot resolve error rates down to `min_rate`.
pub fn budget_warning(what: &str, trials: u64, min_rate: f64) -> Option<String> {
    let needed = (100.0 / min_rate).ceil() as u64;
    (trials < needed)
        .then(|| format!("{what}: {trials} trials cannot resolve rates down to {min_rate:e} (need {needed})"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_rate() {
        let e = Estimate::new(50, 1000);
        let (lo, hi) = e.interval();
        assert!(lo < 0.05 && 0.05 < hi);
        assert!((e.half_width() - 0.0136).abs() < 5e-4);
        assert_eq!(Estimate::new(0, 100).interval().0, 0.0);
    }

    #[test]
    fn warning_threshold() {
        assert!(budget_warning("x", 10_000, 1e-3).is_some());
        assert!(budget_warning("x", 100_000, 1e-3).is_none());
    }
}
