//! Binomial bookkeeping for Monte Carlo estimates.

use serde::Serialize;

/// Count of successes out of a number of Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        Self { successes, trials }
    }

    pub fn from_flags<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        flags.into_iter().fold(Self::default(), |acc, f| Self {
            successes: acc.successes + u64::from(f),
            trials: acc.trials + 1,
        })
    }

    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.trials as f64
    }

    /// Standard error of the empirical rate.
    pub fn stderr(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Binomial standard deviation of the rate if the true probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// `|rate - p| <= k sigma(p)`. A degenerate `p` of 0 or 1 demands an exact match.
    pub fn within_sigma(&self, p: f64, k: f64) -> bool {
        (self.rate() - p).abs() <= k * self.sigma_at(p) + f64::EPSILON
    }
}
