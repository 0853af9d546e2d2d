//! Monte Carlo simulation of the controlled surplus jointly with the
//! exchange-rate discount factor.
//!
//! Every path owns four counter-derived ChaCha8 streams (surplus Gaussians,
//! exchange-rate Gaussians, jumps, bridge uniforms) keyed by `(seed, path)`.
//! Paths are grouped into fixed-size blocks whose moment accumulators are
//! merged in block order, so an estimate depends on the seed only, never on
//! the number of worker threads.

mod kernel;
mod paths;
mod ruin;
mod sampler;
mod stats;

pub use kernel::{simulate_path, simulate_value};
pub use paths::{export_discounted_fx_paths, FxPaths};
pub use ruin::{ruin_probability_constant_rate, RuinEstimate};
pub use sampler::{sample_inverse_gaussian, sample_levy_increment, IncrementSampler};
pub use stats::Moments;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Bound on the discounted value ignored past the horizon.
    pub tail_tol: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Mirror the Gaussian draws of every other path.
    pub antithetic: bool,
    /// Kill a surviving step with the Brownian-bridge probability
    /// `exp(-2 x₀ x₁ / (σ² dt))` of an undetected zero crossing.
    pub bridge_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            tail_tol: 1e-3,
            n_paths: 10_000,
            seed: 42,
            antithetic: false,
            bridge_correction: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("sim.dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.tail_tol.is_finite() && self.tail_tol > 0.0) {
            return Err(invalid(
                "sim.tail_tol",
                format!("must be > 0, got {}", self.tail_tol),
            ));
        }
        if self.n_paths == 0 {
            return Err(invalid("sim.n_paths", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategySpec {
    /// Pay at `rate` whenever the surplus is strictly above `barrier`.
    ThresholdRate {
        barrier: f64,
        rate: f64,
    },
    /// Pay every overflow above `barrier` immediately.
    ReflectionBarrier {
        barrier: f64,
    },
    ConstantRate {
        rate: f64,
    },
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::ThresholdRate { .. } => "threshold",
            StrategySpec::ReflectionBarrier { .. } => "reflection",
            StrategySpec::ConstantRate { .. } => "constant",
        }
    }

    pub fn barrier(&self) -> Option<f64> {
        match *self {
            StrategySpec::ThresholdRate { barrier, .. }
            | StrategySpec::ReflectionBarrier { barrier } => Some(barrier),
            StrategySpec::ConstantRate { .. } => None,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match *self {
            StrategySpec::ThresholdRate { rate, .. } | StrategySpec::ConstantRate { rate } => {
                Some(rate)
            }
            StrategySpec::ReflectionBarrier { .. } => None,
        }
    }

    pub fn validate(&self, xi: Option<f64>) -> Result<()> {
        match *self {
            StrategySpec::ThresholdRate { barrier, rate } => {
                if !(barrier.is_finite() && barrier >= 0.0) {
                    return Err(invalid("strategy.barrier", "must be finite and >= 0"));
                }
                let cap = xi.unwrap_or(f64::INFINITY);
                if !(rate.is_finite() && rate > 0.0 && rate <= cap) {
                    return Err(invalid(
                        "strategy.rate",
                        format!("must lie in (0, {cap}], got {rate}"),
                    ));
                }
            }
            StrategySpec::ReflectionBarrier { barrier } => {
                if !(barrier.is_finite() && barrier >= 0.0) {
                    return Err(invalid("strategy.barrier", "must be finite and >= 0"));
                }
            }
            StrategySpec::ConstantRate { rate } => {
                if !(rate.is_finite() && rate >= 0.0) {
                    return Err(invalid("strategy.rate", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    /// Rate paid over a step that starts at surplus `x`.
    #[inline]
    pub(crate) fn rate_at(&self, x: f64) -> f64 {
        match *self {
            StrategySpec::ThresholdRate { barrier, rate } => {
                if x > barrier {
                    rate
                } else {
                    0.0
                }
            }
            StrategySpec::ConstantRate { rate } => rate,
            StrategySpec::ReflectionBarrier { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over independent samples divided by the
    /// square root of their count (antithetic pairs count as one sample).
    pub stderr: f64,
    /// Paths simulated.
    pub n: usize,
    /// Deterministic bound on the value discarded beyond the horizon.
    pub truncation_bound: f64,
    pub horizon: f64,
}

impl MCEstimate {
    /// Whether `target` is consistent with the estimate: the gap to the mean
    /// is at most `k·stderr`, after crediting the one-sided truncation loss.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }

    /// Standardised gap. A mean below `target` by at most the truncation
    /// bound counts as no gap.
    pub fn z_score(&self, target: f64) -> f64 {
        let mut gap = self.mean - target;
        if gap < 0.0 {
            gap = (gap + self.truncation_bound).min(0.0);
        }
        if gap == 0.0 {
            0.0
        } else {
            gap / self.stderr
        }
    }
}

/// One simulated path on the uniform time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathRecord {
    pub times: Vec<f64>,
    /// Ex-dividend surplus.
    pub surplus: Vec<f64>,
    pub log_fx: Vec<f64>,
    pub cum_dividends: Vec<f64>,
    /// Gaussian component of the surplus, `σW_t`.
    pub noise: Vec<f64>,
    pub ruined_at: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    SurplusGauss = 0,
    FxGauss = 1,
    FxJumps = 2,
    Bridge = 3,
}

pub(crate) fn stream_rng(seed: u64, key: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key.wrapping_mul(4).wrapping_add(stream as u64));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert!(SimConfig {
            n_paths: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            dt: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            tail_tol: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn strategy_validation() {
        let t = StrategySpec::ThresholdRate {
            barrier: 1.0,
            rate: 2.0,
        };
        assert!(t.validate(Some(1.0)).is_err());
        assert!(t.validate(None).is_ok());
        assert!(StrategySpec::ConstantRate { rate: -1.0 }
            .validate(None)
            .is_err());
        assert!(StrategySpec::ReflectionBarrier { barrier: -1.0 }
            .validate(None)
            .is_err());
    }

    #[test]
    fn z_score_credits_truncation() {
        let e = MCEstimate {
            mean: 1.0,
            stderr: 0.01,
            n: 100,
            truncation_bound: 0.05,
            horizon: 10.0,
        };
        assert_eq!(e.z_score(1.04), 0.0);
        assert!((e.z_score(1.07) + 2.0).abs() < 1e-9);
        assert!((e.z_score(0.98) - 2.0).abs() < 1e-9);
    }
}
