use statrs::function::erf::erfc;

use super::kernel::PathEngine;
use super::sampler::IncrementSampler;
use super::{MCEstimate, SimConfig, StrategySpec};
use crate::error::{invalid, Error, Result};
use crate::levy::LevyTriplet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinEstimate {
    /// `exp(-2(μ - u)x₀/σ²)`.
    pub analytic: f64,
    /// Ruin frequency; `truncation_bound` bounds the ruin probability the
    /// simulation cannot see (after the horizon or above the stop level).
    pub mc: MCEstimate,
    /// Paths reaching this level count as surviving.
    pub stop_level: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Ruin probability of `x₀ + (μ - u)t + σW_t`, analytic and simulated.
///
/// Simulated paths stop once they reach `m` with `e^{-c m} <= tail_tol/2`,
/// `c = 2(μ - u)/σ²`; the horizon is the first `T` at which the free process
/// is below `m` with probability at most `tail_tol/2`. The two pieces bound
/// the ruin mass the simulation misses.
pub fn ruin_probability_constant_rate(
    mu: f64,
    sigma: f64,
    u: f64,
    x0: f64,
    cfg: &SimConfig,
) -> Result<RuinEstimate> {
    cfg.validate()?;
    if !(mu > 0.0 && sigma > 0.0) {
        return Err(invalid("mu/sigma", "must be positive"));
    }
    if !(u >= 0.0 && u < mu) {
        return Err(invalid(
            "u",
            format!("need 0 <= u < mu, got u = {u}, mu = {mu}"),
        ));
    }
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(Error::NegativeSurplus(x0));
    }
    let drift = mu - u;
    let c = 2.0 * drift / (sigma * sigma);
    let analytic = (-c * x0).exp();

    let stop_level = ((2.0 / cfg.tail_tol).ln() / c).max(2.0 * x0);
    let miss_above = (-c * stop_level).exp();
    let below_at = |t: f64| std_normal_cdf((stop_level - x0 - drift * t) / (sigma * t.sqrt()));
    let mut t = (100.0 * cfg.dt).max(1.0);
    while below_at(t) > 0.5 * cfg.tail_tol {
        t *= 1.25;
    }
    let n_steps = (t / cfg.dt).ceil() as usize;
    let horizon = n_steps as f64 * cfg.dt;

    let sampler = IncrementSampler::new(&LevyTriplet::zero(), cfg.dt);
    let engine = PathEngine {
        mu,
        sigma,
        delta: 0.0,
        dt: cfg.dt,
        n_steps,
        strategy: StrategySpec::ConstantRate { rate: u },
        sampler: &sampler,
        bridge: cfg.bridge_correction,
        seed: cfg.seed,
        x0,
        l0: 0.0,
        stop_above: Some(stop_level),
    };
    let m = engine.estimate(cfg.n_paths, cfg.antithetic, |s| {
        if s.ruined {
            1.0
        } else {
            0.0
        }
    });
    let n = if cfg.antithetic {
        2 * m.count as usize
    } else {
        m.count as usize
    };
    Ok(RuinEstimate {
        analytic,
        mc: MCEstimate {
            mean: m.mean,
            stderr: m.stderr(),
            n,
            truncation_bound: miss_above + below_at(horizon),
            horizon,
        },
        stop_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let cfg = SimConfig {
            n_paths: 10,
            ..Default::default()
        };
        let r = ruin_probability_constant_rate(1.0, 1.0, 0.5, 0.0, &cfg).unwrap();
        assert_eq!(r.analytic, 1.0);
        assert_eq!(r.mc.mean, 1.0);
        let r = ruin_probability_constant_rate(1.0, 1.0, 0.5, 1.0, &cfg).unwrap();
        assert!((r.analytic - (-1f64).exp()).abs() < 1e-15);
        assert!((r.analytic - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn rate_at_or_above_drift_rejected() {
        let cfg = SimConfig::default();
        assert!(ruin_probability_constant_rate(1.0, 1.0, 1.0, 1.0, &cfg).is_err());
        assert!(ruin_probability_constant_rate(1.0, 1.0, 1.5, 1.0, &cfg).is_err());
    }

    #[test]
    fn half_drift_matches_analytic() {
        let cfg = SimConfig {
            n_paths: 20_000,
            dt: 5e-3,
            seed: 3,
            ..Default::default()
        };
        let r = ruin_probability_constant_rate(1.0, 1.0, 0.5, 1.0, &cfg).unwrap();
        assert!(r.mc.truncation_bound <= cfg.tail_tol);
        assert!(
            r.mc.agrees_with(r.analytic, 4.0),
            "{:?} vs {}",
            r.mc,
            r.analytic
        );
    }
}
