//! Path kernel shared by value estimation and ruin estimation.
//!
//! Scheme per step of length `dt` starting at surplus `x`:
//! the rate `u` is fixed from `x`; the surplus moves by the exact Gaussian
//! increment of `μ - u` drift Brownian motion; the log exchange rate moves by
//! an exact-in-law Lévy increment; dividends `u·dt` are credited with the
//! end-of-step discount `exp(-δt - L_t)`; reflection pays the overflow above
//! the barrier at the same discount. A step ends in ruin when the endpoint is
//! nonpositive (crossing time by linear interpolation) or, with bridge
//! correction, when an undetected crossing is drawn.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::sampler::IncrementSampler;
use super::stats::Moments;
use super::{stream_rng, MCEstimate, PathRecord, SimConfig, StrategySpec, Stream};
use crate::control::ProblemSpec;
use crate::error::{invalid, Error, Result};
use crate::levy::{beta, is_well_posed, LevyTriplet};

/// Paths per accumulation block; blocks are merged in index order.
const BLOCK: usize = 512;

pub(crate) struct PathEngine<'a> {
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub strategy: StrategySpec,
    pub sampler: &'a IncrementSampler,
    pub bridge: bool,
    pub seed: u64,
    pub x0: f64,
    pub l0: f64,
    /// Treat the path as surviving once the surplus reaches this level.
    pub stop_above: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PathSummary {
    pub value: f64,
    pub ruined: bool,
}

pub(crate) trait Observer {
    fn step(&mut self, t: f64, x: f64, l: f64, paid: f64, noise: f64);
    fn ruined(&mut self, t: f64);
}

pub(crate) struct NoObserver;

impl Observer for NoObserver {
    #[inline]
    fn step(&mut self, _: f64, _: f64, _: f64, _: f64, _: f64) {}
    #[inline]
    fn ruined(&mut self, _: f64) {}
}

impl Observer for PathRecord {
    fn step(&mut self, t: f64, x: f64, l: f64, paid: f64, noise: f64) {
        self.times.push(t);
        self.surplus.push(x);
        self.log_fx.push(l);
        self.cum_dividends.push(paid);
        self.noise.push(noise);
    }

    fn ruined(&mut self, t: f64) {
        self.ruined_at = Some(t);
    }
}

impl PathEngine<'_> {
    /// Simulates path `key`; `sign = -1` flips all Gaussian draws.
    pub fn run<O: Observer>(&self, key: u64, sign: f64, obs: &mut O) -> PathSummary {
        let mut w_rng = stream_rng(self.seed, key, Stream::SurplusGauss);
        let mut lg_rng = stream_rng(self.seed, key, Stream::FxGauss);
        let mut lj_rng = stream_rng(self.seed, key, Stream::FxJumps);
        let mut b_rng = stream_rng(self.seed, key, Stream::Bridge);

        let dt = self.dt;
        let sd = self.sigma * dt.sqrt();
        let bridge_scale = 2.0 / (self.sigma * self.sigma * dt);
        let fx_static = self.sampler.is_zero();

        let mut x = self.x0;
        let mut l = self.l0;
        let mut paid = 0.0;
        let mut value = 0.0;
        let mut noise = 0.0;

        obs.step(0.0, x, l, paid, noise);
        if x <= 0.0 {
            obs.ruined(0.0);
            return PathSummary {
                value,
                ruined: true,
            };
        }
        if let StrategySpec::ReflectionBarrier { barrier } = self.strategy {
            if x > barrier {
                let lump = x - barrier;
                value += (-l).exp() * lump;
                paid += lump;
                x = barrier;
                obs.step(0.0, x, l, paid, noise);
                if x <= 0.0 {
                    obs.ruined(0.0);
                    return PathSummary {
                        value,
                        ruined: true,
                    };
                }
            }
        }

        for k in 0..self.n_steps {
            if let Some(level) = self.stop_above {
                if x >= level {
                    break;
                }
            }
            let u = self.strategy.rate_at(x);
            let z: f64 = w_rng.sample(StandardNormal);
            let dw = sd * sign * z;
            noise += dw;
            let x_new = x + (self.mu - u) * dt + dw;
            if !fx_static {
                l += self.sampler.sample(&mut lg_rng, &mut lj_rng, sign);
            }
            let t0 = k as f64 * dt;
            let t = t0 + dt;

            let crossing = if x_new <= 0.0 {
                Some(x / (x - x_new))
            } else if self.bridge {
                let arg = bridge_scale * x * x_new;
                if arg < 40.0 && b_rng.random::<f64>() < (-arg).exp() {
                    Some(0.5)
                } else {
                    None
                }
            } else {
                None
            };

            if let Some(frac) = crossing {
                let d = u * frac * dt;
                if d > 0.0 {
                    value += (-self.delta * t - l).exp() * d;
                    paid += d;
                }
                obs.step(t, 0.0, l, paid, noise);
                obs.ruined(t0 + frac * dt);
                return PathSummary {
                    value,
                    ruined: true,
                };
            }

            x = x_new;
            if u > 0.0 {
                value += (-self.delta * t - l).exp() * u * dt;
                paid += u * dt;
            }
            if let StrategySpec::ReflectionBarrier { barrier } = self.strategy {
                if x > barrier {
                    let lump = x - barrier;
                    value += (-self.delta * t - l).exp() * lump;
                    paid += lump;
                    x = barrier;
                }
            }
            obs.step(t, x, l, paid, noise);
        }
        PathSummary {
            value,
            ruined: false,
        }
    }

    /// Per-sample moments over `n_paths`, merged block by block in order.
    pub fn estimate(
        &self,
        n_paths: usize,
        antithetic: bool,
        f: impl Fn(PathSummary) -> f64 + Sync,
    ) -> Moments {
        let n_samples = if antithetic {
            n_paths.div_ceil(2)
        } else {
            n_paths
        };
        let n_blocks = n_samples.div_ceil(BLOCK);
        let blocks: Vec<Moments> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK;
                let hi = (lo + BLOCK).min(n_samples);
                let mut m = Moments::default();
                for key in lo..hi {
                    let key = key as u64;
                    let mut v = f(self.run(key, 1.0, &mut NoObserver));
                    if antithetic {
                        v = 0.5 * (v + f(self.run(key, -1.0, &mut NoObserver)));
                    }
                    m.push(v);
                }
                m
            })
            .collect();
        blocks
            .iter()
            .fold(Moments::default(), |acc, m| acc.merge(m))
    }
}

/// Horizon and truncation bound (before the `e^{-l0}` factor).
fn horizon(problem: &ProblemSpec, strategy: &StrategySpec, cfg: &SimConfig, x0: f64) -> (f64, f64) {
    let beta = problem.beta;
    let min_t = 100.0 * cfg.dt;
    match *strategy {
        StrategySpec::ThresholdRate { rate, .. } | StrategySpec::ConstantRate { rate } => {
            if rate == 0.0 {
                return (min_t, 0.0);
            }
            let t = ((rate / (beta * cfg.tail_tol)).ln() / beta).max(min_t);
            (t, rate * (-beta * t).exp() / beta)
        }
        StrategySpec::ReflectionBarrier { .. } => {
            let c = problem.mu / beta + x0;
            let t = ((c / cfg.tail_tol).ln() / beta).max(min_t);
            (t, c * (-beta * t).exp())
        }
    }
}

fn prepare(
    problem: &ProblemSpec,
    fx: &LevyTriplet,
    strategy: &StrategySpec,
    cfg: &SimConfig,
    x0: f64,
    l0: f64,
) -> Result<(f64, f64, usize)> {
    cfg.validate()?;
    strategy.validate(problem.xi())?;
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(Error::NegativeSurplus(x0));
    }
    if !l0.is_finite() {
        return Err(invalid("l0", "must be finite"));
    }
    let b = beta(fx, problem.delta)?;
    if !is_well_posed(&b) {
        return Err(Error::IllPosed(b.value.to_string()));
    }
    let (t, bound) = horizon(problem, strategy, cfg, x0);
    let n_steps = (t / cfg.dt).ceil() as usize;
    Ok((n_steps as f64 * cfg.dt, bound * (-l0).exp(), n_steps))
}

/// Expected discounted dividends `E[∫ e^{-δt - L_t} dD_t]` up to ruin, for a
/// given strategy, starting from surplus `x0` and log exchange rate `l0`.
///
/// The estimate is a function of `cfg.seed` alone; thread count does not
/// affect any bit of the result.
pub fn simulate_value(
    problem: &ProblemSpec,
    fx: &LevyTriplet,
    strategy: &StrategySpec,
    cfg: &SimConfig,
    x0: f64,
    l0: f64,
) -> Result<MCEstimate> {
    let (horizon, truncation_bound, n_steps) = prepare(problem, fx, strategy, cfg, x0, l0)?;
    let sampler = IncrementSampler::new(fx, cfg.dt);
    let engine = PathEngine {
        mu: problem.mu,
        sigma: problem.sigma,
        delta: problem.delta,
        dt: cfg.dt,
        n_steps,
        strategy: *strategy,
        sampler: &sampler,
        bridge: cfg.bridge_correction,
        seed: cfg.seed,
        x0,
        l0,
        stop_above: None,
    };
    let m = engine.estimate(cfg.n_paths, cfg.antithetic, |s| s.value);
    let n = if cfg.antithetic {
        2 * m.count as usize
    } else {
        m.count as usize
    };
    Ok(MCEstimate {
        mean: m.mean,
        stderr: m.stderr(),
        n,
        truncation_bound,
        horizon,
    })
}

/// Full record of path `path_id` under the same scheme as [`simulate_value`].
pub fn simulate_path(
    problem: &ProblemSpec,
    fx: &LevyTriplet,
    strategy: &StrategySpec,
    cfg: &SimConfig,
    x0: f64,
    l0: f64,
    path_id: u64,
) -> Result<PathRecord> {
    let (_, _, n_steps) = prepare(problem, fx, strategy, cfg, x0, l0)?;
    let sampler = IncrementSampler::new(fx, cfg.dt);
    let engine = PathEngine {
        mu: problem.mu,
        sigma: problem.sigma,
        delta: problem.delta,
        dt: cfg.dt,
        n_steps,
        strategy: *strategy,
        sampler: &sampler,
        bridge: cfg.bridge_correction,
        seed: cfg.seed,
        x0,
        l0,
        stop_above: None,
    };
    let mut rec = PathRecord::default();
    engine.run(path_id, 1.0, &mut rec);
    Ok(rec)
}
