use std::io::Write;

use super::sampler::IncrementSampler;
use super::{stream_rng, Stream};
use crate::error::{invalid, Result};
use crate::levy::LevyTriplet;

/// Sample paths of `L_t + δt` on a uniform grid, `L_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FxPaths {
    pub times: Vec<f64>,
    /// `values[path][step]`.
    pub values: Vec<Vec<f64>>,
}

impl FxPaths {
    /// CSV `t,path_id,value`, time-major.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "path_id", "value"])?;
        for (k, t) in self.times.iter().enumerate() {
            for (id, path) in self.values.iter().enumerate() {
                w.write_record([format!("{t:?}"), id.to_string(), format!("{:?}", path[k])])?;
            }
        }
        w.flush()
    }

    /// Least-squares slope through the origin of the mean path, with its
    /// standard error from the spread of per-path terminal slopes.
    pub fn terminal_slope(&self) -> (f64, f64) {
        let t = *self.times.last().unwrap();
        let slopes: Vec<f64> = self.values.iter().map(|p| p.last().unwrap() / t).collect();
        let m: super::Moments = slopes.into_iter().collect();
        (m.mean, m.stderr())
    }
}

pub fn export_discounted_fx_paths(
    fx: &LevyTriplet,
    delta: f64,
    horizon: f64,
    dt: f64,
    n: usize,
    seed: u64,
) -> Result<FxPaths> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    if !(horizon.is_finite() && horizon >= dt) {
        return Err(invalid("horizon", "must be at least one step"));
    }
    if n == 0 {
        return Err(invalid("n_paths", "must be positive"));
    }
    let steps = (horizon / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let sampler = IncrementSampler::new(fx, dt);
    let values = (0..n as u64)
        .map(|id| {
            let mut g = stream_rng(seed, id, Stream::FxGauss);
            let mut j = stream_rng(seed, id, Stream::FxJumps);
            let mut l = 0.0;
            let mut path = Vec::with_capacity(steps + 1);
            path.push(0.0);
            for &t in &times[1..] {
                l += sampler.sample(&mut g, &mut j, 1.0);
                path.push(l + delta * t);
            }
            path
        })
        .collect();
    Ok(FxPaths { times, values })
}
