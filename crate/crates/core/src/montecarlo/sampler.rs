//! Exact-in-law increments of the log exchange rate over a fixed step.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::levy::{JumpComponent, LevyTriplet, NigParams};

/// Inverse Gaussian draw with mean `mean` and shape `shape`
/// (Michael–Schucany–Haas). The root is taken in the cancellation-free form
/// `mean / (1 + w + sqrt(w(w + 2)))`, `w = mean·v²/(2·shape)`, which stays
/// accurate for the tiny means of short time steps.
pub fn sample_inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    let w = mean * v * v / (2.0 * shape);
    let x = mean / (1.0 + w + (w * (w + 2.0)).sqrt());
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

#[derive(Debug, Clone)]
struct NigStep {
    /// IG mean `dt` and shape `dt²/κ`.
    mean: f64,
    shape: f64,
    vartheta: f64,
    scale: f64,
}

/// Increment sampler for one step size. Gaussian draws (the Brownian part)
/// come from `gauss`, everything else from `jumps`, so antithetic partners can
/// flip the Gaussian sequence without disturbing the jump sequence.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    drift: f64,
    gauss_sd: f64,
    atoms: Vec<(f64, Poisson<f64>)>,
    nig: Vec<NigStep>,
}

impl IncrementSampler {
    pub fn new(model: &LevyTriplet, dt: f64) -> Self {
        let mut atoms = Vec::new();
        let mut nig = Vec::new();
        for c in &model.jumps {
            match c {
                JumpComponent::DiscreteAtoms(list) => {
                    for a in list {
                        let pois = Poisson::new(a.intensity * dt).expect("positive intensity");
                        atoms.push((a.height, pois));
                    }
                }
                JumpComponent::NormalInverseGaussian(NigParams {
                    s2,
                    vartheta,
                    kappa,
                }) => {
                    nig.push(NigStep {
                        mean: dt,
                        shape: dt * dt / kappa,
                        vartheta: *vartheta,
                        scale: s2.sqrt(),
                    });
                }
            }
        }
        Self {
            drift: model.pathwise_drift() * dt,
            gauss_sd: (model.gaussian_variance * dt).sqrt(),
            atoms,
            nig,
        }
    }

    /// True when every increment is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.drift == 0.0 && self.gauss_sd == 0.0 && self.atoms.is_empty() && self.nig.is_empty()
    }

    pub fn sample<G: Rng + ?Sized, J: Rng + ?Sized>(
        &self,
        gauss: &mut G,
        jumps: &mut J,
        sign: f64,
    ) -> f64 {
        let mut inc = self.drift;
        if self.gauss_sd > 0.0 {
            let z: f64 = gauss.sample(StandardNormal);
            inc += self.gauss_sd * sign * z;
        }
        for (h, pois) in &self.atoms {
            let k = pois.sample(jumps);
            if k > 0.0 {
                inc += h * k;
            }
        }
        for p in &self.nig {
            let s = sample_inverse_gaussian(p.mean, p.shape, jumps);
            let z: f64 = jumps.sample(StandardNormal);
            inc += p.vartheta * s + p.scale * s.sqrt() * z;
        }
        inc
    }
}

/// One increment `L_{t+dt} - L_t` drawn from a single generator.
pub fn sample_levy_increment<R: Rng + ?Sized>(model: &LevyTriplet, dt: f64, rng: &mut R) -> f64 {
    assert!(dt > 0.0, "dt must be positive");
    let sampler = IncrementSampler::new(model, dt);
    let mut jumps = rand_chacha::ChaCha8Rng::seed_from_u64(rng.random());
    sampler.sample(rng, &mut jumps, 1.0)
}
