use super::{PayoutMode, ProblemSpec};
use crate::error::{Error, Result};

/// Roots of `σ²y²/2 + (μ - u)y - β = 0` for `u = 0` (θ > 0 > ζ) and, in the
/// restricted case, the negative root η for `u = ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConstants {
    pub theta: f64,
    pub zeta: f64,
    pub eta: Option<f64>,
}

/// Positive and negative roots of `σ²y²/2 + b·y - β = 0`, evaluated without
/// cancellation.
pub(crate) fn quadratic_roots(b: f64, sigma: f64, beta: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    let disc = (b * b + 2.0 * beta * s2).sqrt();
    if b >= 0.0 {
        let neg = (-b - disc) / s2;
        (-2.0 * beta / (s2 * neg), neg)
    } else {
        let pos = (-b + disc) / s2;
        (pos, -2.0 * beta / (s2 * pos))
    }
}

pub fn root_constants(spec: &ProblemSpec) -> Result<RootConstants> {
    if spec.beta.is_nan() || spec.beta <= 0.0 {
        return Err(Error::IllPosed(spec.beta.to_string()));
    }
    let (theta, zeta) = quadratic_roots(spec.mu, spec.sigma, spec.beta);
    let eta = match spec.mode {
        PayoutMode::Restricted { xi } => {
            Some(quadratic_roots(spec.mu - xi, spec.sigma, spec.beta).1)
        }
        PayoutMode::Unrestricted => None,
    };
    Ok(RootConstants { theta, zeta, eta })
}
