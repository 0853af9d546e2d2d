use super::solution::{RestrictedSolution, UnrestrictedSolution, ValueFunction};

/// How the residual checks obtain `V'` and `V''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivatives {
    ClosedForm,
    /// Central differences with step `h`; requires `x >= h`.
    FiniteDifference {
        h: f64,
    },
}

fn derivatives(vf: &dyn ValueFunction, x: f64, mode: Derivatives) -> (f64, f64, f64) {
    let v = vf.value_unchecked(x);
    match mode {
        Derivatives::ClosedForm => (
            v,
            vf.first_derivative_unchecked(x),
            vf.second_derivative_unchecked(x),
        ),
        Derivatives::FiniteDifference { h } => {
            let up = vf.value_unchecked(x + h);
            let down = vf.value_unchecked(x - h);
            (v, (up - down) / (2.0 * h), (up - 2.0 * v + down) / (h * h))
        }
    }
}

/// `μF' + σ²F''/2 - βF + sup_{u∈[0,ξ]} u(1 - F')`.
pub fn hjb_residual_restricted(sol: &RestrictedSolution, x: f64, mode: Derivatives) -> f64 {
    let spec = sol.spec;
    let (v, d1, d2) = derivatives(sol, x, mode);
    let payout = (sol.xi() * (1.0 - d1)).max(0.0);
    spec.mu * d1 + 0.5 * spec.sigma * spec.sigma * d2 - spec.beta * v + payout
}

/// Both bracket terms of `max{μG' + σ²G''/2 - βG, 1 - G'} = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnrestrictedResidual {
    pub ode: f64,
    pub gradient: f64,
}

impl UnrestrictedResidual {
    pub fn max(&self) -> f64 {
        self.ode.max(self.gradient)
    }
}

pub fn hjb_residual_unrestricted(
    sol: &UnrestrictedSolution,
    x: f64,
    mode: Derivatives,
) -> UnrestrictedResidual {
    let spec = sol.spec;
    let (v, d1, d2) = derivatives(sol, x, mode);
    UnrestrictedResidual {
        ode: spec.mu * d1 + 0.5 * spec.sigma * spec.sigma * d2 - spec.beta * v,
        gradient: 1.0 - d1,
    }
}
