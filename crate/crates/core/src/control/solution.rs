use super::roots::{root_constants, RootConstants};
use super::{PayoutMode, ProblemSpec};
use crate::error::{Error, Result};

/// Closed-form value function of one payout mode, with its first two
/// derivatives in `x`.
pub trait ValueFunction {
    fn spec(&self) -> &ProblemSpec;
    /// Level above which dividends are paid.
    fn barrier(&self) -> f64;
    fn value_unchecked(&self, x: f64) -> f64;
    fn first_derivative_unchecked(&self, x: f64) -> f64;
    fn second_derivative_unchecked(&self, x: f64) -> f64;

    fn value(&self, x: f64) -> Result<f64> {
        check_surplus(x)?;
        Ok(self.value_unchecked(x))
    }

    fn first_derivative(&self, x: f64) -> Result<f64> {
        check_surplus(x)?;
        Ok(self.first_derivative_unchecked(x))
    }

    fn second_derivative(&self, x: f64) -> Result<f64> {
        check_surplus(x)?;
        Ok(self.second_derivative_unchecked(x))
    }
}

fn check_surplus(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeSurplus(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictedCase {
    /// `β >= -ξη`: paying `ξ` at every positive surplus is optimal.
    AlwaysPayMax,
    /// `β < -ξη`: pay `ξ` strictly above `x_r`.
    Threshold,
}

impl RestrictedCase {
    pub fn name(&self) -> &'static str {
        match self {
            RestrictedCase::AlwaysPayMax => "always_pay_max",
            RestrictedCase::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedSolution {
    pub spec: ProblemSpec,
    pub case: RestrictedCase,
    pub x_r: f64,
    pub constants: RootConstants,
    /// `θe^{θx_r} - ζe^{ζx_r}`; unused in the always-pay-max case.
    pub normalizer: f64,
    xi: f64,
    eta: f64,
    /// `F = left·(e^{θx} - e^{ζx})` below the barrier,
    /// `ξ/β + right·e^{η(x - x_r)}` above it.
    left: f64,
    right: f64,
}

impl RestrictedSolution {
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Return function of the threshold strategy with an arbitrary barrier:
    /// the same two branches, pasted in value and slope at `barrier`. Only the
    /// optimal barrier also pastes the second derivative and solves the HJB
    /// equation.
    pub fn with_barrier(spec: &ProblemSpec, barrier: f64) -> Result<Self> {
        let mut sol = restricted_solution(spec)?;
        let RootConstants { theta, zeta, .. } = sol.constants;
        let n = normalizer(&sol.constants, barrier);
        let level = (theta * barrier).exp() - (zeta * barrier).exp();
        let left = sol.xi / spec.beta / (level - n / sol.eta);
        sol.case = RestrictedCase::Threshold;
        sol.x_r = barrier;
        sol.normalizer = n;
        sol.left = left;
        sol.right = left * n / sol.eta;
        Ok(sol)
    }
}

fn normalizer(c: &RootConstants, b: f64) -> f64 {
    c.theta * (c.theta * b).exp() - c.zeta * (c.zeta * b).exp()
}

pub fn restricted_solution(spec: &ProblemSpec) -> Result<RestrictedSolution> {
    let PayoutMode::Restricted { xi } = spec.mode else {
        return Err(Error::ModeMismatch {
            expected: "restricted",
        });
    };
    let constants = root_constants(spec)?;
    let (theta, zeta) = (constants.theta, constants.zeta);
    let eta = constants.eta.expect("restricted mode computes eta");
    if spec.beta >= -xi * eta {
        return Ok(RestrictedSolution {
            spec: *spec,
            case: RestrictedCase::AlwaysPayMax,
            x_r: 0.0,
            constants,
            normalizer: f64::NAN,
            xi,
            eta,
            left: f64::NAN,
            right: f64::NAN,
        });
    }
    let ratio = (zeta * (zeta - eta)) / (theta * (theta - eta));
    let x_r = ratio.ln() / (theta - zeta);
    let normalizer = normalizer(&constants, x_r);
    Ok(RestrictedSolution {
        spec: *spec,
        case: RestrictedCase::Threshold,
        x_r,
        constants,
        normalizer,
        xi,
        eta,
        left: 1.0 / normalizer,
        right: 1.0 / eta,
    })
}

impl ValueFunction for RestrictedSolution {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn barrier(&self) -> f64 {
        self.x_r
    }

    fn value_unchecked(&self, x: f64) -> f64 {
        let RootConstants { theta, zeta, .. } = self.constants;
        let cap = self.xi / self.spec.beta;
        match self.case {
            RestrictedCase::AlwaysPayMax => -cap * (self.eta * x).exp_m1(),
            RestrictedCase::Threshold if x <= self.x_r => {
                self.left * ((theta * x).exp() - (zeta * x).exp())
            }
            RestrictedCase::Threshold => cap + self.right * (self.eta * (x - self.x_r)).exp(),
        }
    }

    fn first_derivative_unchecked(&self, x: f64) -> f64 {
        let RootConstants { theta, zeta, .. } = self.constants;
        match self.case {
            RestrictedCase::AlwaysPayMax => {
                -self.xi / self.spec.beta * self.eta * (self.eta * x).exp()
            }
            RestrictedCase::Threshold if x <= self.x_r => {
                self.left * (theta * (theta * x).exp() - zeta * (zeta * x).exp())
            }
            RestrictedCase::Threshold => self.right * self.eta * (self.eta * (x - self.x_r)).exp(),
        }
    }

    fn second_derivative_unchecked(&self, x: f64) -> f64 {
        let RootConstants { theta, zeta, .. } = self.constants;
        match self.case {
            RestrictedCase::AlwaysPayMax => {
                -self.xi / self.spec.beta * self.eta * self.eta * (self.eta * x).exp()
            }
            RestrictedCase::Threshold if x <= self.x_r => {
                self.left * (theta * theta * (theta * x).exp() - zeta * zeta * (zeta * x).exp())
            }
            RestrictedCase::Threshold => {
                self.right * self.eta * self.eta * (self.eta * (x - self.x_r)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnrestrictedSolution {
    pub spec: ProblemSpec,
    pub x_u: f64,
    pub constants: RootConstants,
    /// `θe^{θx_u} - ζe^{ζx_u}`.
    pub normalizer: f64,
    /// Value at the barrier; `μ/β` at the optimum.
    top: f64,
}

impl UnrestrictedSolution {
    /// Return function of reflection at an arbitrary barrier (unit slope at
    /// the barrier, linear above). Only the optimal barrier has `G'' = 0`
    /// there and solves the HJB equation.
    pub fn with_barrier(spec: &ProblemSpec, barrier: f64) -> Result<Self> {
        let mut sol = unrestricted_solution(spec)?;
        let RootConstants { theta, zeta, .. } = sol.constants;
        sol.x_u = barrier;
        sol.normalizer = normalizer(&sol.constants, barrier);
        sol.top = ((theta * barrier).exp() - (zeta * barrier).exp()) / sol.normalizer;
        Ok(sol)
    }
}

/// Accepts either mode; the payout cap is irrelevant here.
pub fn unrestricted_solution(spec: &ProblemSpec) -> Result<UnrestrictedSolution> {
    let spec = spec.with_mode(PayoutMode::Unrestricted)?;
    let constants = root_constants(&spec)?;
    let (theta, zeta) = (constants.theta, constants.zeta);
    let x_u = 2.0 * (zeta.abs() / theta).ln() / (theta - zeta);
    Ok(UnrestrictedSolution {
        spec,
        x_u,
        constants,
        normalizer: normalizer(&constants, x_u),
        top: spec.mu / spec.beta,
    })
}

impl ValueFunction for UnrestrictedSolution {
    fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn barrier(&self) -> f64 {
        self.x_u
    }

    fn value_unchecked(&self, x: f64) -> f64 {
        let RootConstants { theta, zeta, .. } = self.constants;
        if x <= self.x_u {
            ((theta * x).exp() - (zeta * x).exp()) / self.normalizer
        } else {
            self.top + x - self.x_u
        }
    }

    fn first_derivative_unchecked(&self, x: f64) -> f64 {
        let RootConstants { theta, zeta, .. } = self.constants;
        if x <= self.x_u {
            (theta * (theta * x).exp() - zeta * (zeta * x).exp()) / self.normalizer
        } else {
            1.0
        }
    }

    fn second_derivative_unchecked(&self, x: f64) -> f64 {
        let RootConstants { theta, zeta, .. } = self.constants;
        if x <= self.x_u {
            (theta * theta * (theta * x).exp() - zeta * zeta * (zeta * x).exp()) / self.normalizer
        } else {
            0.0
        }
    }
}

/// Either solution, for callers that dispatch on the payout mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solution {
    Restricted(RestrictedSolution),
    Unrestricted(UnrestrictedSolution),
}

impl Solution {
    pub fn solve(spec: &ProblemSpec) -> Result<Self> {
        Ok(match spec.mode {
            PayoutMode::Restricted { .. } => Solution::Restricted(restricted_solution(spec)?),
            PayoutMode::Unrestricted => Solution::Unrestricted(unrestricted_solution(spec)?),
        })
    }

    pub fn as_value_function(&self) -> &dyn ValueFunction {
        match self {
            Solution::Restricted(s) => s,
            Solution::Unrestricted(s) => s,
        }
    }
}

/// `V(l, x) = e^{-l} V(0, x)`.
pub fn eval_value_full(l: f64, x: f64, sol: &dyn ValueFunction) -> Result<f64> {
    Ok((-l).exp() * sol.value(x)?)
}

/// Optimal restricted payout rate: `ξ` strictly above the barrier, else 0.
pub fn optimal_rate(sol: &RestrictedSolution, x: f64) -> f64 {
    if x > sol.x_r {
        sol.xi
    } else {
        0.0
    }
}
