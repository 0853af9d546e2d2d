//! Optimal dividend payout for a Brownian surplus `X_t = x + μt + σW_t`
//! discounted at the effective rate β.
//!
//! Two admissible classes are supported: bounded-rate payout (`u_t ∈ [0, ξ]`)
//! and unrestricted cumulative payout with lump sums. Both have closed-form
//! value functions `F` and `G` with threshold/barrier optimal strategies.

mod hjb;
mod oracle;
mod roots;
mod sensitivity;
mod solution;

pub use hjb::{
    hjb_residual_restricted, hjb_residual_unrestricted, Derivatives, UnrestrictedResidual,
};
pub use oracle::{fd_policy_iteration_oracle, OracleGrid, OracleSolution};
pub use roots::{root_constants, RootConstants};
pub use sensitivity::{sensitivity_scan, strictly_decreasing, SensitivityRow};
pub use solution::{
    eval_value_full, optimal_rate, restricted_solution, unrestricted_solution, RestrictedCase,
    RestrictedSolution, Solution, UnrestrictedSolution, ValueFunction,
};

use crate::error::{invalid, Error, Result};
use crate::levy::{beta, is_well_posed, LevyTriplet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayoutMode {
    /// Absolutely continuous payout at rate at most `xi`.
    Restricted { xi: f64 },
    /// Any nondecreasing adapted payout, lump sums allowed.
    Unrestricted,
}

impl PayoutMode {
    pub fn name(&self) -> &'static str {
        match self {
            PayoutMode::Restricted { .. } => "restricted",
            PayoutMode::Unrestricted => "unrestricted",
        }
    }
}

/// Inputs of the control problem after the exchange rate has been folded
/// into the effective rate `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub mu: f64,
    pub sigma: f64,
    /// Preference rate δ; only the simulator needs it separately from β.
    pub delta: f64,
    pub beta: f64,
    pub mode: PayoutMode,
}

impl ProblemSpec {
    pub fn new(mu: f64, sigma: f64, delta: f64, beta: f64, mode: PayoutMode) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid("problem.mu", format!("must be > 0, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(
                "problem.sigma",
                format!("must be > 0, got {sigma}"),
            ));
        }
        if !delta.is_finite() {
            return Err(invalid("problem.delta", "must be finite"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::IllPosed(beta.to_string()));
        }
        if let PayoutMode::Restricted { xi } = mode {
            if !(xi.is_finite() && xi > 0.0) {
                return Err(invalid("problem.xi", format!("must be > 0, got {xi}")));
            }
        }
        Ok(Self {
            mu,
            sigma,
            delta,
            beta,
            mode,
        })
    }

    /// Restricted problem with zero exchange-rate risk (`δ = β`).
    pub fn restricted(mu: f64, sigma: f64, beta: f64, xi: f64) -> Result<Self> {
        Self::new(mu, sigma, beta, beta, PayoutMode::Restricted { xi })
    }

    /// Unrestricted problem with zero exchange-rate risk (`δ = β`).
    pub fn unrestricted(mu: f64, sigma: f64, beta: f64) -> Result<Self> {
        Self::new(mu, sigma, beta, beta, PayoutMode::Unrestricted)
    }

    /// Builds the problem from a preference rate and an exchange-rate model,
    /// rejecting ill-posed combinations.
    pub fn from_triplet(
        mu: f64,
        sigma: f64,
        delta: f64,
        mode: PayoutMode,
        fx: &LevyTriplet,
    ) -> Result<Self> {
        let b = beta(fx, delta)?;
        if !is_well_posed(&b) {
            return Err(Error::IllPosed(b.value.to_string()));
        }
        Self::new(mu, sigma, delta, b.value.finite().unwrap(), mode)
    }

    pub fn xi(&self) -> Option<f64> {
        match self.mode {
            PayoutMode::Restricted { xi } => Some(xi),
            PayoutMode::Unrestricted => None,
        }
    }

    pub fn with_mode(mut self, mode: PayoutMode) -> Result<Self> {
        self.mode = mode;
        Self::new(self.mu, self.sigma, self.delta, self.beta, self.mode)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.delta, beta, self.mode)
    }
}
