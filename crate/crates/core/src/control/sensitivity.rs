use super::solution::{restricted_solution, unrestricted_solution, RestrictedCase};
use super::ProblemSpec;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityRow {
    pub beta: f64,
    /// 0 in the always-pay-max case.
    pub x_r: f64,
    pub restricted_case: RestrictedCase,
    pub x_u: f64,
}

/// Optimal barriers as functions of the effective rate, with `μ, σ, ξ` fixed.
pub fn sensitivity_scan(
    mu: f64,
    sigma: f64,
    xi: f64,
    betas: &[f64],
) -> Result<Vec<SensitivityRow>> {
    if betas.iter().any(|&y| !(y.is_finite() && y > 0.0)) {
        return Err(invalid("beta_grid", "all values must be positive"));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("beta_grid", "must be strictly increasing"));
    }
    betas
        .iter()
        .map(|&y| {
            let r = restricted_solution(&ProblemSpec::restricted(mu, sigma, y, xi)?)?;
            let u = unrestricted_solution(&ProblemSpec::unrestricted(mu, sigma, y)?)?;
            Ok(SensitivityRow {
                beta: y,
                x_r: r.x_r,
                restricted_case: r.case,
                x_u: u.x_u,
            })
        })
        .collect()
}

/// Strict decrease of `x_u` over all rows and of `x_r` over threshold rows.
pub fn strictly_decreasing(rows: &[SensitivityRow]) -> bool {
    let xu_ok = rows.windows(2).all(|w| w[1].x_u < w[0].x_u);
    let threshold: Vec<f64> = rows
        .iter()
        .filter(|r| r.restricted_case == RestrictedCase::Threshold)
        .map(|r| r.x_r)
        .collect();
    xu_ok && threshold.windows(2).all(|w| w[1] < w[0])
}
