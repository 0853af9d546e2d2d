//! Finite-difference policy iteration for the two HJB equations.
//!
//! This solver never evaluates the closed-form value functions or barriers; it
//! discretises the HJB equation on a uniform grid and lets Howard's algorithm
//! choose the bang-bang control (or the active branch of the max-form) node by
//! node. Agreement with the closed forms is an independent check of both.
//!
//! Discretisation: exponentially fitted central differences (Il'in–Allen–
//! Southwell), which keep the matrix an M-matrix for any drift/diffusion ratio
//! and reduce to standard second-order central differences when the grid
//! resolves the boundary layer. `F(0) = 0` on the left. On the right the
//! restricted problem uses the far-field Robin condition
//! `F' = r(F - u/β)` with `r` the decaying characteristic root of the local
//! constant-coefficient ODE; the unrestricted problem uses `G' = 1`.

use super::solution::ValueFunction;
use super::{PayoutMode, ProblemSpec};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// First grid index at which payout is active.
    pub barrier_index: usize,
    pub iterations: usize,
}

impl OracleSolution {
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn barrier(&self) -> f64 {
        self.grid[self.barrier_index]
    }

    /// Sup-norm distance to a value function over the grid nodes.
    pub fn sup_gap(&self, vf: &dyn ValueFunction) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| (vf.value_unchecked(x) - v).abs())
            .fold(0.0, f64::max)
    }

    /// Barrier distance in grid cells.
    pub fn barrier_cells_from(&self, barrier: f64) -> f64 {
        (self.barrier() - barrier).abs() / self.step()
    }
}

const MAX_ITERATIONS: usize = 1000;

/// Residual row `lower·V[i-1] + diag·V[i] + upper·V[i+1] + source`.
#[derive(Debug, Clone, Copy)]
struct Row {
    lower: f64,
    diag: f64,
    upper: f64,
    source: f64,
}

impl Row {
    fn residual(&self, prev: f64, cur: f64, next: f64) -> f64 {
        self.lower * prev + self.diag * cur + self.upper * next + self.source
    }
}

fn fitted_diffusion(a: f64, b: f64, h: f64) -> f64 {
    let rho = b * h / (2.0 * a);
    if rho.abs() < 1e-8 {
        a
    } else {
        a * rho / rho.tanh()
    }
}

/// Row of `a V'' + b V' - βV + u = 0` with `a = σ²/2`, `b = μ - u`.
fn ode_row(spec: &ProblemSpec, u: f64, h: f64) -> Row {
    let a = 0.5 * spec.sigma * spec.sigma;
    let b = spec.mu - u;
    let af = fitted_diffusion(a, b, h);
    Row {
        lower: af / (h * h) - b / (2.0 * h),
        diag: -2.0 * af / (h * h) - spec.beta,
        upper: af / (h * h) + b / (2.0 * h),
        source: u,
    }
}

/// Last-node ODE row with the ghost value eliminated through `V' = r(V - u/β)`.
fn far_field_row(spec: &ProblemSpec, u: f64, h: f64) -> Row {
    let row = ode_row(spec, u, h);
    let s2 = spec.sigma * spec.sigma;
    let b = spec.mu - u;
    let r = (-b - (b * b + 2.0 * spec.beta * s2).sqrt()) / s2;
    Row {
        lower: row.lower + row.upper,
        diag: row.diag + row.upper * 2.0 * h * r,
        upper: 0.0,
        source: row.source - row.upper * 2.0 * h * r * u / spec.beta,
    }
}

/// `1 - (V[i] - V[i-1]) / h`.
fn gradient_row(h: f64) -> Row {
    Row {
        lower: 1.0 / h,
        diag: -1.0 / h,
        upper: 0.0,
        source: 1.0,
    }
}

/// Solves `rows · V = 0` for `V[1..]` with `V[0] = 0` (Thomas algorithm).
fn solve_tridiagonal(rows: &[Row]) -> Vec<f64> {
    let m = rows.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        let r = rows[i];
        let (cp, dp, lower) = if i == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (c[i - 1], d[i - 1], r.lower)
        };
        let denom = r.diag - lower * cp;
        c[i] = r.upper / denom;
        d[i] = (-r.source - lower * dp) / denom;
    }
    let mut v = vec![0.0; m + 1];
    for i in (0..m).rev() {
        let next = if i + 1 < m { v[i + 2] } else { 0.0 };
        v[i + 1] = d[i] - c[i] * next;
    }
    v
}

/// Policy iteration for the restricted (bang-bang rate) or unrestricted
/// (max-form) HJB equation on `[0, x_max]`.
pub fn fd_policy_iteration_oracle(spec: &ProblemSpec, grid: OracleGrid) -> Result<OracleSolution> {
    if grid.n_points < 200 {
        return Err(invalid(
            "grid.n_points",
            format!("must be >= 200, got {}", grid.n_points),
        ));
    }
    if !(grid.x_max.is_finite() && grid.x_max > 0.0) {
        return Err(invalid("grid.x_max", "must be positive"));
    }
    let n = grid.n_points;
    let h = grid.x_max / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();

    // options[i] = (passive row, active row) for unknown i+1
    let last = n - 2;
    let options: Vec<(Row, Row)> = match spec.mode {
        PayoutMode::Restricted { xi } => (0..=last)
            .map(|k| {
                if k == last {
                    (far_field_row(spec, 0.0, h), far_field_row(spec, xi, h))
                } else {
                    (ode_row(spec, 0.0, h), ode_row(spec, xi, h))
                }
            })
            .collect(),
        PayoutMode::Unrestricted => (0..=last)
            .map(|k| {
                if k == last {
                    (gradient_row(h), gradient_row(h))
                } else {
                    (ode_row(spec, 0.0, h), gradient_row(h))
                }
            })
            .collect(),
    };

    let mut active: Vec<bool> = match spec.mode {
        PayoutMode::Restricted { .. } => vec![true; last + 1],
        PayoutMode::Unrestricted => {
            let mut a = vec![false; last + 1];
            a[last] = true;
            a
        }
    };

    for iteration in 1..=MAX_ITERATIONS {
        let rows: Vec<Row> = options
            .iter()
            .zip(&active)
            .map(|(&(p, a), &on)| if on { a } else { p })
            .collect();
        let v = solve_tridiagonal(&rows);

        let mut changed = false;
        for k in 0..=last {
            let i = k + 1;
            let next = if i + 1 < n { v[i + 1] } else { 0.0 };
            let (p, a) = options[k];
            let rp = p.residual(v[i - 1], v[i], next);
            let ra = a.residual(v[i - 1], v[i], next);
            let (cur, other, other_row) = if active[k] { (ra, rp, p) } else { (rp, ra, a) };
            let eps = 1e-11 * other_row.diag.abs() * v[i].abs().max(1.0);
            if other > cur + eps {
                active[k] = !active[k];
                changed = true;
            }
        }
        if !changed {
            let barrier_index = active.iter().position(|&a| a).map_or(n - 1, |k| k + 1);
            return Ok(OracleSolution {
                grid: xs,
                values: v,
                barrier_index,
                iterations: iteration,
            });
        }
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}
