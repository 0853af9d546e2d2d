//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! mu = 1.0
//! sigma = 1.0
//! delta = -0.25
//! xi = 1.0
//! mode = "restricted"        # or "unrestricted"
//!
//! [fx]
//! A = 0.5
//! driftless = true           # or: gamma = 0.1
//! atoms = [{ height = 1.6094379124341003, intensity = 1.0 }]
//!
//! [fx.nig]
//! s2 = 0.19
//! vartheta = 0.0
//! kappa = 1.0
//!
//! [sim]
//! dt = 0.005
//! n_paths = 10000
//! seed = 42
//! tail_tol = 0.001
//! antithetic = false
//! bridge_correction = true
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "svg"]
//! ```
//!
//! Every block except `[problem]` may be omitted. A missing `[fx]` block is
//! the zero triplet, so `β = δ`. Without `gamma` or `driftless`, `γ = 0`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::control::{PayoutMode, ProblemSpec};
use crate::levy::{Atom, JumpComponent, LevyTriplet, NigParams};
use crate::montecarlo::SimConfig;

pub const PRESET_BSP1: &str = include_str!("../../presets/bsp1.toml");
pub const PRESET_BSP2: &str = include_str!("../../presets/bsp2.toml");

pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "bsp1" => Some(PRESET_BSP1),
        "bsp2" => Some(PRESET_BSP2),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Restricted,
    Unrestricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    fx: Option<RawFx>,
    sim: Option<RawSim>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    mu: Option<f64>,
    sigma: Option<f64>,
    delta: f64,
    xi: Option<f64>,
    mode: Option<ModeName>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFx {
    #[serde(rename = "A", default)]
    a: f64,
    gamma: Option<f64>,
    driftless: Option<bool>,
    #[serde(default)]
    atoms: Vec<RawAtom>,
    nig: Option<RawNig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    height: f64,
    intensity: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNig {
    s2: f64,
    vartheta: f64,
    kappa: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    n_paths: Option<usize>,
    seed: Option<u64>,
    tail_tol: Option<f64>,
    antithetic: Option<bool>,
    bridge_correction: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    formats: Option<Vec<Format>>,
}

/// Problem block with the fields each subcommand checks for itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemBlock {
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub delta: f64,
    pub xi: Option<f64>,
    pub mode: ModeName,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    pub fx: LevyTriplet,
    pub sim: SimConfig,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

fn field(name: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {reason}"))
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(e.to_string().trim_end().to_owned()))?;
        let p = raw.problem;
        if !p.delta.is_finite() {
            return Err(field("problem.delta", "must be finite"));
        }
        let mode = match (p.mode, p.xi) {
            (Some(m), _) => m,
            (None, Some(_)) => ModeName::Restricted,
            (None, None) => ModeName::Unrestricted,
        };
        if mode == ModeName::Restricted && p.xi.is_none() {
            return Err(field("problem.xi", "required when mode = \"restricted\""));
        }
        let problem = ProblemBlock {
            mu: p.mu,
            sigma: p.sigma,
            delta: p.delta,
            xi: p.xi,
            mode,
        };

        let fx = match raw.fx {
            None => LevyTriplet::zero(),
            Some(fx) => build_triplet(fx)?,
        };

        let s = raw.sim.unwrap_or_default();
        let d = SimConfig::default();
        let sim = SimConfig {
            dt: s.dt.unwrap_or(d.dt),
            n_paths: s.n_paths.unwrap_or(d.n_paths),
            seed: s.seed.unwrap_or(d.seed),
            tail_tol: s.tail_tol.unwrap_or(d.tail_tol),
            antithetic: s.antithetic.unwrap_or(d.antithetic),
            bridge_correction: s.bridge_correction.unwrap_or(d.bridge_correction),
        };

        let o = raw.output.unwrap_or_default();
        Ok(RunConfig {
            problem,
            fx,
            sim,
            directory: o.directory.unwrap_or_else(|| PathBuf::from(".")),
            formats: o.formats.unwrap_or_else(|| vec![Format::Csv]),
        })
    }

    pub fn payout_mode(&self) -> Result<PayoutMode, CliError> {
        match self.problem.mode {
            ModeName::Unrestricted => Ok(PayoutMode::Unrestricted),
            ModeName::Restricted => {
                let xi = self
                    .problem
                    .xi
                    .ok_or_else(|| field("problem.xi", "required when mode = \"restricted\""))?;
                Ok(PayoutMode::Restricted { xi })
            }
        }
    }

    pub fn mu_sigma(&self) -> Result<(f64, f64), CliError> {
        let mu = self
            .problem
            .mu
            .ok_or_else(|| field("problem.mu", "missing"))?;
        let sigma = self
            .problem
            .sigma
            .ok_or_else(|| field("problem.sigma", "missing"))?;
        Ok((mu, sigma))
    }

    /// Control problem with `β` computed from `δ` and the exchange-rate model.
    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        let (mu, sigma) = self.mu_sigma()?;
        Ok(ProblemSpec::from_triplet(
            mu,
            sigma,
            self.problem.delta,
            self.payout_mode()?,
            &self.fx,
        )?)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn build_triplet(fx: RawFx) -> Result<LevyTriplet, CliError> {
    let mut jumps = Vec::new();
    if !fx.atoms.is_empty() {
        let atoms = fx
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                Atom::new(a.height, a.intensity).map_err(|e| field(&format!("fx.atoms[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        jumps.push(JumpComponent::DiscreteAtoms(atoms));
    }
    if let Some(n) = fx.nig {
        let nig = NigParams::new(n.s2, n.vartheta, n.kappa).map_err(|e| field("fx.nig", e))?;
        jumps.push(JumpComponent::NormalInverseGaussian(nig));
    }
    let triplet = match (fx.gamma, fx.driftless) {
        (Some(_), Some(true)) => return Err(field("fx.gamma", "conflicts with driftless = true")),
        (_, Some(true)) => LevyTriplet::driftless(fx.a, jumps),
        (gamma, _) => LevyTriplet::new(fx.a, jumps, gamma.unwrap_or(0.0)),
    };
    triplet.map_err(|e| field("fx", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in ["bsp1", "bsp2"] {
            let cfg = RunConfig::parse(preset(name).unwrap()).unwrap();
            assert!(cfg.problem_spec().is_ok(), "{name}");
        }
        assert!(preset("bsp3").is_none());
    }

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::parse("[problem]\nmu = 1\nsigma = 1\ndelta = 0.5\n").unwrap();
        assert_eq!(cfg.fx, LevyTriplet::zero());
        assert_eq!(cfg.problem.mode, ModeName::Unrestricted);
        assert_eq!(cfg.sim, SimConfig::default());
        assert_eq!(cfg.problem_spec().unwrap().beta, 0.5);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = RunConfig::parse("[problem]\nmu = 1\ndelta = 0.5\nsgima = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("sgima") && err.contains("line 4"), "{err}");
        let err = RunConfig::parse(
            "[problem]\ndelta = 0.5\n[fx]\natoms = [{ height = 1, intensity = -2 }]\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("fx.atoms[0]"), "{err}");
        let err = RunConfig::parse("[problem]\ndelta = 0.5\nmode = \"restricted\"\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("problem.xi"), "{err}");
        let err = RunConfig::parse("[problem]\ndelta = 0.5\n[fx]\ngamma = 1\ndriftless = true\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("fx.gamma"), "{err}");
        let cfg = RunConfig::parse("[problem]\ndelta = 0.5\n").unwrap();
        assert!(cfg
            .problem_spec()
            .unwrap_err()
            .to_string()
            .contains("problem.mu"));
    }
}
