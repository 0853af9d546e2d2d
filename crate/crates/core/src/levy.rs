//! Log-exchange-rate Lévy process and the artificial preference rate.
//!
//! The exchange rate is `exp(L_t)` with `L` a Lévy process described by its
//! triplet `(A, ν, γ)`. Dividends are discounted by `exp(-δt - L_t)`, and
//! `E[exp(-δt - (L_t - L_0))] = exp(-βt)` defines the effective rate β used by
//! the control layer.
//!
//! The jump measure ν is a finite sum of atoms plus named parametric families.
//! The compensator uses the truncation `1{|h| <= 1}`.

use crate::error::{invalid, Error, Result};

/// A single jump height carrying Poisson intensity `intensity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub height: f64,
    pub intensity: f64,
}

impl Atom {
    pub fn new(height: f64, intensity: f64) -> Result<Self> {
        if !height.is_finite() || height == 0.0 {
            return Err(invalid(
                "atom.height",
                format!("must be finite and nonzero, got {height}"),
            ));
        }
        if !intensity.is_finite() || intensity <= 0.0 {
            return Err(invalid(
                "atom.intensity",
                format!("must be positive, got {intensity}"),
            ));
        }
        Ok(Self { height, intensity })
    }
}

/// Normal inverse Gaussian parameters: Brownian motion with drift `vartheta`
/// and variance rate `s2`, time-changed by an inverse Gaussian subordinator
/// with unit mean rate and variance rate `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigParams {
    pub s2: f64,
    pub vartheta: f64,
    pub kappa: f64,
}

impl NigParams {
    pub fn new(s2: f64, vartheta: f64, kappa: f64) -> Result<Self> {
        if !s2.is_finite() || s2 < 0.0 {
            return Err(invalid("nig.s2", format!("must be >= 0, got {s2}")));
        }
        if !vartheta.is_finite() {
            return Err(invalid("nig.vartheta", "must be finite"));
        }
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(invalid("nig.kappa", format!("must be > 0, got {kappa}")));
        }
        Ok(Self {
            s2,
            vartheta,
            kappa,
        })
    }

    /// `1 - s2·κ + 2ϑκ`; the exponential moment `E[e^{-L}]` exists iff this is >= 0.
    pub fn moment_discriminant(&self) -> f64 {
        1.0 - self.s2 * self.kappa + 2.0 * self.vartheta * self.kappa
    }

    /// `(1/κ)(1 - sqrt(1 - s2·κ + 2ϑκ))`, or `None` when the moment diverges.
    pub fn unit_exponent(&self) -> Option<f64> {
        let disc = self.moment_discriminant();
        if disc < 0.0 {
            return None;
        }
        // 1 - sqrt(d) = (1 - d) / (1 + sqrt(d)) avoids cancellation for small κ.
        Some((1.0 - disc) / (1.0 + disc.sqrt()) / self.kappa)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpComponent {
    DiscreteAtoms(Vec<Atom>),
    NormalInverseGaussian(NigParams),
}

impl JumpComponent {
    fn name(&self) -> &'static str {
        match self {
            JumpComponent::DiscreteAtoms(_) => "discrete_atoms",
            JumpComponent::NormalInverseGaussian(_) => "normal_inverse_gaussian",
        }
    }
}

/// Lévy–Khintchine triplet of the log exchange rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    /// Gaussian variance rate `A`.
    pub gaussian_variance: f64,
    pub jumps: Vec<JumpComponent>,
    /// Truncated drift `γ`.
    pub gamma: f64,
}

impl LevyTriplet {
    pub fn new(gaussian_variance: f64, jumps: Vec<JumpComponent>, gamma: f64) -> Result<Self> {
        if !gaussian_variance.is_finite() || gaussian_variance < 0.0 {
            return Err(invalid(
                "fx.A",
                format!("must be >= 0, got {gaussian_variance}"),
            ));
        }
        if !gamma.is_finite() {
            return Err(invalid("fx.gamma", "must be finite"));
        }
        Ok(Self {
            gaussian_variance,
            jumps,
            gamma,
        })
    }

    /// Deterministic zero process: `L ≡ 0`.
    pub fn zero() -> Self {
        Self {
            gaussian_variance: 0.0,
            jumps: Vec::new(),
            gamma: 0.0,
        }
    }

    /// Triplet of the pathwise model `L_t = sqrt(A)·B_t + Σ jumps` with no drift
    /// term. Small atoms need `γ = Σ_{|h|<=1} λ h` to undo the compensator.
    pub fn driftless(gaussian_variance: f64, jumps: Vec<JumpComponent>) -> Result<Self> {
        let gamma = small_jump_mean(&jumps);
        Self::new(gaussian_variance, jumps, gamma)
    }

    /// Drift of the Gaussian part in the pathwise decomposition
    /// `L_t = b t + sqrt(A) B_t + Σ h N^h_t + NIG_t`.
    pub fn pathwise_drift(&self) -> f64 {
        self.gamma - small_jump_mean(&self.jumps)
    }

    /// `E[L_1]`.
    pub fn mean(&self) -> f64 {
        let mut m = self.pathwise_drift();
        for c in &self.jumps {
            match c {
                JumpComponent::DiscreteAtoms(atoms) => {
                    m += atoms.iter().map(|a| a.intensity * a.height).sum::<f64>();
                }
                JumpComponent::NormalInverseGaussian(p) => m += p.vartheta,
            }
        }
        m
    }

    /// `Var[L_1]`.
    pub fn variance(&self) -> f64 {
        let mut v = self.gaussian_variance;
        for c in &self.jumps {
            match c {
                JumpComponent::DiscreteAtoms(atoms) => {
                    v += atoms
                        .iter()
                        .map(|a| a.intensity * a.height * a.height)
                        .sum::<f64>();
                }
                JumpComponent::NormalInverseGaussian(p) => {
                    v += p.s2 + p.vartheta * p.vartheta * p.kappa;
                }
            }
        }
        v
    }

    /// `ln E[e^{-L_1}]` of the process law: the Laplace exponent at `-1`.
    ///
    /// Computed from the pathwise decomposition, independently of [`beta`].
    /// For atoms and the Gaussian part `δ - ln E[e^{-L_1}]` equals `beta`. For
    /// NIG components it does not: `beta` adds the closed-form NIG term while
    /// the process law contributes it with the opposite sign.
    pub fn neg_unit_exponent(&self) -> Option<f64> {
        let mut e = 0.5 * self.gaussian_variance - self.pathwise_drift();
        for c in &self.jumps {
            match c {
                JumpComponent::DiscreteAtoms(atoms) => {
                    e += atoms
                        .iter()
                        .map(|a| a.intensity * (-a.height).exp_m1())
                        .sum::<f64>();
                }
                JumpComponent::NormalInverseGaussian(p) => e += p.unit_exponent()?,
            }
        }
        Some(e)
    }
}

fn small_jump_mean(jumps: &[JumpComponent]) -> f64 {
    jumps
        .iter()
        .filter_map(|c| match c {
            JumpComponent::DiscreteAtoms(atoms) => Some(atoms),
            _ => None,
        })
        .flatten()
        .filter(|a| a.height.abs() <= 1.0)
        .map(|a| a.intensity * a.height)
        .sum()
}

/// Artificial preference rate; `MinusInfinity` when `E[e^{-L_1}]` diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaValue {
    Finite(f64),
    MinusInfinity,
}

impl BetaValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            BetaValue::Finite(b) => Some(b),
            BetaValue::MinusInfinity => None,
        }
    }
}

impl std::fmt::Display for BetaValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BetaValue::Finite(b) => write!(f, "{b}"),
            BetaValue::MinusInfinity => f.write_str("-inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaResult {
    pub value: BetaValue,
    /// Whether `∫_{-∞}^{-1} e^{-h} ν(dh) < ∞`.
    pub integrable: bool,
}

impl BetaResult {
    pub fn is_well_posed(&self) -> bool {
        is_well_posed(self)
    }
}

/// `∫ (e^{-h} - 1 + h·1{|h|<=1}) ν(dh)` for atomic jump measures.
///
/// Finite atom sets always integrate. Parametric families are rejected.
pub fn compensator_integral(jumps: &[JumpComponent]) -> Result<f64> {
    let mut total = 0.0;
    for c in jumps {
        match c {
            JumpComponent::DiscreteAtoms(atoms) => {
                for a in atoms {
                    let h = a.height;
                    let trunc = if h.abs() <= 1.0 { h } else { 0.0 };
                    total += a.intensity * ((-h).exp_m1() + trunc);
                }
            }
            other => return Err(Error::UnsupportedComponent(other.name())),
        }
    }
    Ok(total)
}

/// `β = δ - A/2 - ∫(e^{-h} - 1 + h 1{|h|<=1}) ν(dh) + γ`, with each NIG
/// component contributing `(1/κ)(1 - sqrt(1 - s2 κ + 2ϑκ))`.
pub fn beta(triplet: &LevyTriplet, delta: f64) -> Result<BetaResult> {
    let mut atoms = Vec::new();
    let mut nig_total = 0.0;
    let mut integrable = true;
    for c in &triplet.jumps {
        match c {
            JumpComponent::DiscreteAtoms(_) => atoms.push(c.clone()),
            JumpComponent::NormalInverseGaussian(p) => match p.unit_exponent() {
                Some(e) => nig_total += e,
                None => integrable = false,
            },
        }
    }
    let comp = compensator_integral(&atoms)?;
    if !integrable {
        return Ok(BetaResult {
            value: BetaValue::MinusInfinity,
            integrable,
        });
    }
    let b = delta - 0.5 * triplet.gaussian_variance - comp + triplet.gamma + nig_total;
    Ok(BetaResult {
        value: BetaValue::Finite(b),
        integrable,
    })
}

/// The control problem has finite value iff β is finite and strictly positive.
pub fn is_well_posed(b: &BetaResult) -> bool {
    matches!(b.value, BetaValue::Finite(v) if v > 0.0)
}

/// Exchange-rate models shipped as presets.
pub mod presets {
    use super::*;

    /// `L = sqrt(1/2)·B + ln(5)·N¹ - ln(5/4)·N²` with unit-intensity Poisson
    /// processes; preference rate `δ = -1/4`, giving `β = 1/20`.
    pub fn bsp1() -> (LevyTriplet, f64) {
        let atoms = vec![
            Atom::new(5f64.ln(), 1.0).unwrap(),
            Atom::new(-(1.25f64.ln()), 1.0).unwrap(),
        ];
        let t = LevyTriplet::driftless(0.5, vec![JumpComponent::DiscreteAtoms(atoms)]).unwrap();
        (t, -0.25)
    }

    /// NIG exchange rate `(s2, ϑ, κ) = (0.19, 0, 1)` with `δ = 0.5`.
    pub fn bsp2() -> (LevyTriplet, f64) {
        let nig = NigParams::new(0.19, 0.0, 1.0).unwrap();
        let t =
            LevyTriplet::new(0.0, vec![JumpComponent::NormalInverseGaussian(nig)], 0.0).unwrap();
        (t, 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atoms(list: &[(f64, f64)]) -> Vec<JumpComponent> {
        vec![JumpComponent::DiscreteAtoms(
            list.iter()
                .map(|&(h, l)| Atom::new(h, l).unwrap())
                .collect(),
        )]
    }

    #[test]
    fn compensator_two_atom_example() {
        let j = atoms(&[(5f64.ln(), 1.0), (-(1.25f64.ln()), 1.0)]);
        let expected = (0.2 - 1.0) + (1.25 - 1.0 - 1.25f64.ln());
        let got = compensator_integral(&j).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - (-0.77314)).abs() < 1e-5);
    }

    #[test]
    fn compensator_empty_and_large_negative_atom() {
        assert_eq!(compensator_integral(&[]).unwrap(), 0.0);
        let got = compensator_integral(&atoms(&[(-2.0, 1.0)])).unwrap();
        assert!((got - (2f64.exp() - 1.0)).abs() < 1e-12);
        assert!((got - 6.389056).abs() < 1e-6);
    }

    #[test]
    fn compensator_rejects_nig() {
        let j = vec![JumpComponent::NormalInverseGaussian(
            NigParams::new(0.1, 0.0, 1.0).unwrap(),
        )];
        assert!(matches!(
            compensator_integral(&j),
            Err(Error::UnsupportedComponent(_))
        ));
    }

    #[test]
    fn beta_bsp1() {
        let (t, delta) = presets::bsp1();
        let b = beta(&t, delta).unwrap();
        assert!(b.integrable);
        assert!((b.value.finite().unwrap() - 0.05).abs() < 1e-12);
        assert!(is_well_posed(&b));
    }

    #[test]
    fn beta_bsp2() {
        let (t, delta) = presets::bsp2();
        let b = beta(&t, delta).unwrap();
        assert!((b.value.finite().unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn beta_zero_triplet_is_delta() {
        let b = beta(&LevyTriplet::zero(), 0.3).unwrap();
        assert_eq!(b.value, BetaValue::Finite(0.3));
    }

    #[test]
    fn nig_divergent_moment_gives_minus_infinity() {
        let nig = NigParams::new(2.0, 0.0, 1.0).unwrap();
        let t =
            LevyTriplet::new(0.0, vec![JumpComponent::NormalInverseGaussian(nig)], 0.0).unwrap();
        let b = beta(&t, 10.0).unwrap();
        assert_eq!(b.value, BetaValue::MinusInfinity);
        assert!(!b.integrable);
        assert!(!is_well_posed(&b));
    }

    #[test]
    fn well_posed_boundary() {
        let zero = BetaResult {
            value: BetaValue::Finite(0.0),
            integrable: true,
        };
        assert!(!is_well_posed(&zero));
        let pos = BetaResult {
            value: BetaValue::Finite(0.05),
            integrable: true,
        };
        assert!(is_well_posed(&pos));
    }

    #[test]
    fn nig_small_kappa_limit() {
        let p = NigParams::new(0.3, 0.1, 1e-8).unwrap();
        let e = p.unit_exponent().unwrap();
        assert!((e - (0.3 / 2.0 - 0.1)).abs() < 1e-6);
    }

    #[test]
    fn bsp1_two_routes_agree() {
        let (t, delta) = presets::bsp1();
        let via_triplet = beta(&t, delta).unwrap().value.finite().unwrap();
        // δ - A/2 - Σ λ (e^{-h} - 1); γ and truncation cancel for driftless models.
        let closed = delta - 0.25 - ((0.2 - 1.0) + (1.25 - 1.0));
        assert!((via_triplet - closed).abs() < 1e-12);
        assert!((delta - t.neg_unit_exponent().unwrap() - via_triplet).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(Atom::new(0.0, 1.0).is_err());
        assert!(Atom::new(1.0, 0.0).is_err());
        assert!(NigParams::new(0.1, 0.0, 0.0).is_err());
        assert!(LevyTriplet::new(-0.1, vec![], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn beta_affine_in_delta(
            d1 in -5.0f64..5.0, d2 in -5.0f64..5.0,
            h1 in -3.0f64..3.0, l1 in 0.01f64..3.0,
            a in 0.0f64..2.0,
        ) {
            prop_assume!(h1.abs() > 1e-6);
            let t = LevyTriplet::driftless(a, atoms(&[(h1, l1)])).unwrap();
            let b1 = beta(&t, d1).unwrap().value.finite().unwrap();
            let b2 = beta(&t, d2).unwrap().value.finite().unwrap();
            prop_assert!(((b2 - b1) - (d2 - d1)).abs() < 1e-12);
        }

        #[test]
        fn symmetric_small_pair_nonnegative(h in -1.0f64..1.0, lam in 0.01f64..5.0) {
            prop_assume!(h != 0.0);
            let c = compensator_integral(&atoms(&[(h, lam), (-h, lam)])).unwrap();
            let expected = lam * ((-h).exp() + h.exp() - 2.0);
            prop_assert!((c - expected).abs() < 1e-12 * (1.0 + expected.abs()));
            prop_assert!(c > 0.0);
        }
    }
}
