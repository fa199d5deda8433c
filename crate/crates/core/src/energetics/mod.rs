//! Interaction energy, free energy and pressures of the sphere-in-cavity
//! system, plus the dilute self-energy and the planar limit.
//!
//! For concentric spheres the round-trip operator is diagonal in
//! (l, m, polarization), so
//!
//! ```text
//! E_int = (1/2pi) int_0^inf dkappa sum_{l,P} (2l+1) ln(1 - T1 T2)
//! ```
//!
//! and the mean pressure on the sphere is `-(1/(4 pi r1^2)) dE_int/dr1`.

mod accumulate;
mod nodes;
mod planar;
mod self_energy;
mod thermal;
mod zero_temperature;

use serde::Serialize;

use crate::error::{require_positive, CasimirError, Result};
use crate::media::{classify_sign, Sign, SignClass, SignGrid, ResponseModel};
use crate::scattering::{Mode, Polarization};

pub use nodes::{mode_summand, static_limit_summand};
pub use planar::{planar_limit_force, PlanarLimit, PlanarRow};
pub use self_energy::{
    dilute_self_energy, dilute_self_energy_gated, dilute_self_free_energy,
    dilute_self_free_energy_gated, self_pressure_crossover, total_pressure, DiluteGate, DiluteValue,
};
pub use thermal::{matsubara_free_energy, matsubara_pressure};
pub use zero_temperature::{interaction_energy, interaction_pressure};

/// Sphere of radius `r1` centred in a cavity of radius `r2` cut into the
/// wall material, with the gap filled by `medium`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geometry {
    pub r1: f64,
    pub r2: f64,
    pub sphere: ResponseModel,
    pub wall: ResponseModel,
    pub medium: ResponseModel,
}

impl Geometry {
    pub fn new(
        r1: f64,
        r2: f64,
        sphere: ResponseModel,
        wall: ResponseModel,
        medium: ResponseModel,
    ) -> Result<Self> {
        let g = Geometry {
            r1,
            r2,
            sphere,
            wall,
            medium,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("r1", self.r1)?;
        require_positive("r2", self.r2)?;
        if self.r1 >= self.r2 {
            return Err(CasimirError::InvalidGeometry(format!(
                "sphere radius r1 = {} must be smaller than cavity radius r2 = {}",
                self.r1, self.r2
            )));
        }
        for m in [&self.sphere, &self.wall, &self.medium] {
            m.validate()?;
        }
        if !self.medium.is_homogeneous() || self.medium.is_magnetic() {
            return Err(CasimirError::InvalidModel(
                "the gap medium must be homogeneous and non-magnetic".into(),
            ));
        }
        if !self.wall.is_homogeneous() {
            return Err(CasimirError::InvalidModel(
                "the cavity wall must be homogeneous".into(),
            ));
        }
        if self.sphere.is_magnetic() {
            return Err(CasimirError::InvalidModel(
                "magnetic response is supported for the cavity wall only".into(),
            ));
        }
        if let Some(p) = self.sphere.profile_ref() {
            if (p.radius() - self.r1).abs() > 1e-12 * self.r1 {
                return Err(CasimirError::InvalidGeometry(format!(
                    "profile radius {} does not match r1 = {}",
                    p.radius(),
                    self.r1
                )));
            }
        }
        Ok(())
    }

    pub fn gap(&self) -> f64 {
        self.r2 - self.r1
    }

    /// Same configuration with the sphere radius changed; radial profiles
    /// keep their layer boundaries and move their surface.
    pub fn with_r1(&self, r1: f64) -> Result<Self> {
        let mut g = self.clone();
        g.r1 = r1;
        if let Some(p) = self.sphere.profile_ref() {
            g.sphere = ResponseModel::profile(p.with_radius(r1)?)?;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn sign_class(&self) -> PairSign {
        let d = self.gap();
        let sg = SignGrid::for_body(&self.sphere, d);
        let sphere = classify_sign(&self.sphere, &self.medium, &sg.kappa, &sg.radii);
        let wg = SignGrid::for_body(&self.wall, d);
        let wall = classify_sign(&self.wall, &self.medium, &wg.kappa, &wg.radii);
        let value = sphere.value.times(wall.value);
        PairSign { sphere, wall, value }
    }
}

/// Sign classes of both bodies and their product `s = s1 s2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSign {
    pub sphere: SignClass,
    pub wall: SignClass,
    pub value: Sign,
}

/// Frequency treatment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Frequencies {
    /// Gauss-Legendre in `u` with `kappa = u / ((1 - u) d)`, node count
    /// doubled from `n_kappa` until the relative change is below
    /// `tolerance`.
    ZeroTemperature {
        n_kappa: usize,
        n_kappa_max: usize,
        tolerance: f64,
    },
    /// Matsubara ladder `kappa_n = 2 pi n T`, truncated after three
    /// consecutive terms below `tolerance` of the running total.
    Matsubara {
        temperature: f64,
        n_max: usize,
        tolerance: f64,
    },
}

/// Angular-momentum truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllPolicy {
    pub tolerance: f64,
    pub consecutive: usize,
    pub l_max: usize,
}

impl Default for EllPolicy {
    fn default() -> Self {
        EllPolicy {
            tolerance: 1e-9,
            consecutive: 3,
            l_max: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSpec {
    pub frequencies: Frequencies,
    pub ell: EllPolicy,
    /// Proceed (and report `Undefined`) when the pair's sign class cannot
    /// be certified.
    pub accept_undefined_sign: bool,
}

impl SpectrumSpec {
    pub fn zero_temperature() -> Self {
        SpectrumSpec {
            frequencies: Frequencies::ZeroTemperature {
                n_kappa: 64,
                n_kappa_max: 4096,
                tolerance: 1e-8,
            },
            ell: EllPolicy::default(),
            accept_undefined_sign: false,
        }
    }

    pub fn matsubara(temperature: f64) -> Result<Self> {
        let s = SpectrumSpec {
            frequencies: Frequencies::Matsubara {
                temperature,
                n_max: 100_000,
                tolerance: 1e-9,
            },
            ell: EllPolicy::default(),
            accept_undefined_sign: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.ell.l_max = l_max;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        match &mut self.frequencies {
            Frequencies::ZeroTemperature { tolerance, .. } | Frequencies::Matsubara { tolerance, .. } => {
                *tolerance = tol
            }
        }
        self
    }

    pub fn accepting_undefined_sign(mut self) -> Self {
        self.accept_undefined_sign = true;
        self
    }

    pub fn temperature(&self) -> Option<f64> {
        match self.frequencies {
            Frequencies::Matsubara { temperature, .. } => Some(temperature),
            Frequencies::ZeroTemperature { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.frequencies {
            Frequencies::ZeroTemperature {
                n_kappa,
                n_kappa_max,
                tolerance,
            } => {
                if n_kappa < 8 || n_kappa_max < n_kappa {
                    return Err(CasimirError::InvalidModel(format!(
                        "quadrature needs 8 <= n_kappa <= n_kappa_max (got {n_kappa}, {n_kappa_max})"
                    )));
                }
                require_positive("kappa tolerance", tolerance)?;
            }
            Frequencies::Matsubara {
                temperature,
                n_max,
                tolerance,
            } => {
                require_positive("temperature", temperature)?;
                require_positive("matsubara tolerance", tolerance)?;
                if n_max == 0 {
                    return Err(CasimirError::InvalidModel("n_max must be positive".into()));
                }
            }
        }
        require_positive("ell tolerance", self.ell.tolerance)?;
        if self.ell.consecutive == 0 || self.ell.l_max == 0 {
            return Err(CasimirError::InvalidModel(
                "ell policy needs consecutive >= 1 and l_max >= 1".into(),
            ));
        }
        if self.ell.l_max > crate::specfun::ELL_CAP {
            return Err(CasimirError::Capability {
                ell: self.ell.l_max,
                cap: crate::specfun::ELL_CAP,
            });
        }
        Ok(())
    }
}

/// What an [`EnergyReport`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    InteractionEnergy,
    InteractionPressure,
    FreeEnergy,
    ThermalPressure,
    TotalPressure,
}

impl Quantity {
    pub fn unit(self) -> &'static str {
        match self {
            Quantity::InteractionEnergy | Quantity::FreeEnergy => "1/length",
            _ => "1/length^4",
        }
    }

    pub fn is_pressure(self) -> bool {
        !matches!(self, Quantity::InteractionEnergy | Quantity::FreeEnergy)
    }
}

/// Route used for the pressure derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    FiniteDifference,
    CalogeroAnalytic,
}

/// Contribution of one (l, P) channel, summed over frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeContribution {
    pub ell: usize,
    pub polarization: Polarization,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    /// Relative change at the last quadrature refinement, or the relative
    /// size of the last Matsubara term kept.
    pub frequency_tail: f64,
    /// Largest relative size of the last kept l-term over all frequencies.
    pub ell_tail: f64,
    pub max_product: f64,
    pub min_product: f64,
    /// First-order (single round trip) approximation divided by the full
    /// logarithm, for energies.
    pub first_order_ratio: Option<f64>,
    pub finite_difference: Option<f64>,
    pub analytic: Option<f64>,
    pub self_part: Option<f64>,
    pub interaction_part: Option<f64>,
    /// Share of the zero Matsubara mode in the total.
    pub zero_mode_fraction: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub quantity: Quantity,
    pub value: f64,
    pub unit: &'static str,
    pub per_mode: Vec<ModeContribution>,
    pub l_max_used: usize,
    /// Quadrature nodes, or Matsubara terms, used.
    pub n_kappa_used: usize,
    pub sign_class: PairSign,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

impl EnergyReport {
    pub fn ledger_total(&self) -> f64 {
        crate::sum::neumaier(self.per_mode.iter().map(|m| m.value))
    }

    pub fn mode(&self, mode: Mode) -> Option<f64> {
        self.per_mode
            .iter()
            .find(|m| m.ell == mode.ell() && m.polarization == mode.polarization())
            .map(|m| m.value)
    }
}

pub(crate) fn checked_sign(geo: &Geometry, spec: &SpectrumSpec) -> Result<PairSign> {
    let s = geo.sign_class();
    if !s.value.is_defined() && !spec.accept_undefined_sign {
        return Err(CasimirError::UndefinedSign);
    }
    Ok(s)
}

/// `-(1/(4 pi r1^2)) * dE/dr1`.
pub(crate) fn pressure_from_slope(slope: f64, r1: f64) -> f64 {
    -slope / (4.0 * std::f64::consts::PI * r1 * r1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(e: f64) -> ResponseModel {
        ResponseModel::constant(e).unwrap()
    }

    #[test]
    fn geometry_invariants() {
        assert!(Geometry::new(2.0, 1.0, c(2.0), c(3.0), c(1.0)).is_err());
        assert!(Geometry::new(1.0, 2.0, c(2.0), c(3.0), c(1.0)).is_ok());
        let magnetic_sphere = c(2.0).with_permeability(2.0).unwrap();
        assert!(Geometry::new(1.0, 2.0, magnetic_sphere, c(3.0), c(1.0)).is_err());
    }

    #[test]
    fn pair_sign_is_product() {
        let g = Geometry::new(1.0, 2.0, c(1.2), c(3.0), c(2.0)).unwrap();
        let s = g.sign_class();
        assert_eq!(s.sphere.value, Sign::Minus);
        assert_eq!(s.wall.value, Sign::Plus);
        assert_eq!(s.value, Sign::Minus);
    }

    #[test]
    fn spectrum_validation() {
        assert!(SpectrumSpec::matsubara(0.0).is_err());
        let mut s = SpectrumSpec::zero_temperature();
        s.frequencies = Frequencies::ZeroTemperature {
            n_kappa: 4,
            n_kappa_max: 64,
            tolerance: 1e-8,
        };
        assert!(s.validate().is_err());
    }
}
