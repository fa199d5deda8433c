//! Electromagnetic response on the imaginary-frequency axis.
//!
//! Natural units throughout (hbar = c = eps0 = mu0 = 1); `kappa` is the
//! imaginary frequency in inverse length. Every model here satisfies
//! eps(i kappa) >= 1, and the dispersive kinds decrease monotonically to 1.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, CasimirError, Result};

/// Homogeneous permittivity models, evaluated at imaginary frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    Constant {
        eps: f64,
    },
    /// eps(i kappa) = 1 + wp^2 / (kappa (kappa + gamma))
    Drude {
        plasma_frequency: f64,
        damping: f64,
    },
    /// eps(i kappa) = 1 + (eps_static - 1) / (1 + kappa^2 / w0^2)
    LorentzOscillator {
        eps_static: f64,
        resonance: f64,
    },
    /// User data, interpolated linearly in (ln kappa, ln eps) and held
    /// constant beyond the table ends.
    Tabulated {
        kappa: Vec<f64>,
        eps: Vec<f64>,
    },
}

impl Dispersion {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CasimirError::InvalidModel(msg));
        match self {
            Dispersion::Constant { eps } => {
                if !(eps.is_finite() && *eps >= 1.0) {
                    return bad(format!("constant permittivity {eps} must be >= 1"));
                }
            }
            Dispersion::Drude {
                plasma_frequency,
                damping,
            } => {
                if !(plasma_frequency.is_finite() && *plasma_frequency >= 0.0) {
                    return bad(format!("plasma frequency {plasma_frequency} must be >= 0"));
                }
                if !(damping.is_finite() && *damping >= 0.0) {
                    return bad(format!("damping {damping} must be >= 0"));
                }
            }
            Dispersion::LorentzOscillator {
                eps_static,
                resonance,
            } => {
                if !(eps_static.is_finite() && *eps_static >= 1.0) {
                    return bad(format!("static permittivity {eps_static} must be >= 1"));
                }
                if !(resonance.is_finite() && *resonance > 0.0) {
                    return bad(format!("resonance frequency {resonance} must be > 0"));
                }
            }
            Dispersion::Tabulated { kappa, eps } => {
                if kappa.len() != eps.len() || kappa.is_empty() {
                    return bad("tabulated model needs equal-length, non-empty columns".into());
                }
                if kappa.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                    return bad("tabulated kappa values must be positive".into());
                }
                if kappa.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated kappa values must be strictly increasing".into());
                }
                if eps.iter().any(|e| !(e.is_finite() && *e >= 1.0)) {
                    return bad("tabulated permittivities must be >= 1".into());
                }
            }
        }
        Ok(())
    }

    /// Unchecked evaluation; `kappa > 0` is the caller's responsibility.
    pub(crate) fn eval(&self, kappa: f64) -> f64 {
        match self {
            Dispersion::Constant { eps } => *eps,
            Dispersion::Drude {
                plasma_frequency,
                damping,
            } => 1.0 + plasma_frequency * plasma_frequency / (kappa * (kappa + damping)),
            Dispersion::LorentzOscillator {
                eps_static,
                resonance,
            } => {
                let ratio = kappa / resonance;
                1.0 + (eps_static - 1.0) / (1.0 + ratio * ratio)
            }
            Dispersion::Tabulated { kappa: ks, eps } => interpolate_log_log(ks, eps, kappa),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Dispersion::Constant { .. } => "constant",
            Dispersion::Drude { .. } => "drude",
            Dispersion::LorentzOscillator { .. } => "lorentz_oscillator",
            Dispersion::Tabulated { .. } => "tabulated",
        }
    }

    pub fn params(&self) -> String {
        match self {
            Dispersion::Constant { eps } => format!("eps={eps}"),
            Dispersion::Drude {
                plasma_frequency,
                damping,
            } => format!("plasma_frequency={plasma_frequency};damping={damping}"),
            Dispersion::LorentzOscillator {
                eps_static,
                resonance,
            } => format!("eps_static={eps_static};resonance={resonance}"),
            Dispersion::Tabulated { kappa, .. } => format!("points={}", kappa.len()),
        }
    }
}

fn interpolate_log_log(ks: &[f64], eps: &[f64], kappa: f64) -> f64 {
    if kappa <= ks[0] {
        return eps[0];
    }
    let last = ks.len() - 1;
    if kappa >= ks[last] {
        return eps[last];
    }
    let j = ks.partition_point(|&k| k <= kappa);
    let (k0, k1) = (ks[j - 1].ln(), ks[j].ln());
    let (e0, e1) = (eps[j - 1].ln(), eps[j].ln());
    let t = (kappa.ln() - k0) / (k1 - k0);
    (e0 + t * (e1 - e0)).exp()
}

/// Radially inhomogeneous permittivity of a sphere of the given radius.
///
/// Profiles are functions of the absolute radius. Evaluation past the
/// surface (used when the radius is varied) continues the outermost layer,
/// or the linear ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RadialProfile {
    /// Concentric layers: layer `j` occupies `[boundaries[j-1], boundaries[j])`,
    /// the last layer runs to `radius`.
    Layers {
        boundaries: Vec<f64>,
        layers: Vec<Dispersion>,
        radius: f64,
    },
    /// Non-dispersive linear ramp eps(r) = eps_center + slope * r.
    Linear {
        eps_center: f64,
        slope: f64,
        radius: f64,
    },
}

impl RadialProfile {
    pub fn layers(boundaries: Vec<f64>, layers: Vec<Dispersion>, radius: f64) -> Result<Self> {
        let p = RadialProfile::Layers {
            boundaries,
            layers,
            radius,
        };
        p.validate()?;
        Ok(p)
    }

    /// Linear ramp from `eps_center` at r = 0 to `eps_surface` at `radius`.
    pub fn linear(eps_center: f64, eps_surface: f64, radius: f64) -> Result<Self> {
        require_positive("profile radius", radius)?;
        let p = RadialProfile::Linear {
            eps_center,
            slope: (eps_surface - eps_center) / radius,
            radius,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn radius(&self) -> f64 {
        match self {
            RadialProfile::Layers { radius, .. } | RadialProfile::Linear { radius, .. } => *radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("profile radius", self.radius())?;
        match self {
            RadialProfile::Layers {
                boundaries,
                layers,
                radius,
            } => {
                if layers.len() != boundaries.len() + 1 {
                    return Err(CasimirError::InvalidModel(format!(
                        "{} layers need {} inner boundaries, got {}",
                        layers.len(),
                        layers.len().saturating_sub(1),
                        boundaries.len()
                    )));
                }
                let mut prev = 0.0;
                for &b in boundaries {
                    if !(b > prev && b < *radius) {
                        return Err(CasimirError::InvalidModel(format!(
                            "layer boundary {b} must be increasing inside (0, {radius})"
                        )));
                    }
                    prev = b;
                }
                layers.iter().try_for_each(Dispersion::validate)
            }
            RadialProfile::Linear {
                eps_center,
                slope,
                radius,
            } => {
                let surface = eps_center + slope * radius;
                if !(eps_center.is_finite() && surface.is_finite())
                    || *eps_center < 1.0
                    || surface < 1.0
                {
                    return Err(CasimirError::InvalidModel(format!(
                        "linear profile must stay >= 1 on [0, {radius}]"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Same profile, surface moved to `radius`.
    pub fn with_radius(&self, new_radius: f64) -> Result<Self> {
        let mut p = self.clone();
        match &mut p {
            RadialProfile::Layers { radius, .. } | RadialProfile::Linear { radius, .. } => {
                *radius = new_radius
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// Radii where the profile is not smooth, strictly inside the sphere.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            RadialProfile::Layers { boundaries, .. } => boundaries,
            RadialProfile::Linear { .. } => &[],
        }
    }

    /// Unchecked evaluation at any r >= 0.
    pub(crate) fn eval(&self, kappa: f64, r: f64) -> f64 {
        match self {
            RadialProfile::Layers {
                boundaries, layers, ..
            } => {
                let j = boundaries.partition_point(|&b| b <= r);
                layers[j].eval(kappa)
            }
            RadialProfile::Linear {
                eps_center, slope, ..
            } => eps_center + slope * r,
        }
    }

    fn params(&self) -> String {
        match self {
            RadialProfile::Layers {
                boundaries, layers, ..
            } => {
                let inner: Vec<String> = layers
                    .iter()
                    .map(|l| format!("{}({})", l.kind_name(), l.params()))
                    .collect();
                let b: Vec<String> = boundaries.iter().map(|b| b.to_string()).collect();
                format!("layers=[{}];boundaries=[{}]", inner.join(","), b.join(","))
            }
            RadialProfile::Linear {
                eps_center,
                slope,
                radius,
            } => format!(
                "eps_center={eps_center};eps_surface={}",
                eps_center + slope * radius
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Permittivity {
    Homogeneous(Dispersion),
    Profile(RadialProfile),
}

/// Permittivity plus a constant permeability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseModel {
    pub permittivity: Permittivity,
    pub permeability: f64,
}

impl ResponseModel {
    fn homogeneous(d: Dispersion) -> Result<Self> {
        d.validate()?;
        Ok(Self {
            permittivity: Permittivity::Homogeneous(d),
            permeability: 1.0,
        })
    }

    pub fn constant(eps: f64) -> Result<Self> {
        Self::homogeneous(Dispersion::Constant { eps })
    }

    pub fn vacuum() -> Self {
        Self::constant(1.0).expect("vacuum is valid")
    }

    pub fn drude(plasma_frequency: f64, damping: f64) -> Result<Self> {
        Self::homogeneous(Dispersion::Drude {
            plasma_frequency,
            damping,
        })
    }

    pub fn lorentz(eps_static: f64, resonance: f64) -> Result<Self> {
        Self::homogeneous(Dispersion::LorentzOscillator {
            eps_static,
            resonance,
        })
    }

    pub fn tabulated(kappa: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        Self::homogeneous(Dispersion::Tabulated { kappa, eps })
    }

    pub fn profile(profile: RadialProfile) -> Result<Self> {
        profile.validate()?;
        Ok(Self {
            permittivity: Permittivity::Profile(profile),
            permeability: 1.0,
        })
    }

    pub fn with_permeability(mut self, mu: f64) -> Result<Self> {
        require_positive("permeability", mu)?;
        self.permeability = mu;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("permeability", self.permeability)?;
        match &self.permittivity {
            Permittivity::Homogeneous(d) => d.validate(),
            Permittivity::Profile(p) => p.validate(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.permittivity, Permittivity::Homogeneous(_))
    }

    pub fn is_magnetic(&self) -> bool {
        self.permeability != 1.0
    }

    pub fn profile_ref(&self) -> Option<&RadialProfile> {
        match &self.permittivity {
            Permittivity::Profile(p) => Some(p),
            Permittivity::Homogeneous(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.permittivity {
            Permittivity::Homogeneous(d) => d.kind_name(),
            Permittivity::Profile(_) => "radial_profile",
        }
    }

    /// Flat `key=value;...` rendering used in CSV output.
    pub fn params(&self) -> String {
        let base = match &self.permittivity {
            Permittivity::Homogeneous(d) => d.params(),
            Permittivity::Profile(p) => p.params(),
        };
        if self.is_magnetic() {
            format!("{base};mu={}", self.permeability)
        } else {
            base
        }
    }

    /// Unchecked: homogeneous value, or the profile value at its surface.
    pub(crate) fn eps_surface(&self, kappa: f64) -> f64 {
        match &self.permittivity {
            Permittivity::Homogeneous(d) => d.eval(kappa),
            Permittivity::Profile(p) => p.eval(kappa, p.radius()),
        }
    }

    pub(crate) fn eps_at(&self, kappa: f64, r: f64) -> f64 {
        match &self.permittivity {
            Permittivity::Homogeneous(d) => d.eval(kappa),
            Permittivity::Profile(p) => p.eval(kappa, r),
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(CasimirError::Domain {
            what: "kappa",
            value: kappa,
            constraint: "imaginary frequency must be positive; kappa = 0 goes through the static limit",
        })
    }
}

/// eps(i kappa) for a homogeneous model.
pub fn permittivity_at(model: &ResponseModel, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    match &model.permittivity {
        Permittivity::Homogeneous(d) => Ok(d.eval(kappa)),
        Permittivity::Profile(_) => Err(CasimirError::InvalidModel(
            "radial profile needs a radius; use permittivity_profile_at".into(),
        )),
    }
}

/// eps(i kappa, r) for r in [0, radius]. Homogeneous models are treated as
/// constant profiles.
pub fn permittivity_profile_at(model: &ResponseModel, kappa: f64, r: f64) -> Result<f64> {
    check_kappa(kappa)?;
    match &model.permittivity {
        Permittivity::Homogeneous(d) => {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(CasimirError::Domain {
                    what: "r",
                    value: r,
                    constraint: "radius must be non-negative",
                });
            }
            Ok(d.eval(kappa))
        }
        Permittivity::Profile(p) => {
            if !(r >= 0.0 && r <= p.radius()) {
                return Err(CasimirError::Domain {
                    what: "r",
                    value: r,
                    constraint: "outside the profile support [0, radius]",
                });
            }
            Ok(p.eval(kappa, r))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
    Undefined,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
            Sign::Undefined => 0,
        }
    }

    pub fn from_i8(v: i8) -> Sign {
        match v.signum() {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            _ => Sign::Undefined,
        }
    }

    pub fn flip(self) -> Sign {
        Sign::from_i8(-self.as_i8())
    }

    pub fn times(self, other: Sign) -> Sign {
        Sign::from_i8(self.as_i8() * other.as_i8())
    }

    pub fn is_defined(self) -> bool {
        self != Sign::Undefined
    }

    /// Sign of a real number, with zero mapped to `Undefined`.
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Plus
        } else if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Undefined
        }
    }
}

/// Sign of the scattering potential of one body, with the grid that
/// certifies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignClass {
    pub value: Sign,
    pub witnesses: Vec<(f64, f64)>,
}

/// Sampling grid for sign certification.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    pub kappa: Vec<f64>,
    pub radii: Vec<f64>,
}

impl SignGrid {
    /// 64 log-spaced kappa over [1e-3, 1e3] / gap and 32 uniform radii per
    /// layer of the body.
    pub fn for_body(body: &ResponseModel, gap: f64) -> SignGrid {
        let kappa = (0..64)
            .map(|j| 10f64.powf(-3.0 + 6.0 * j as f64 / 63.0) / gap)
            .collect();
        let radii = match body.profile_ref() {
            None => vec![0.0],
            Some(p) => {
                let mut edges = vec![0.0];
                edges.extend_from_slice(p.breakpoints());
                edges.push(p.radius());
                let mut radii = Vec::new();
                for w in edges.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    // The outer edge of an inner layer belongs to the next layer.
                    let top = if b < p.radius() { b - 1e-12 * (b - a) } else { b };
                    radii.extend((0..32).map(|j| a + (top - a) * j as f64 / 31.0));
                }
                radii
            }
        };
        SignGrid { kappa, radii }
    }
}

/// Classify sign(eps_body - eps_medium) (with the permeability ordering
/// reversed) over the grid. Equality anywhere gives `Undefined`.
pub fn classify_sign(
    body: &ResponseModel,
    medium: &ResponseModel,
    kappa_grid: &[f64],
    r_grid: &[f64],
) -> SignClass {
    let undefined = SignClass {
        value: Sign::Undefined,
        witnesses: Vec::new(),
    };
    if !medium.is_homogeneous() || kappa_grid.is_empty() {
        return undefined;
    }
    let radii: Vec<f64> = match body.profile_ref() {
        Some(p) => r_grid
            .iter()
            .copied()
            .filter(|r| *r >= 0.0 && *r <= p.radius())
            .collect(),
        None => vec![r_grid.first().copied().unwrap_or(0.0)],
    };
    if radii.is_empty() {
        return undefined;
    }

    let (mu_b, mu_m) = (body.permeability, medium.permeability);
    let mut all_plus = mu_b <= mu_m;
    let mut all_minus = mu_b >= mu_m;
    let mut witnesses = Vec::with_capacity(kappa_grid.len() * radii.len());
    for &k in kappa_grid.iter().filter(|k| **k > 0.0 && k.is_finite()) {
        let em = medium.eps_surface(k);
        for &r in &radii {
            let eb = body.eps_at(k, r);
            all_plus &= eb > em;
            all_minus &= eb < em;
            witnesses.push((k, r));
        }
    }
    let value = match (all_plus, all_minus) {
        (true, false) => Sign::Plus,
        (false, true) => Sign::Minus,
        _ => Sign::Undefined,
    };
    if value == Sign::Undefined {
        return undefined;
    }
    SignClass { value, witnesses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_is_one_everywhere() {
        let v = ResponseModel::vacuum();
        for k in [1e-6, 1.0, 1e6] {
            assert_eq!(permittivity_at(&v, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn drude_closed_form() {
        let m = ResponseModel::drude(1.0, 0.1).unwrap();
        assert_relative_eq!(permittivity_at(&m, 1.0).unwrap(), 1.0 + 1.0 / 1.1, max_relative = 1e-15);
    }

    #[test]
    fn lorentz_is_transparent_at_high_frequency() {
        let m = ResponseModel::lorentz(5.0, 2.0).unwrap();
        assert_relative_eq!(permittivity_at(&m, 1e9).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(permittivity_at(&m, 1e-9).unwrap(), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn nonpositive_kappa_is_a_domain_error() {
        let m = ResponseModel::constant(2.0).unwrap();
        assert!(matches!(permittivity_at(&m, 0.0), Err(CasimirError::Domain { .. })));
        assert!(matches!(permittivity_at(&m, -1.0), Err(CasimirError::Domain { .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ResponseModel::constant(0.5).is_err());
        assert!(ResponseModel::drude(-1.0, 0.1).is_err());
        assert!(ResponseModel::drude(1.0, -0.1).is_err());
        assert!(ResponseModel::lorentz(0.9, 1.0).is_err());
        assert!(ResponseModel::vacuum().with_permeability(0.0).is_err());
    }

    #[test]
    fn profiles() {
        let r1 = 2.0;
        let c = ResponseModel::constant(2.0).unwrap();
        assert_eq!(permittivity_profile_at(&c, 0.3, 1.7).unwrap(), 2.0);

        let two = ResponseModel::profile(
            RadialProfile::layers(
                vec![r1 / 2.0],
                vec![Dispersion::Constant { eps: 3.0 }, Dispersion::Constant { eps: 2.0 }],
                r1,
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(permittivity_profile_at(&two, 1.0, 0.75 * r1).unwrap(), 2.0);
        assert_eq!(permittivity_profile_at(&two, 1.0, 0.25 * r1).unwrap(), 3.0);

        let lin = ResponseModel::profile(RadialProfile::linear(1.0, 2.0, r1).unwrap()).unwrap();
        assert_relative_eq!(permittivity_profile_at(&lin, 1.0, r1 / 2.0).unwrap(), 1.5);
        assert!(matches!(
            permittivity_profile_at(&lin, 1.0, 1.01 * r1),
            Err(CasimirError::Domain { .. })
        ));
        assert!(permittivity_profile_at(&lin, 1.0, -0.1).is_err());
    }

    #[test]
    fn tabulated_interpolates_in_log_log() {
        let m = ResponseModel::tabulated(vec![1.0, 100.0], vec![4.0, 1.0]).unwrap();
        // midpoint in ln kappa is kappa = 10; ln eps halfway between ln 4 and 0
        assert_relative_eq!(permittivity_at(&m, 10.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_eq!(permittivity_at(&m, 0.01).unwrap(), 4.0);
        assert_eq!(permittivity_at(&m, 1e4).unwrap(), 1.0);
    }

    #[test]
    fn sign_examples() {
        let grid = [0.1, 1.0, 10.0];
        let two = ResponseModel::constant(2.0).unwrap();
        let one = ResponseModel::vacuum();
        assert_eq!(classify_sign(&two, &one, &grid, &[0.0]).value, Sign::Plus);
        assert_eq!(classify_sign(&one, &two, &grid, &[0.0]).value, Sign::Minus);

        let m = ResponseModel::constant(1.5).unwrap();
        assert_eq!(classify_sign(&m, &m, &grid, &[0.0]).value, Sign::Undefined);

        let drude = ResponseModel::drude(1.0, 0.1).unwrap();
        assert!(permittivity_at(&drude, 0.1).unwrap() > 1.5);
        assert!(permittivity_at(&drude, 10.0).unwrap() < 1.5);
        assert_eq!(classify_sign(&drude, &m, &grid, &[0.0]).value, Sign::Undefined);
    }

    #[test]
    fn permeability_enters_reversed() {
        let grid = [0.1, 1.0];
        let medium = ResponseModel::constant(2.0).unwrap();
        let wall = ResponseModel::constant(1.5).unwrap().with_permeability(3.0).unwrap();
        assert_eq!(classify_sign(&wall, &medium, &grid, &[0.0]).value, Sign::Minus);
        let clash = ResponseModel::constant(3.0).unwrap().with_permeability(3.0).unwrap();
        assert_eq!(classify_sign(&clash, &medium, &grid, &[0.0]).value, Sign::Undefined);
    }

    #[test]
    fn default_grid_covers_every_layer() {
        let body = ResponseModel::profile(
            RadialProfile::layers(
                vec![0.5],
                vec![Dispersion::Constant { eps: 3.0 }, Dispersion::Constant { eps: 2.0 }],
                1.0,
            )
            .unwrap(),
        )
        .unwrap();
        let g = SignGrid::for_body(&body, 0.5);
        assert_eq!(g.kappa.len(), 64);
        assert_eq!(g.radii.len(), 64);
        assert_relative_eq!(g.kappa[0], 2e-3, max_relative = 1e-12);
        assert_relative_eq!(g.kappa[63], 2e3, max_relative = 1e-12);
        let medium = ResponseModel::constant(2.5).unwrap();
        assert_eq!(classify_sign(&body, &medium, &g.kappa, &g.radii).value, Sign::Undefined);
    }

    use proptest::prelude::*;

    fn dispersive() -> impl Strategy<Value = ResponseModel> {
        prop_oneof![
            (0.0..10.0f64, 0.0..2.0f64).prop_map(|(w, g)| ResponseModel::drude(w, g).unwrap()),
            (1.0..20.0f64, 0.01..10.0f64).prop_map(|(e, w)| ResponseModel::lorentz(e, w).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn permittivity_is_at_least_one_and_nonincreasing(
            m in dispersive(), a in -6.0..6.0f64, b in -6.0..6.0f64
        ) {
            let (k1, k2) = (10f64.powf(a.min(b)), 10f64.powf(a.max(b)));
            let e1 = permittivity_at(&m, k1).unwrap();
            let e2 = permittivity_at(&m, k2).unwrap();
            prop_assert!(e1 >= 1.0 && e2 >= 1.0);
            prop_assert!(e1 >= e2);
        }

        #[test]
        fn classification_flips_under_swap(e1 in 1.0..10.0f64, e2 in 1.0..10.0f64) {
            let a = ResponseModel::constant(e1).unwrap();
            let b = ResponseModel::constant(e2).unwrap();
            let g = [0.01, 1.0, 100.0];
            let ab = classify_sign(&a, &b, &g, &[0.0]).value;
            let ba = classify_sign(&b, &a, &g, &[0.0]).value;
            prop_assert_eq!(ab, ba.flip());
            prop_assert_eq!(classify_sign(&a, &a, &g, &[0.0]).value, Sign::Undefined);
        }
    }
}
