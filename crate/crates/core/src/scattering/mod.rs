//! Per-mode scattering amplitudes at imaginary frequency.
//!
//! Normalization: the exterior amplitude of a sphere of radius `r` is
//! reported as `T1 = w1 * (i_l/k_l)(xi r) / xi` and the interior amplitude
//! of a cavity of radius `r2` as `T2 = w2 * (k_l/i_l)(xi r2) * xi`, with
//! `xi = kappa sqrt(eps_M)`. With this choice the round-trip product of one
//! (l, P) channel is exactly `T1 * T2`, and the prefactors of the radial
//! derivative take their textbook form in terms of I_{l+1/2} and
//! K_{l+1/2}.
//!
//! The dimensionless `w` factors are what the code actually computes: they
//! are O(1) (|w| < 1 for passive media) and the exponential growth of
//! `i/k` is carried separately as a logarithm, so nothing overflows.

mod ode;
mod variable_phase;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, CasimirError, Result};
use crate::specfun::{RatioLadder, ELL_CAP};

pub use variable_phase::variable_phase_t;
pub(crate) use variable_phase::profile_w_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::TE, Polarization::TM];

    pub fn index(self) -> usize {
        match self {
            Polarization::TE => 0,
            Polarization::TM => 1,
        }
    }
}

/// One decoupled scattering channel; `ell >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    ell: usize,
    polarization: Polarization,
}

impl Mode {
    pub fn new(ell: usize, polarization: Polarization) -> Result<Self> {
        if ell == 0 {
            return Err(CasimirError::Domain {
                what: "ell",
                value: 0.0,
                constraint: "electromagnetic multipoles start at l = 1",
            });
        }
        if ell > ELL_CAP {
            return Err(CasimirError::Capability { ell, cap: ELL_CAP });
        }
        Ok(Mode { ell, polarization })
    }

    pub fn te(ell: usize) -> Result<Self> {
        Self::new(ell, Polarization::TE)
    }

    pub fn tm(ell: usize) -> Result<Self> {
        Self::new(ell, Polarization::TM)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }
}

/// A real number stored as `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }
}

/// Exterior (Lorenz-Mie type) amplitude of the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorAmplitude {
    pub mode: Mode,
    pub kappa: f64,
    pub radius: f64,
    /// The dimensionless factor `w1`.
    pub normalized: f64,
    /// `ln((i_l/k_l)(xi r) / xi)`.
    pub ln_scale: f64,
}

impl ExteriorAmplitude {
    pub fn value(&self) -> f64 {
        self.scaled().value()
    }

    pub fn scaled(&self) -> Scaled {
        Scaled {
            mantissa: self.normalized,
            ln_scale: self.ln_scale,
        }
    }
}

/// Interior amplitude of the cavity wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorAmplitude {
    pub mode: Mode,
    pub kappa: f64,
    pub radius: f64,
    /// The dimensionless factor `w2`.
    pub normalized: f64,
    /// `ln((k_l/i_l)(xi r2) * xi)`.
    pub ln_scale: f64,
}

impl InteriorAmplitude {
    pub fn value(&self) -> f64 {
        self.normalized * self.ln_scale.exp()
    }
}

/// Round-trip product `T1 * T2` of one channel, computed without forming
/// either factor.
pub fn mode_product(exterior: &ExteriorAmplitude, interior: &InteriorAmplitude) -> Result<f64> {
    if exterior.mode != interior.mode || exterior.kappa != interior.kappa {
        return Err(CasimirError::InvalidGeometry(
            "amplitudes belong to different modes or frequencies".into(),
        ));
    }
    Ok(exterior.normalized * interior.normalized * (exterior.ln_scale + interior.ln_scale).exp())
}

fn require_at_least_one(what: &'static str, value: f64) -> Result<()> {
    if value >= 1.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CasimirError::Domain {
            what,
            value,
            constraint: "permittivity on the imaginary axis must be >= 1",
        })
    }
}

/// `w1` for a homogeneous sphere: `outside` is the ladder at `xi r`,
/// `inside` the ladder at `kappa sqrt(eps1) r`.
pub(crate) fn exterior_w(
    pol: Polarization,
    l: usize,
    outside: &RatioLadder,
    inside: &RatioLadder,
    eps1: f64,
    eps_m: f64,
) -> f64 {
    let n = (2 * l + 1) as f64;
    let (s_in, s_out, p_out) = (inside.s(l), outside.s(l), outside.p(l));
    match pol {
        Polarization::TE => (s_in - s_out) / (s_in + n + p_out),
        Polarization::TM => {
            let c = (l + 1) as f64 * (1.0 / eps1 - 1.0 / eps_m);
            let num = c + s_in / eps1 - s_out / eps_m;
            let den = c + s_in / eps1 + (n + p_out) / eps_m;
            -num / den
        }
    }
}

/// `w2` for a homogeneous wall: `cavity` is the ladder at `xi r2`, `wall`
/// the ladder at `kappa sqrt(eps2 mu2) r2`.
pub(crate) fn interior_w(
    pol: Polarization,
    l: usize,
    cavity: &RatioLadder,
    wall: &RatioLadder,
    eps2: f64,
    mu2: f64,
    eps_m: f64,
) -> f64 {
    let lf = l as f64;
    let (p_cav, s_cav, p_wall) = (cavity.p(l), cavity.s(l), wall.p(l));
    match pol {
        Polarization::TE => {
            let num = -lf * (1.0 / mu2 - 1.0) + p_cav - p_wall / mu2;
            let den = -lf / mu2 - (lf + 1.0) - p_wall / mu2 - s_cav;
            num / den
        }
        Polarization::TM => {
            let num = -lf * (1.0 / eps2 - 1.0 / eps_m) + p_cav / eps_m - p_wall / eps2;
            let den = -lf / eps2 - (lf + 1.0) / eps_m - p_wall / eps2 - s_cav / eps_m;
            -num / den
        }
    }
}

/// Closed-form exterior amplitude of a homogeneous sphere.
pub fn mie_exterior(mode: Mode, kappa: f64, r1: f64, eps1: f64, eps_m: f64) -> Result<ExteriorAmplitude> {
    require_positive("kappa", kappa)?;
    require_positive("r1", r1)?;
    require_at_least_one("eps1", eps1)?;
    require_at_least_one("eps_m", eps_m)?;
    let l = mode.ell;
    let xi = kappa * eps_m.sqrt();
    let outside = RatioLadder::new(xi * r1, l);
    let w = if eps1 == eps_m {
        0.0
    } else {
        let inside = RatioLadder::new(kappa * eps1.sqrt() * r1, l);
        exterior_w(mode.polarization, l, &outside, &inside, eps1, eps_m)
    };
    Ok(ExteriorAmplitude {
        mode,
        kappa,
        radius: r1,
        normalized: w,
        ln_scale: outside.ln_i_over_k()[l] - xi.ln(),
    })
}

/// Closed-form interior amplitude of a cavity of radius `r2` cut into a
/// homogeneous magnetodielectric half-space.
pub fn mie_interior_cavity(
    mode: Mode,
    kappa: f64,
    r2: f64,
    eps2: f64,
    mu2: f64,
    eps_m: f64,
) -> Result<InteriorAmplitude> {
    require_positive("kappa", kappa)?;
    require_positive("r2", r2)?;
    require_positive("mu2", mu2)?;
    require_at_least_one("eps2", eps2)?;
    require_at_least_one("eps_m", eps_m)?;
    let l = mode.ell;
    let xi = kappa * eps_m.sqrt();
    let cavity = RatioLadder::new(xi * r2, l);
    let w = if eps2 == eps_m && mu2 == 1.0 {
        0.0
    } else {
        let wall = RatioLadder::new(kappa * (eps2 * mu2).sqrt() * r2, l);
        interior_w(mode.polarization, l, &cavity, &wall, eps2, mu2, eps_m)
    };
    Ok(InteriorAmplitude {
        mode,
        kappa,
        radius: r2,
        normalized: w,
        ln_scale: xi.ln() - cavity.ln_i_over_k()[l],
    })
}

/// Radial derivative of the exterior amplitude divided by `I_{l+1/2}(x)^2`.
///
/// `alpha = xi T k_l / i_l` at `x = xi r`, which is `w1` for an amplitude
/// in the normalization above.
pub(crate) fn slope_mantissa(
    pol: Polarization,
    l: usize,
    ladder: &RatioLadder,
    xi: f64,
    r: f64,
    alpha: f64,
    eps: f64,
    eps_m: f64,
) -> f64 {
    let x = ladder.x();
    let pi = std::f64::consts::PI;
    let de = eps - eps_m;
    match pol {
        Polarization::TE => de * pi * (1.0 - alpha).powi(2) * xi * r / (2.0 * eps_m),
        Polarization::TM => {
            let lf = l as f64;
            let a3 = alpha * (lf + 1.0 - x * x / ladder.p(l + 1)) + ladder.s(l) + lf + 1.0;
            let bracket = (1.0 + alpha).powi(2) * lf * (lf + 1.0) + a3 * a3 * eps / eps_m;
            de * pi * bracket / (2.0 * xi * r * eps)
        }
    }
}

/// `2 ln I_{l+1/2}(x)` from the ladder's scaled logarithm of i_l.
pub(crate) fn ln_i_half_sq(ln_i_scaled: f64, x: f64) -> f64 {
    2.0 * (ln_i_scaled + x + 0.5 * (2.0 * x / std::f64::consts::PI).ln())
}

/// Closed-form `dT/dr1` for an exterior amplitude `t` at radius `r1`,
/// with `eps1_surface` the sphere permittivity just inside the surface.
pub fn t_radius_derivative(
    mode: Mode,
    kappa: f64,
    r1: f64,
    t: f64,
    eps1_surface: f64,
    eps_m: f64,
) -> Result<f64> {
    require_positive("kappa", kappa)?;
    require_positive("r1", r1)?;
    require_at_least_one("eps1_surface", eps1_surface)?;
    require_at_least_one("eps_m", eps_m)?;
    if !t.is_finite() {
        return Err(CasimirError::Domain {
            what: "t",
            value: t,
            constraint: "amplitude must be finite",
        });
    }
    let l = mode.ell;
    let xi = kappa * eps_m.sqrt();
    let ladder = RatioLadder::new(xi * r1, l + 1);
    let ln_ik = ladder.ln_i_over_k()[l];
    let alpha = xi * t * (-ln_ik).exp();
    let m = slope_mantissa(mode.polarization, l, &ladder, xi, r1, alpha, eps1_surface, eps_m);
    Ok(m * ln_i_half_sq(ladder.ln_i_scaled()[l], ladder.x()).exp())
}

/// Same as [`t_radius_derivative`] but starting from an amplitude object
/// and returning a scaled result that cannot overflow.
pub fn t_radius_derivative_scaled(
    amplitude: &ExteriorAmplitude,
    eps1_surface: f64,
    eps_m: f64,
) -> Result<Scaled> {
    require_at_least_one("eps1_surface", eps1_surface)?;
    require_at_least_one("eps_m", eps_m)?;
    let l = amplitude.mode.ell;
    let xi = amplitude.kappa * eps_m.sqrt();
    let r = amplitude.radius;
    let ladder = RatioLadder::new(xi * r, l + 1);
    let ln_ik = ladder.ln_i_over_k()[l];
    let alpha = amplitude.normalized * (amplitude.ln_scale + xi.ln() - ln_ik).exp();
    Ok(Scaled {
        mantissa: slope_mantissa(amplitude.mode.polarization, l, &ladder, xi, r, alpha, eps1_surface, eps_m),
        ln_scale: ln_i_half_sq(ladder.ln_i_scaled()[l], ladder.x()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mode_rejects_monopole() {
        assert!(Mode::te(0).is_err());
        assert!(Mode::tm(ELL_CAP + 1).is_err());
        assert_eq!(Mode::tm(3).unwrap().ell(), 3);
    }

    #[test]
    fn transparent_bodies_do_not_scatter() {
        for m in [Mode::te(1).unwrap(), Mode::tm(4).unwrap()] {
            assert_eq!(mie_exterior(m, 0.7, 1.0, 1.5, 1.5).unwrap().value(), 0.0);
            assert_eq!(mie_interior_cavity(m, 0.7, 2.0, 1.5, 1.0, 1.5).unwrap().value(), 0.0);
            assert_eq!(t_radius_derivative(m, 0.7, 1.0, 0.3, 1.5, 1.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn exterior_sign_follows_contrast() {
        for pol in Polarization::ALL {
            let m = Mode::new(2, pol).unwrap();
            assert!(mie_exterior(m, 0.5, 1.0, 3.0, 1.0).unwrap().value() > 0.0);
            assert!(mie_exterior(m, 0.5, 1.0, 1.2, 2.0).unwrap().value() < 0.0);
        }
    }

    #[test]
    fn scaled_and_plain_derivative_agree() {
        let m = Mode::tm(3).unwrap();
        let a = mie_exterior(m, 0.8, 1.3, 2.5, 1.2).unwrap();
        let plain = t_radius_derivative(m, 0.8, 1.3, a.value(), 2.5, 1.2).unwrap();
        let scaled = t_radius_derivative_scaled(&a, 2.5, 1.2).unwrap().value();
        assert_relative_eq!(plain, scaled, max_relative = 1e-12);
    }

    #[test]
    fn product_refuses_mismatched_modes() {
        let a = mie_exterior(Mode::te(1).unwrap(), 1.0, 1.0, 2.0, 1.0).unwrap();
        let b = mie_interior_cavity(Mode::te(2).unwrap(), 1.0, 2.0, 3.0, 1.0, 1.0).unwrap();
        assert!(mode_product(&a, &b).is_err());
    }
}
