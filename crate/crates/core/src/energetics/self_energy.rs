//! Renormalized self-energy of a dilute sphere in vacuum and the total
//! pressure on the sphere.

use std::f64::consts::PI;

use serde::Serialize;

use super::{
    interaction_pressure, matsubara_pressure, EnergyReport, Geometry, PressureMethod, Quantity,
    SpectrumSpec,
};
use crate::error::{require_positive, CasimirError, Result};
use crate::media::{Dispersion, Permittivity};

/// Validity limits of the dilute closed forms. Violations produce a
/// warning, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiluteGate {
    /// largest accepted |eps1 - 1|
    pub max_contrast: f64,
    /// largest accepted T r1
    pub max_temperature_radius: f64,
}

impl Default for DiluteGate {
    fn default() -> Self {
        DiluteGate {
            max_contrast: 0.3,
            max_temperature_radius: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiluteValue {
    /// energy (or free energy), 1/length
    pub value: f64,
    /// `-(1/(4 pi r1^2)) d(value)/dr1`, 1/length^4
    pub pressure: f64,
    pub warning: Option<String>,
}

fn check(eps1: f64, r1: f64) -> Result<()> {
    require_positive("r1", r1)?;
    if !(eps1 >= 1.0 && eps1.is_finite()) {
        return Err(CasimirError::Domain {
            what: "eps1",
            value: eps1,
            constraint: "permittivity on the imaginary axis must be >= 1",
        });
    }
    Ok(())
}

fn contrast_warning(eps1: f64, gate: &DiluteGate) -> Option<String> {
    ((eps1 - 1.0).abs() > gate.max_contrast).then(|| {
        format!(
            "|eps1 - 1| = {} exceeds the dilute limit {}; the closed form is only leading order",
            (eps1 - 1.0).abs(),
            gate.max_contrast
        )
    })
}

/// `23 (eps1 - 1)^2 / (1536 pi r1)` with the default gate.
pub fn dilute_self_energy(eps1: f64, r1: f64) -> Result<DiluteValue> {
    dilute_self_energy_gated(eps1, r1, &DiluteGate::default())
}

pub fn dilute_self_energy_gated(eps1: f64, r1: f64, gate: &DiluteGate) -> Result<DiluteValue> {
    dilute_self_free_energy_gated(eps1, r1, 0.0, gate)
}

/// Low-temperature free energy
/// `(eps1 - 1)^2 [23/(1536 pi r1) + (7/270) (pi r1)^3 T^4]`.
pub fn dilute_self_free_energy(eps1: f64, r1: f64, temperature: f64) -> Result<DiluteValue> {
    dilute_self_free_energy_gated(eps1, r1, temperature, &DiluteGate::default())
}

pub fn dilute_self_free_energy_gated(
    eps1: f64,
    r1: f64,
    temperature: f64,
    gate: &DiluteGate,
) -> Result<DiluteValue> {
    check(eps1, r1)?;
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(CasimirError::Domain {
            what: "temperature",
            value: temperature,
            constraint: "must be non-negative",
        });
    }
    let c = (eps1 - 1.0).powi(2);
    let t4 = temperature.powi(4);
    let value = c * (23.0 / (1536.0 * PI * r1) + 7.0 / 270.0 * (PI * r1).powi(3) * t4);
    let warning = contrast_warning(eps1, gate).or_else(|| {
        (temperature * r1 > gate.max_temperature_radius).then(|| {
            format!(
                "T r1 = {} exceeds the low-temperature limit {}",
                temperature * r1,
                gate.max_temperature_radius
            )
        })
    });
    Ok(DiluteValue {
        value,
        pressure: self_pressure(c, r1, temperature),
        warning,
    })
}

fn self_pressure(c: f64, r1: f64, t: f64) -> f64 {
    c * (23.0 / (6144.0 * PI * PI * r1.powi(4)) - 7.0 / 360.0 * PI * PI * t.powi(4))
}

/// Temperature at which the low-temperature self-pressure of a sphere of
/// radius `r1` changes sign (from outward to inward), by bisection.
pub fn self_pressure_crossover(r1: f64) -> Result<f64> {
    require_positive("r1", r1)?;
    let p = |t: f64| self_pressure(1.0, r1, t);
    let mut lo = 0.0;
    let mut hi = 1.0 / r1;
    while p(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn constant_eps(p: &Permittivity) -> Option<f64> {
    match p {
        Permittivity::Homogeneous(Dispersion::Constant { eps }) => Some(*eps),
        _ => None,
    }
}

/// Self pressure plus interaction pressure. The self part needs a vacuum
/// gap and a non-dispersive homogeneous sphere.
pub fn total_pressure(geometry: &Geometry, spectrum: &SpectrumSpec) -> Result<EnergyReport> {
    if constant_eps(&geometry.medium.permittivity) != Some(1.0) {
        return Err(CasimirError::SelfEnergyUnavailable(
            "the dilute self-energy is only known for a sphere in vacuum".into(),
        ));
    }
    let eps1 = constant_eps(&geometry.sphere.permittivity).ok_or_else(|| {
        CasimirError::SelfEnergyUnavailable(
            "the dilute self-energy needs a constant, homogeneous sphere permittivity".into(),
        )
    })?;
    let (inter, own) = match spectrum.temperature() {
        None => (
            interaction_pressure(geometry, spectrum, PressureMethod::CalogeroAnalytic)?,
            dilute_self_energy(eps1, geometry.r1)?,
        ),
        Some(t) => (
            matsubara_pressure(geometry, spectrum, PressureMethod::CalogeroAnalytic)?,
            dilute_self_free_energy(eps1, geometry.r1, t)?,
        ),
    };
    let mut report = inter;
    let interaction = report.value;
    report.quantity = Quantity::TotalPressure;
    report.value = own.pressure + interaction;
    report.diagnostics.self_part = Some(own.pressure);
    report.diagnostics.interaction_part = Some(interaction);
    if let Some(w) = own.warning {
        report.diagnostics.warnings.push(w);
    }
    Ok(report)
}
