//! Zero-temperature frequency integral.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use super::accumulate::{energy_report, pressure_report, Accumulated, Frame};
use super::nodes::{evaluate_node, Field, NodeResult};
use super::{checked_sign, EnergyReport, Frequencies, Geometry, PressureMethod, Quantity, SpectrumSpec};
use crate::error::{CasimirError, Result};

/// Relative finite-difference step, in units of the gap.
pub(crate) const FD_STEP: f64 = 1e-4;

fn nodes_for(geo: &Geometry, spec: &SpectrumSpec, n: usize, fd: Option<f64>) -> Result<Vec<(f64, NodeResult)>> {
    let d = geo.gap();
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 8"));
    let two_pi = 2.0 * std::f64::consts::PI;
    rule.as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| {
            let u = 0.5 * (x + 1.0);
            let kappa = u / ((1.0 - u) * d);
            let jac = 1.0 / ((1.0 - u).powi(2) * d);
            let weight = 0.5 * w * jac / two_pi;
            evaluate_node(geo, kappa, &spec.ell, fd).map(|r| (weight, r))
        })
        .collect()
}

/// Integrate over kappa, doubling the node count until the primary field
/// settles. Returns the accumulation, node count and last relative change.
fn integrate(geo: &Geometry, spec: &SpectrumSpec, primary: Field) -> Result<(Accumulated, usize, f64)> {
    spec.validate()?;
    geo.validate()?;
    let (mut n, n_max, tol) = match spec.frequencies {
        Frequencies::ZeroTemperature {
            n_kappa,
            n_kappa_max,
            tolerance,
        } => (n_kappa, n_kappa_max, tolerance),
        Frequencies::Matsubara { .. } => {
            return Err(CasimirError::InvalidModel(
                "finite-temperature spectra go through the Matsubara routines".into(),
            ))
        }
    };
    let fd = (primary != Field::Energy).then(|| FD_STEP * geo.gap());
    let mut prev: Option<f64> = None;
    loop {
        let acc = Accumulated::from_nodes(&nodes_for(geo, spec, n, fd)?, spec.ell.tolerance)?;
        let v = acc.total(primary);
        if let Some(p) = prev {
            let change = if v == 0.0 && p == 0.0 { 0.0 } else { ((v - p) / v).abs() };
            if change <= tol {
                return Ok((acc, n, change));
            }
            if 2 * n > n_max {
                return Err(CasimirError::Convergence {
                    what: "kappa quadrature",
                    detail: format!(
                        "relative change {change:.3e} > {tol:.1e} at {n} nodes (cap {n_max}); value {v:e}"
                    ),
                });
            }
        }
        prev = Some(v);
        n *= 2;
        if n > n_max {
            return Err(CasimirError::Convergence {
                what: "kappa quadrature",
                detail: format!("node cap {n_max} reached before a refinement check"),
            });
        }
    }
}

/// Zero-temperature interaction energy.
pub fn interaction_energy(geometry: &Geometry, spectrum: &SpectrumSpec) -> Result<EnergyReport> {
    let sign_class = checked_sign(geometry, spectrum)?;
    let (acc, n, change) = integrate(geometry, spectrum, Field::Energy)?;
    Ok(energy_report(
        geometry,
        &acc,
        Frame {
            quantity: Quantity::InteractionEnergy,
            sign_class,
            n_used: n,
            frequency_tail: change,
            zero_mode_fraction: None,
        },
    ))
}

/// Zero-temperature mean pressure on the sphere. Both derivative routes are
/// always evaluated; `method` selects the reported one and a disagreement
/// beyond 1e-3 relative is an error.
pub fn interaction_pressure(
    geometry: &Geometry,
    spectrum: &SpectrumSpec,
    method: PressureMethod,
) -> Result<EnergyReport> {
    let sign_class = checked_sign(geometry, spectrum)?;
    let primary = match method {
        PressureMethod::CalogeroAnalytic => Field::Slope,
        PressureMethod::FiniteDifference => Field::FiniteDifference,
    };
    let (acc, n, change) = integrate(geometry, spectrum, primary)?;
    pressure_report(
        geometry,
        &acc,
        method,
        Frame {
            quantity: Quantity::InteractionPressure,
            sign_class,
            n_used: n,
            frequency_tail: change,
            zero_mode_fraction: None,
        },
    )
}
