//! Finite temperature: Matsubara sums over `kappa_n = 2 pi n T`, with the
//! n = 0 term half-weighted and taken from the static limit.

use rayon::prelude::*;

use super::accumulate::{combine_nodes, energy_report, pressure_report, Accumulated, Frame};
use super::nodes::{evaluate_node, extrapolate_static, static_kappa, Field, NodeResult};
use super::zero_temperature::FD_STEP;
use super::{checked_sign, EnergyReport, Frequencies, Geometry, PressureMethod, Quantity, SpectrumSpec};
use crate::error::{CasimirError, Result};

const BATCH: usize = 64;

struct Ladder {
    acc: Accumulated,
    terms: usize,
    tail: f64,
    zero_fraction: f64,
}

fn ladder(geo: &Geometry, spec: &SpectrumSpec, primary: Field) -> Result<Ladder> {
    spec.validate()?;
    geo.validate()?;
    let (t, n_max, tol) = match spec.frequencies {
        Frequencies::Matsubara {
            temperature,
            n_max,
            tolerance,
        } => (temperature, n_max, tolerance),
        Frequencies::ZeroTemperature { .. } => {
            return Err(CasimirError::InvalidModel(
                "zero-temperature spectra go through the kappa quadrature".into(),
            ))
        }
    };
    let fd = (primary != Field::Energy).then(|| FD_STEP * geo.gap());

    let ke = static_kappa(geo);
    let a = evaluate_node(geo, ke, &spec.ell, fd)?;
    let b = evaluate_node(geo, 0.5 * ke, &spec.ell, fd)?;
    extrapolate_static(a.total(primary), b.total(primary))?;
    let zero = combine_nodes(&b, 4.0 / 3.0, &a, -1.0 / 3.0);
    let zero_term = 0.5 * t * zero.total(primary);

    let mut nodes: Vec<(f64, NodeResult)> = vec![(0.5 * t, zero)];
    let mut total = zero_term;
    let mut count = 0;
    let mut n = 1;
    let mut tail = 0.0;
    'outer: loop {
        if n > n_max {
            return Err(CasimirError::Convergence {
                what: "Matsubara sum",
                detail: format!("n_max = {n_max} reached; last relative term {tail:.3e}"),
            });
        }
        let hi = (n + BATCH).min(n_max + 1);
        let batch: Vec<NodeResult> = (n..hi)
            .into_par_iter()
            .map(|k| evaluate_node(geo, 2.0 * std::f64::consts::PI * k as f64 * t, &spec.ell, fd))
            .collect::<Result<_>>()?;
        for r in batch {
            let term = t * r.total(primary);
            nodes.push((t, r));
            total += term;
            n += 1;
            tail = if total == 0.0 { 0.0 } else { (term / total).abs() };
            if term.abs() <= tol * total.abs() {
                count += 1;
                if count >= 3 {
                    break 'outer;
                }
            } else {
                count = 0;
            }
        }
    }
    let acc = Accumulated::from_nodes(&nodes, spec.ell.tolerance)?;
    let sum = acc.total(primary);
    Ok(Ladder {
        acc,
        terms: nodes.len(),
        tail,
        zero_fraction: if sum == 0.0 { 1.0 } else { zero_term / sum },
    })
}

/// Interaction free energy at temperature T.
pub fn matsubara_free_energy(geometry: &Geometry, spectrum: &SpectrumSpec) -> Result<EnergyReport> {
    let sign_class = checked_sign(geometry, spectrum)?;
    let l = ladder(geometry, spectrum, Field::Energy)?;
    Ok(energy_report(
        geometry,
        &l.acc,
        Frame {
            quantity: Quantity::FreeEnergy,
            sign_class,
            n_used: l.terms,
            frequency_tail: l.tail,
            zero_mode_fraction: Some(l.zero_fraction),
        },
    ))
}

/// Mean pressure `-(1/(4 pi r1^2)) dF_int/dr1` at temperature T.
pub fn matsubara_pressure(
    geometry: &Geometry,
    spectrum: &SpectrumSpec,
    method: PressureMethod,
) -> Result<EnergyReport> {
    let sign_class = checked_sign(geometry, spectrum)?;
    let primary = match method {
        PressureMethod::CalogeroAnalytic => Field::Slope,
        PressureMethod::FiniteDifference => Field::FiniteDifference,
    };
    let l = ladder(geometry, spectrum, primary)?;
    pressure_report(
        geometry,
        &l.acc,
        method,
        Frame {
            quantity: Quantity::ThermalPressure,
            sign_class,
            n_used: l.terms,
            frequency_tail: l.tail,
            zero_mode_fraction: Some(l.zero_fraction),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::ResponseModel;

    fn geo() -> Geometry {
        let c = |e| ResponseModel::constant(e).unwrap();
        Geometry::new(1.0, 2.0, c(2.0), c(3.0), c(1.0)).unwrap()
    }

    #[test]
    fn high_temperature_is_zero_mode_dominated() {
        let r = matsubara_free_energy(&geo(), &SpectrumSpec::matsubara(5.0).unwrap()).unwrap();
        assert!(r.value < 0.0);
        assert!((1.0 - r.diagnostics.zero_mode_fraction.unwrap()).abs() < 1e-3);
    }

    #[test]
    fn rejects_zero_temperature_spec() {
        assert!(matsubara_free_energy(&geo(), &SpectrumSpec::zero_temperature()).is_err());
    }
}
