//! Planar limit: r1, r2 -> infinity at fixed gap d.

use serde::Serialize;

use super::{interaction_pressure, Geometry, PressureMethod, SpectrumSpec};
use crate::error::{require_positive, CasimirError, Result};
use crate::media::{ResponseModel, Sign};
use crate::specfun::ELL_CAP;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarRow {
    pub r1: f64,
    pub pressure: f64,
    /// Force per unit area along the gap, positive when repulsive.
    pub force_per_area: f64,
    pub l_max_used: usize,
    pub n_kappa_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarLimit {
    /// Polynomial extrapolation in d/r1 through every ladder point.
    pub force: f64,
    pub sign: Sign,
    /// Linear extrapolation from the two largest radii, for comparison.
    pub linear_estimate: f64,
    pub table: Vec<PlanarRow>,
}

/// Value at t = 0 of the interpolating polynomial through `(t_i, y_i)`.
fn neville_at_zero(t: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = t.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (t[i + k] * p[i] - t[i] * p[i + 1]) / (t[i + k] - t[i]);
        }
    }
    p[0]
}

/// Force per unit area between the sphere surface and the cavity wall in
/// the limit of large radii at fixed gap `d`, from pressures computed along
/// `radius_ladder`.
pub fn planar_limit_force(
    d: f64,
    eps1: f64,
    eps2: f64,
    eps_m: f64,
    radius_ladder: &[f64],
    spectrum: &SpectrumSpec,
) -> Result<PlanarLimit> {
    require_positive("d", d)?;
    if radius_ladder.len() < 2
        || radius_ladder.windows(2).any(|w| !(w[1] > w[0]))
        || radius_ladder.iter().any(|r| !(*r > 0.0 && r.is_finite()))
    {
        return Err(CasimirError::Convergence {
            what: "planar extrapolation",
            detail: "the radius ladder needs at least two increasing positive radii".into(),
        });
    }
    let (m1, m2, mm) = (
        ResponseModel::constant(eps1)?,
        ResponseModel::constant(eps2)?,
        ResponseModel::constant(eps_m)?,
    );
    let mut table = Vec::with_capacity(radius_ladder.len());
    for &r1 in radius_ladder {
        let geo = Geometry::new(r1, r1 + d, m1.clone(), m2.clone(), mm.clone())?;
        let l_needed = (45.0 * r1 / d).ceil() as usize + 200;
        let spec = spectrum
            .with_l_max(spectrum.ell.l_max.max(l_needed).min(ELL_CAP))
            .accepting_undefined_sign();
        let r = interaction_pressure(&geo, &spec, PressureMethod::CalogeroAnalytic)?;
        table.push(PlanarRow {
            r1,
            pressure: r.value,
            force_per_area: -r.value,
            l_max_used: r.l_max_used,
            n_kappa_used: r.n_kappa_used,
        });
    }
    let t: Vec<f64> = radius_ladder.iter().map(|r| d / r).collect();
    let y: Vec<f64> = table.iter().map(|r| r.force_per_area).collect();
    let force = neville_at_zero(&t, &y);
    let n = t.len();
    let linear_estimate = neville_at_zero(&t[n - 2..], &y[n - 2..]);
    Ok(PlanarLimit {
        force,
        sign: Sign::of(force),
        linear_estimate,
        table,
    })
}
