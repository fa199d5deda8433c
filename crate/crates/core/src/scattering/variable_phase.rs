//! Variable-phase integration of the exterior amplitude for radially
//! inhomogeneous spheres.
//!
//! The amplitude of the sphere truncated at radius r obeys a Riccati
//! equation in r. Written for `w(r) = xi T(r) k_l(xi r) / i_l(xi r)` it
//! reads, with `rho = x i_l(x) k_l(x)` and `x = xi r`:
//!
//! ```text
//! TE: w' = (eps - eps_M) x^2 rho (1 - w)^2 / (eps_M r) - w / (r rho)
//! TM: w' = (eps - eps_M) rho / (eps r) *
//!          [ (1 + w)^2 l(l+1) + (l + 1 + S_l - w (l + P_l))^2 eps / eps_M ]
//!        - w / (r rho)
//! ```
//!
//! Integration starts at a small radius with the leading-order analytic
//! seed and proceeds layer by layer so that no step straddles a jump.

use super::ode::{integrate, Tolerance};
use super::{ExteriorAmplitude, Mode, Polarization};
use crate::error::{require_positive, CasimirError, Result};
use crate::media::{Permittivity, RadialProfile, ResponseModel};
use crate::specfun::RatioLadder;

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-14;

struct Segment {
    a: f64,
    b: f64,
    /// constant permittivity of the layer, or `None` for a continuous ramp
    eps: Option<f64>,
}

/// Segments from `r_start` through every stop, split at layer boundaries.
fn segments(model: &ResponseModel, kappa: f64, r_start: f64, stops: &[f64]) -> Vec<Segment> {
    let r_end = stops[stops.len() - 1];
    let mut edges = vec![r_start];
    edges.extend(stops.iter().copied().filter(|&r| r > r_start));
    let profile = match &model.permittivity {
        Permittivity::Homogeneous(_) => None,
        Permittivity::Profile(p) => Some(p),
    };
    if let Some(p) = profile {
        edges.extend(p.breakpoints().iter().copied().filter(|&b| b > r_start && b < r_end));
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
        .windows(2)
        .map(|w| {
            let eps = match (&model.permittivity, profile) {
                (Permittivity::Homogeneous(d), _) => Some(d.eval(kappa)),
                (_, Some(p @ RadialProfile::Layers { .. })) => Some(p.eval(kappa, 0.5 * (w[0] + w[1]))),
                _ => None,
            };
            Segment { a: w[0], b: w[1], eps }
        })
        .collect()
}

fn rhs(
    channels: &[(usize, Polarization)],
    lmax: usize,
    xi: f64,
    eps_m: f64,
    eps: f64,
    r: f64,
    w: &[f64],
    dw: &mut [f64],
) {
    let ladder = RatioLadder::new(xi * r, lmax);
    let x = ladder.x();
    let de = eps - eps_m;
    for (j, &(l, pol)) in channels.iter().enumerate() {
        let rho = ladder.rho(l);
        let relax = w[j] / (r * rho);
        dw[j] = match pol {
            Polarization::TE => de * x * x * rho * (1.0 - w[j]).powi(2) / (eps_m * r) - relax,
            Polarization::TM => {
                let lf = l as f64;
                let a3 = lf + 1.0 + ladder.s(l) - w[j] * (lf + ladder.p(l));
                let bracket = (1.0 + w[j]).powi(2) * lf * (lf + 1.0) + a3 * a3 * eps / eps_m;
                de * rho * bracket / (eps * r) - relax
            }
        };
    }
}

fn seed(l: usize, pol: Polarization, kappa: f64, r: f64, eps0: f64, eps_m: f64) -> f64 {
    let lf = l as f64;
    match pol {
        Polarization::TE => (eps0 - eps_m) * (kappa * r).powi(2) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)),
        Polarization::TM => (lf + 1.0) * (eps0 - eps_m) / ((lf + 1.0) * eps_m + lf * eps0),
    }
}

/// Integrate `w` for the given channels from the seed radius to `r1`.
pub(crate) fn integrate_channels(
    model: &ResponseModel,
    kappa: f64,
    r1: f64,
    eps_m: f64,
    channels: &[(usize, Polarization)],
) -> Result<Vec<f64>> {
    let mut at = integrate_channels_at(model, kappa, &[r1], eps_m, channels)?;
    Ok(at.pop().expect("one stop"))
}

/// Integrate `w` once and record it at every radius in `stops`
/// (increasing). The profile is held fixed; only the cutoff moves.
pub(crate) fn integrate_channels_at(
    model: &ResponseModel,
    kappa: f64,
    stops: &[f64],
    eps_m: f64,
    channels: &[(usize, Polarization)],
) -> Result<Vec<Vec<f64>>> {
    require_positive("kappa", kappa)?;
    for &r in stops {
        require_positive("r1", r)?;
    }
    if stops.is_empty() || stops.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CasimirError::InvalidGeometry("stop radii must increase".into()));
    }
    model.validate()?;
    let r1 = stops[0];
    let r_end = stops[stops.len() - 1];
    let lmax = channels.iter().map(|c| c.0).max().unwrap_or(1);
    let xi = kappa * eps_m.sqrt();
    let r_start = (1e-3 * r1).min(1e-3 / kappa);
    let segs = segments(model, kappa, r_start, stops);
    let eps_of = |s: &Segment, r: f64| s.eps.unwrap_or_else(|| model.eps_at(kappa, r));

    let eps0 = eps_of(&segs[0], r_start);
    let mut contrast: f64 = 0.0;
    for s in &segs {
        for r in [s.a, 0.5 * (s.a + s.b), s.b] {
            contrast = contrast.max((eps_of(s, r) - eps_m).abs());
        }
    }
    if contrast == 0.0 {
        return Ok(vec![vec![0.0; channels.len()]; stops.len()]);
    }
    let atol: Vec<f64> = channels
        .iter()
        .map(|&(l, pol)| {
            let lf = l as f64;
            let scale = match pol {
                Polarization::TE => contrast * (kappa * r_end).powi(2) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)),
                Polarization::TM => contrast * (lf + 1.0) / ((lf + 1.0) * eps_m + lf),
            };
            ATOL * scale.min(1.0).max(1e-300)
        })
        .collect();
    let tol = Tolerance { rtol: RTOL, atol };

    let mut w: Vec<f64> = channels
        .iter()
        .map(|&(l, pol)| seed(l, pol, kappa, r_start, eps0, eps_m))
        .collect();
    let mut out = Vec::with_capacity(stops.len());
    let mut next = 0;
    for s in &segs {
        let h0 = 0.05 * s.a.min(s.b - s.a);
        integrate(
            |r, y, dy| rhs(channels, lmax, xi, eps_m, eps_of(s, r), r, y, dy),
            s.a,
            s.b,
            &mut w,
            &tol,
            h0,
        )
        .map_err(|f| CasimirError::Integration {
            last_radius: f.last_t,
            detail: f.detail,
        })?;
        while next < stops.len() && stops[next] <= s.b {
            out.push(w.clone());
            next += 1;
        }
    }
    Ok(out)
}

/// `w1` for every l in `1..=lmax` and both polarizations, indexed
/// `[l - 1][polarization index]`.
#[cfg(test)]
pub(crate) fn profile_w(
    model: &ResponseModel,
    kappa: f64,
    r1: f64,
    eps_m: f64,
    lmax: usize,
) -> Result<Vec<[f64; 2]>> {
    let mut at = profile_w_at(model, kappa, &[r1], eps_m, 1..=lmax)?;
    Ok(at.pop().expect("one stop"))
}

/// `w1` for l in `ells` at every stop radius, indexed
/// `[stop][l - ells.start()][polarization index]`.
pub(crate) fn profile_w_at(
    model: &ResponseModel,
    kappa: f64,
    stops: &[f64],
    eps_m: f64,
    ells: std::ops::RangeInclusive<usize>,
) -> Result<Vec<Vec<[f64; 2]>>> {
    let channels: Vec<(usize, Polarization)> = ells
        .flat_map(|l| Polarization::ALL.map(|p| (l, p)))
        .collect();
    let at = integrate_channels_at(model, kappa, stops, eps_m, &channels)?;
    Ok(at
        .into_iter()
        .map(|w| w.chunks(2).map(|c| [c[0], c[1]]).collect())
        .collect())
}

/// Exterior amplitude of a (possibly layered or graded) sphere of radius
/// `r1`, obtained by integrating the variable-phase equation outward.
pub fn variable_phase_t(
    profile: &ResponseModel,
    mode: Mode,
    kappa: f64,
    r1: f64,
    eps_m: f64,
) -> Result<ExteriorAmplitude> {
    if !(eps_m >= 1.0 && eps_m.is_finite()) {
        return Err(CasimirError::Domain {
            what: "eps_m",
            value: eps_m,
            constraint: "permittivity on the imaginary axis must be >= 1",
        });
    }
    let w = integrate_channels(profile, kappa, r1, eps_m, &[(mode.ell(), mode.polarization())])?;
    let xi = kappa * eps_m.sqrt();
    let ladder = RatioLadder::new(xi * r1, mode.ell());
    Ok(ExteriorAmplitude {
        mode,
        kappa,
        radius: r1,
        normalized: w[0],
        ln_scale: ladder.ln_i_over_k()[mode.ell()] - xi.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::Dispersion;
    use crate::scattering::mie_exterior;
    use approx::assert_relative_eq;

    #[test]
    fn constant_sphere_reproduces_closed_form() {
        let m = ResponseModel::constant(2.0).unwrap();
        for mode in [Mode::te(1).unwrap(), Mode::tm(1).unwrap(), Mode::tm(5).unwrap()] {
            let vp = variable_phase_t(&m, mode, 1.0, 1.0, 1.0).unwrap();
            let mie = mie_exterior(mode, 1.0, 1.0, 2.0, 1.0).unwrap();
            assert_relative_eq!(vp.normalized, mie.normalized, max_relative = 1e-8);
        }
    }

    #[test]
    fn matched_profile_gives_zero() {
        let m = ResponseModel::profile(
            RadialProfile::layers(
                vec![0.5],
                vec![Dispersion::Constant { eps: 1.5 }, Dispersion::Constant { eps: 1.5 }],
                1.0,
            )
            .unwrap(),
        )
        .unwrap();
        let a = variable_phase_t(&m, Mode::tm(2).unwrap(), 0.3, 1.0, 1.5).unwrap();
        assert_eq!(a.normalized, 0.0);
    }

    #[test]
    fn stops_match_separate_runs() {
        let m = ResponseModel::profile(
            RadialProfile::layers(
                vec![0.4],
                vec![Dispersion::Constant { eps: 4.0 }, Dispersion::Constant { eps: 2.0 }],
                1.0,
            )
            .unwrap(),
        )
        .unwrap();
        let stops = [0.9, 1.0, 1.1];
        let at = profile_w_at(&m, 0.7, &stops, 1.0, 1..=3).unwrap();
        for (k, &r) in stops.iter().enumerate() {
            let one = profile_w(&m, 0.7, r, 1.0, 3).unwrap();
            for l in 0..3 {
                for p in 0..2 {
                    assert_relative_eq!(at[k][l][p], one[l][p], max_relative = 1e-8);
                }
            }
        }
        let upper = profile_w_at(&m, 0.7, &[1.0], 1.0, 2..=3).unwrap();
        assert_relative_eq!(upper[0][0][1], at[1][1][1], max_relative = 1e-8);
    }

    #[test]
    fn batch_matches_single_channel() {
        let m = ResponseModel::profile(RadialProfile::linear(3.0, 1.5, 1.0).unwrap()).unwrap();
        let all = profile_w(&m, 0.9, 1.0, 1.0, 3).unwrap();
        for l in 1..=3 {
            for pol in Polarization::ALL {
                let one = variable_phase_t(&m, Mode::new(l, pol).unwrap(), 0.9, 1.0, 1.0).unwrap();
                assert_relative_eq!(all[l - 1][pol.index()], one.normalized, max_relative = 1e-8);
            }
        }
    }
}
