//! Everything evaluated at a single imaginary frequency: per-channel
//! summands, their radial derivatives, and the l-truncation.

use super::{EllPolicy, Geometry};
use crate::error::{CasimirError, Result};
use crate::scattering::{
    exterior_w, interior_w, ln_i_half_sq, profile_w_at, slope_mantissa, Mode, Polarization,
};
use crate::specfun::RatioLadder;
use crate::sum::NeumaierSum;

/// Exponent beyond which a whole frequency node is negligible.
const SKIP_EXPONENT: f64 = 80.0;
const L_START: usize = 16;

/// One (l, P) channel at one frequency.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Channel {
    /// (2l+1) ln(1 - T1 T2)
    pub energy: f64,
    /// d(energy)/dr1, closed form
    pub slope: f64,
    /// d(energy)/dr1, Richardson-refined central difference
    pub fd: f64,
    /// -(2l+1) T1 T2
    pub linear: f64,
}

impl Channel {
    pub fn field(&self, f: Field) -> f64 {
        match f {
            Field::Energy => self.energy,
            Field::Slope => self.slope,
            Field::FiniteDifference => self.fd,
            Field::Linear => self.linear,
        }
    }

    pub fn combine(a: &Channel, ca: f64, b: &Channel, cb: f64) -> Channel {
        Channel {
            energy: ca * a.energy + cb * b.energy,
            slope: ca * a.slope + cb * b.slope,
            fd: ca * a.fd + cb * b.fd,
            linear: ca * a.linear + cb * b.linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Field {
    Energy,
    Slope,
    FiniteDifference,
    Linear,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct NodeResult {
    /// indexed by l - 1
    pub channels: Vec<[Channel; 2]>,
    pub max_product: f64,
    pub min_product: f64,
    pub tail: f64,
    /// Set when the l-sum stopped at the cap before its tail criterion was
    /// met: estimated bounds on the omitted energy and slope tails.
    pub capped: Option<[f64; 2]>,
}

impl NodeResult {
    pub fn total(&self, f: Field) -> f64 {
        crate::sum::neumaier(self.channels.iter().flat_map(|c| c.iter().map(move |ch| ch.field(f))))
    }
}

struct Interior {
    w: Vec<[f64; 2]>,
    ln_i_over_k: Vec<f64>,
    ln_xi: f64,
}

struct Media {
    eps_m: f64,
    xi: f64,
}

fn media(geo: &Geometry, kappa: f64) -> Media {
    let eps_m = geo.medium.eps_surface(kappa);
    Media {
        eps_m,
        xi: kappa * eps_m.sqrt(),
    }
}

fn interior(geo: &Geometry, kappa: f64, m: &Media, lmax: usize) -> Interior {
    let cavity = RatioLadder::new(m.xi * geo.r2, lmax);
    let eps2 = geo.wall.eps_surface(kappa);
    let mu2 = geo.wall.permeability;
    let transparent = eps2 == m.eps_m && mu2 == 1.0;
    let wall = RatioLadder::new(kappa * (eps2 * mu2).sqrt() * geo.r2, lmax);
    let w = (1..=lmax)
        .map(|l| {
            if transparent {
                [0.0; 2]
            } else {
                Polarization::ALL.map(|p| interior_w(p, l, &cavity, &wall, eps2, mu2, m.eps_m))
            }
        })
        .collect();
    Interior {
        w,
        ln_i_over_k: cavity.ln_i_over_k(),
        ln_xi: m.xi.ln(),
    }
}

/// Exterior factors `w1` at a fixed set of surface radii, grown in l on
/// demand. Profiles are integrated once through all radii and only the new
/// channels are integrated when l grows.
struct ExteriorCache<'a> {
    geo: &'a Geometry,
    kappa: f64,
    eps_m: f64,
    xi: f64,
    radii: Vec<f64>,
    /// `[radius][l - 1]`
    w: Vec<Vec<[f64; 2]>>,
}

impl<'a> ExteriorCache<'a> {
    fn new(geo: &'a Geometry, kappa: f64, m: &Media, radii: Vec<f64>) -> Self {
        let n = radii.len();
        ExteriorCache {
            geo,
            kappa,
            eps_m: m.eps_m,
            xi: m.xi,
            radii,
            w: vec![Vec::new(); n],
        }
    }

    fn extend_to(&mut self, lmax: usize) -> Result<()> {
        let have = self.w[0].len();
        if lmax <= have {
            return Ok(());
        }
        if self.geo.sphere.is_homogeneous() {
            let eps1 = self.geo.sphere.eps_surface(self.kappa);
            for (k, &r) in self.radii.iter().enumerate() {
                self.w[k] = if eps1 == self.eps_m {
                    vec![[0.0; 2]; lmax]
                } else {
                    let outside = RatioLadder::new(self.xi * r, lmax);
                    let inside = RatioLadder::new(self.kappa * eps1.sqrt() * r, lmax);
                    (1..=lmax)
                        .map(|l| Polarization::ALL.map(|p| exterior_w(p, l, &outside, &inside, eps1, self.eps_m)))
                        .collect()
                };
            }
        } else {
            let more = profile_w_at(&self.geo.sphere, self.kappa, &self.radii, self.eps_m, have + 1..=lmax)?;
            for (k, extra) in more.into_iter().enumerate() {
                self.w[k].extend(extra);
            }
        }
        Ok(())
    }
}

struct Products {
    channels: Vec<[Channel; 2]>,
    max_product: f64,
    min_product: f64,
}

/// Energy (and optionally closed-form slope) summands for l = 1..=lmax
/// with the sphere surface at `r`.
fn channels_at(
    geo: &Geometry,
    kappa: f64,
    r: f64,
    m: &Media,
    inner: &Interior,
    w1: &[[f64; 2]],
    lmax: usize,
    with_slope: bool,
) -> Result<Products> {
    let outside = RatioLadder::new(m.xi * r, lmax + 1);
    let ln_ik = outside.ln_i_over_k();
    let ln_i = if with_slope { outside.ln_i_scaled() } else { Vec::new() };
    let eps_surface = geo.sphere.eps_surface(kappa);
    let mut max_product = f64::NEG_INFINITY;
    let mut min_product = f64::INFINITY;
    let mut channels = Vec::with_capacity(lmax);
    for l in 1..=lmax {
        let deg = (2 * l + 1) as f64;
        let growth = ln_ik[l] - inner.ln_i_over_k[l];
        let mut pair = [Channel::default(); 2];
        for pol in Polarization::ALL {
            let (a, b) = (w1[l - 1][pol.index()], inner.w[l - 1][pol.index()]);
            let product = a * b * growth.exp();
            if !(product < 1.0) {
                return Err(CasimirError::Contraction {
                    ell: l,
                    polarization: pol,
                    kappa,
                    product,
                });
            }
            max_product = max_product.max(product);
            min_product = min_product.min(product);
            let ch = &mut pair[pol.index()];
            ch.energy = deg * (-product).ln_1p();
            ch.linear = -deg * product;
            if with_slope && b != 0.0 {
                let mant = slope_mantissa(pol, l, &outside, m.xi, r, a, eps_surface, m.eps_m);
                let t2_dt1 = b * mant * (inner.ln_xi - inner.ln_i_over_k[l] + ln_i_half_sq(ln_i[l], outside.x())).exp();
                ch.slope = -deg * t2_dt1 / (1.0 - product);
            }
        }
        channels.push(pair);
    }
    Ok(Products {
        channels,
        max_product,
        min_product,
    })
}

/// Index (l) at which the tail criterion is met, and the relative size of
/// the last term.
fn truncation(channels: &[[Channel; 2]], policy: &EllPolicy, with_slope: bool) -> Option<(usize, f64)> {
    let mut run_e = NeumaierSum::new();
    let mut run_s = NeumaierSum::new();
    let mut count = 0;
    for (j, pair) in channels.iter().enumerate() {
        let ce = pair[0].energy + pair[1].energy;
        let cs = pair[0].slope + pair[1].slope;
        run_e.add(ce);
        run_s.add(cs);
        let small_e = ce.abs() <= policy.tolerance * run_e.value().abs();
        let small_s = !with_slope || cs.abs() <= policy.tolerance * run_s.value().abs();
        if small_e && small_s {
            count += 1;
            if count >= policy.consecutive {
                let rel = if run_e.value() == 0.0 { 0.0 } else { (ce / run_e.value()).abs() };
                return Some((j + 1, rel));
            }
        } else {
            count = 0;
        }
    }
    None
}

/// Whether the whole node is below double precision relevance.
pub(crate) fn negligible(geo: &Geometry, kappa: f64) -> bool {
    let m = media(geo, kappa);
    2.0 * m.xi * geo.gap() - (geo.r2 / geo.r1).ln() > SKIP_EXPONENT
}

/// Evaluate every channel needed at `kappa`. With `fd_step = Some(h)` the
/// slopes are computed both in closed form and by Richardson-refined
/// central differences with steps `h` and `h/2`.
pub(crate) fn evaluate_node(
    geo: &Geometry,
    kappa: f64,
    policy: &EllPolicy,
    fd_step: Option<f64>,
) -> Result<NodeResult> {
    if negligible(geo, kappa) {
        return Ok(NodeResult::default());
    }
    let m = media(geo, kappa);
    let with_slope = fd_step.is_some();
    let r1 = geo.r1;
    let radii = match fd_step {
        Some(h) => vec![r1 - h, r1 - 0.5 * h, r1, r1 + 0.5 * h, r1 + h],
        None => vec![r1],
    };
    let centre = radii.len() / 2;
    let mut ext = ExteriorCache::new(geo, kappa, &m, radii);
    let cap = policy.l_max;
    let mut lmax = L_START.min(cap);
    loop {
        ext.extend_to(lmax)?;
        let inner = interior(geo, kappa, &m, lmax);
        let center = channels_at(geo, kappa, r1, &m, &inner, &ext.w[centre], lmax, with_slope)?;
        let (lt, tail, capped) = match truncation(&center.channels, policy, with_slope) {
            Some((lt, tail)) => (lt, tail, None),
            None if lmax >= cap => {
                let (tail, bound) = capped_tail(&center.channels, m.xi * geo.r2, cap);
                (cap, tail, Some(bound))
            }
            None => {
                lmax = (2 * lmax).min(cap);
                continue;
            }
        };
        let mut channels = center.channels;
        channels.truncate(lt);
        if let Some(h) = fd_step {
            let e = |k: usize| -> Result<Vec<[Channel; 2]>> {
                Ok(channels_at(geo, kappa, ext.radii[k], &m, &inner, &ext.w[k], lt, false)?.channels)
            };
            let (m1, m2, p2, p1) = (e(0)?, e(1)?, e(3)?, e(4)?);
            for (j, pair) in channels.iter_mut().enumerate() {
                for k in 0..2 {
                    let d1 = (p1[j][k].energy - m1[j][k].energy) / (2.0 * h);
                    let d2 = (p2[j][k].energy - m2[j][k].energy) / h;
                    pair[k].fd = (4.0 * d2 - d1) / 3.0;
                }
            }
        }
        return Ok(NodeResult {
            channels,
            max_product: center.max_product,
            min_product: center.min_product,
            tail,
            capped,
        });
    }
}

/// Relative size of the last kept term, and rough bounds on the energy and
/// slope tails beyond the cap. Terms stay comparable up to l ~ xi r2 and
/// fall off quickly beyond, so the partial sum is scaled by the square of
/// the missing l range, with a safety factor of 10.
fn capped_tail(channels: &[[Channel; 2]], x2: f64, cap: usize) -> (f64, [f64; 2]) {
    let e: f64 = channels.iter().map(|c| c[0].energy + c[1].energy).sum();
    let s: f64 = channels.iter().map(|c| c[0].slope + c[1].slope).sum();
    let last = channels.last().map(|c| c[0].energy + c[1].energy).unwrap_or(0.0);
    let growth = 10.0 * (2.0 * x2 / cap as f64).max(1.0).powi(2);
    let tail = if e == 0.0 { 0.0 } else { (last / e).abs() };
    (tail, [growth * e.abs(), growth * s.abs()])
}

/// Per-channel summand `(2l+1) ln(1 - T1 T2)` at one frequency.
pub fn mode_summand(geometry: &Geometry, mode: Mode, kappa: f64) -> Result<f64> {
    crate::error::require_positive("kappa", kappa)?;
    geometry.validate()?;
    let l = mode.ell();
    let m = media(geometry, kappa);
    let inner = interior(geometry, kappa, &m, l);
    let mut ext = ExteriorCache::new(geometry, kappa, &m, vec![geometry.r1]);
    ext.extend_to(l)?;
    let p = channels_at(geometry, kappa, geometry.r1, &m, &inner, &ext.w[0], l, false)?;
    Ok(p.channels[l - 1][mode.polarization().index()].energy)
}

/// Small frequency used for the static limit.
pub(crate) fn static_kappa(geo: &Geometry) -> f64 {
    1e-6 / geo.gap()
}

/// kappa -> 0 limit of [`mode_summand`], two-point Richardson
/// extrapolation (quadratic leading correction) from
/// `kappa_e = 1e-6 / (r2 - r1)` and `kappa_e / 2`.
pub fn static_limit_summand(geometry: &Geometry, mode: Mode) -> Result<f64> {
    let k = static_kappa(geometry);
    let a = mode_summand(geometry, mode, k)?;
    let b = mode_summand(geometry, mode, 0.5 * k)?;
    extrapolate_static(a, b)
}

pub(crate) fn extrapolate_static(at_k: f64, at_half: f64) -> Result<f64> {
    let unstable = !(at_k.is_finite() && at_half.is_finite())
        || at_k * at_half < 0.0
        || at_half.abs() > (1.0 + 1e-3) * at_k.abs();
    if unstable {
        return Err(CasimirError::Convergence {
            what: "static extrapolation",
            detail: format!("values {at_k:e} (kappa_e) and {at_half:e} (kappa_e/2) do not settle"),
        });
    }
    Ok((4.0 * at_half - at_k) / 3.0)
}
