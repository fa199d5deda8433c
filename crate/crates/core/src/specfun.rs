//! Modified spherical Bessel functions of real positive argument.
//!
//! Conventions: i_l(z) = sqrt(pi/2z) I_{l+1/2}(z) and
//! k_l(z) = sqrt(2/(pi z)) K_{l+1/2}(z), so i_0 = sinh z / z and
//! k_0 = e^{-z} / z. The Wronskian is i_l k_l' - i_l' k_l = -1/z^2.
//!
//! Everything is built from two ratio sequences that never overflow:
//!
//! * `S_l(z) = z i_{l+1}(z) / i_l(z)`, continued fraction at the top order
//!   followed by downward recurrence (upward recurrence is unstable for i);
//! * `P_l(z) = z k_{l-1}(z) / k_l(z)`, upward recurrence from
//!   `P_1 = z^2 / (1 + z)` (stable for k).
//!
//! Values are reported with the exponential factors e^{-z} (i-family) and
//! e^{z} (k-family) removed, and additionally as logarithms, because at
//! large l and tiny z the scaled values still leave the f64 range.

use serde::Serialize;

use crate::error::{CasimirError, Result};

/// Largest angular momentum accepted by the public entry points.
pub const ELL_CAP: usize = 5000;

const CF_MAX_ITER: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselPair {
    pub ell: usize,
    pub z: f64,
    /// i_l(z) e^{-z}
    pub i_scaled: f64,
    /// k_l(z) e^{z}
    pub k_scaled: f64,
    /// i_l'(z) e^{-z}
    pub di_scaled: f64,
    /// k_l'(z) e^{z}
    pub dk_scaled: f64,
    pub ln_i_scaled: f64,
    pub ln_k_scaled: f64,
    /// i_l'(z) / i_l(z)
    pub dlog_i: f64,
    /// k_l'(z) / k_l(z)
    pub dlog_k: f64,
}

impl BesselPair {
    pub fn i(&self) -> f64 {
        (self.ln_i_scaled + self.z).exp()
    }

    pub fn k(&self) -> f64 {
        (self.ln_k_scaled - self.z).exp()
    }

    pub fn di(&self) -> f64 {
        self.di_scaled * self.z.exp()
    }

    pub fn dk(&self) -> f64 {
        self.dk_scaled * (-self.z).exp()
    }

    /// i k' - i' k, from the logarithms and logarithmic derivatives, so it
    /// stays finite where the scaled values themselves do not.
    pub fn wronskian(&self) -> f64 {
        (self.ln_i_scaled + self.ln_k_scaled).exp() * (self.dlog_k - self.dlog_i)
    }
}

/// Ratio sequences at one argument, for orders `0..=lmax`.
#[derive(Debug, Clone)]
pub struct RatioLadder {
    x: f64,
    /// s[l] = x i_{l+1} / i_l, l = 0..=lmax
    s: Vec<f64>,
    /// p[l] = x k_{l-1} / k_l, l = 1..=lmax+1 (p[0] unused)
    p: Vec<f64>,
}

impl RatioLadder {
    pub fn new(x: f64, lmax: usize) -> Self {
        debug_assert!(x > 0.0);
        let x2 = x * x;
        let mut s = vec![0.0; lmax + 1];
        s[lmax] = top_ratio(x, lmax);
        for l in (1..=lmax).rev() {
            s[l - 1] = x2 / ((2 * l + 1) as f64 + s[l]);
        }
        let mut p = vec![0.0; lmax + 2];
        p[1] = x2 / (1.0 + x);
        for l in 1..=lmax {
            p[l + 1] = x2 / (p[l] + (2 * l + 1) as f64);
        }
        RatioLadder { x, s, p }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn lmax(&self) -> usize {
        self.s.len() - 1
    }

    /// x i_{l+1}(x) / i_l(x)
    pub fn s(&self, l: usize) -> f64 {
        self.s[l]
    }

    /// x k_{l-1}(x) / k_l(x), l >= 1
    pub fn p(&self, l: usize) -> f64 {
        self.p[l]
    }

    /// x i_l(x) k_l(x), from the Wronskian; lies in (0, 1/(2l+1)].
    pub fn rho(&self, l: usize) -> f64 {
        1.0 / (self.s[l] + self.x * self.x / self.p[l + 1])
    }

    /// ln(i_l(x) e^{-x}) for l = 0..=lmax.
    pub fn ln_i_scaled(&self) -> Vec<f64> {
        let x = self.x;
        let mut out = Vec::with_capacity(self.s.len());
        let mut acc = (-(-2.0 * x).exp_m1()).ln() - (2.0 * x).ln();
        out.push(acc);
        for l in 1..self.s.len() {
            acc += (self.s[l - 1] / x).ln();
            out.push(acc);
        }
        out
    }

    /// ln(k_l(x) e^{x}) for l = 0..=lmax.
    pub fn ln_k_scaled(&self) -> Vec<f64> {
        let x = self.x;
        let mut out = Vec::with_capacity(self.s.len());
        let mut acc = -x.ln();
        out.push(acc);
        for l in 1..self.s.len() {
            acc += (x / self.p[l]).ln();
            out.push(acc);
        }
        out
    }

    /// ln(i_l(x) / k_l(x)) for l = 0..=lmax, exponentials included.
    pub fn ln_i_over_k(&self) -> Vec<f64> {
        let x = self.x;
        let mut out = Vec::with_capacity(self.s.len());
        let mut acc = 2.0 * x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2;
        out.push(acc);
        for l in 1..self.s.len() {
            acc += (self.s[l - 1] * self.p[l] / (x * x)).ln();
            out.push(acc);
        }
        out
    }

    /// Full set of scaled values at order `l`.
    pub fn pair(&self, l: usize) -> BesselPair {
        let ln_i = self.ln_i_scaled()[l];
        let ln_k = self.ln_k_scaled()[l];
        self.pair_from_logs(l, ln_i, ln_k)
    }

    pub(crate) fn pair_from_logs(&self, l: usize, ln_i: f64, ln_k: f64) -> BesselPair {
        let z = self.x;
        let i_scaled = ln_i.exp();
        let k_scaled = ln_k.exp();
        let lz = l as f64 / z;
        let r = self.s[l] / z;
        let q = z / self.p[l + 1];
        BesselPair {
            ell: l,
            z,
            i_scaled,
            k_scaled,
            di_scaled: i_scaled * (r + lz),
            dk_scaled: k_scaled * (lz - q),
            ln_i_scaled: ln_i,
            ln_k_scaled: ln_k,
            dlog_i: r + lz,
            dlog_k: lz - q,
        }
    }
}

/// S_l(x) = x^2 / ((2l+3) + x^2 / ((2l+5) + ...)), modified Lentz.
fn top_ratio(x: f64, l: usize) -> f64 {
    const TINY: f64 = 1e-300;
    let a = x * x;
    let b0 = (2 * l + 3) as f64;
    let mut f = b0;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..CF_MAX_ITER {
        let b = b0 + 2.0 * j as f64;
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    a / f
}

fn check_args(ell: usize, z: f64) -> Result<()> {
    if ell > ELL_CAP {
        return Err(CasimirError::Capability { ell, cap: ELL_CAP });
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(CasimirError::Domain {
            what: "z",
            value: z,
            constraint: "argument must be positive and finite",
        });
    }
    Ok(())
}

/// i_l, k_l and first derivatives at z, exponentially scaled.
pub fn bessel_eval(ell: usize, z: f64) -> Result<BesselPair> {
    check_args(ell, z)?;
    Ok(RatioLadder::new(z, ell).pair(ell))
}

/// Which diagonal block of the radial matrices to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialFamily {
    /// regular solutions, from i_l
    Regular,
    /// outgoing solutions, from k_l
    Outgoing,
}

/// The three radial entries `(f(xi r), d/dr f(xi r), f(xi r) / r)` with
/// `r = z / xi`, for f = i_l (regular) or f = k_l (outgoing). Unscaled.
pub fn bessel_derivative_combo(ell: usize, z: f64, xi: f64, which: RadialFamily) -> Result<[f64; 3]> {
    check_args(ell, z)?;
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(CasimirError::Domain {
            what: "xi",
            value: xi,
            constraint: "wavenumber must be positive",
        });
    }
    let b = bessel_eval(ell, z)?;
    let r = z / xi;
    let (f, df) = match which {
        RadialFamily::Regular => (b.i(), b.di()),
        RadialFamily::Outgoing => (b.k(), b.dk()),
    };
    Ok([f, xi * df, f / r])
}
