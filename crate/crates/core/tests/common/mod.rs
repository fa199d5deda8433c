//! Reference implementations used only by the tests. None of this shares
//! code with the library: Bessel functions come from their elementary
//! closed forms (l <= 3) and amplitudes from direct matching of tangential
//! fields at each interface.

#![allow(dead_code)]

/// Modified spherical Bessel i_l, l <= 3: power series below x = 2,
/// elementary closed form above.
pub fn i_l(l: usize, x: f64) -> f64 {
    if x < 2.0 {
        // sum_k x^{l+2k} / (2^k k! (2l+2k+1)!!)
        let mut dfact = 1.0;
        for j in (1..=2 * l + 1).step_by(2) {
            dfact *= j as f64;
        }
        let mut term = x.powi(l as i32) / dfact;
        let mut sum = term;
        for k in 1..60 {
            term *= x * x / (2.0 * k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        return sum;
    }
    let (s, c) = (x.sinh(), x.cosh());
    match l {
        0 => s / x,
        1 => (x * c - s) / (x * x),
        2 => ((x * x + 3.0) * s - 3.0 * x * c) / x.powi(3),
        3 => ((x.powi(3) + 15.0 * x) * c - (6.0 * x * x + 15.0) * s) / x.powi(4),
        _ => panic!("oracle covers l <= 3"),
    }
}

/// Modified spherical Bessel k_l with k_0 = e^{-x}/x, l <= 4.
pub fn k_l(l: usize, x: f64) -> f64 {
    let e = (-x).exp();
    match l {
        0 => e / x,
        1 => e * (x + 1.0) / (x * x),
        2 => e * (x * x + 3.0 * x + 3.0) / x.powi(3),
        3 => e * (x.powi(3) + 6.0 * x * x + 15.0 * x + 15.0) / x.powi(4),
        4 => e * (x.powi(4) + 10.0 * x.powi(3) + 45.0 * x * x + 105.0 * x + 105.0) / x.powi(5),
        _ => panic!("oracle covers l <= 4"),
    }
}

/// i_l'(x) from i_l' = i_{l-1} - (l+1) i_l / x (i_0' = i_1).
pub fn di_l(l: usize, x: f64) -> f64 {
    if l == 0 {
        i_l(1, x)
    } else {
        i_l(l - 1, x) - (l as f64 + 1.0) * i_l(l, x) / x
    }
}

/// k_l'(x) from k_l' = -k_{l-1} - (l+1) k_l / x (k_0' = -k_1).
pub fn dk_l(l: usize, x: f64) -> f64 {
    if l == 0 {
        -k_l(1, x)
    } else {
        -k_l(l - 1, x) - (l as f64 + 1.0) * k_l(l, x) / x
    }
}

// Riccati forms s(y) = y i_l(y), c(y) = y k_l(y) and their derivatives.
fn s(l: usize, y: f64) -> f64 {
    y * i_l(l, y)
}
fn ds(l: usize, y: f64) -> f64 {
    i_l(l, y) + y * di_l(l, y)
}
fn c(l: usize, y: f64) -> f64 {
    y * k_l(l, y)
}
fn dc(l: usize, y: f64) -> f64 {
    k_l(l, y) + y * dk_l(l, y)
}

/// Weight of the derivative in the tangential-field condition.
fn weight(te: bool, eps: f64, mu: f64) -> f64 {
    if te {
        1.0 / mu
    } else {
        1.0 / eps
    }
}

/// Exterior amplitude of a homogeneous sphere, in the library's
/// normalization (outgoing coefficient divided by xi, TE sign flipped).
pub fn sphere_amplitude(te: bool, l: usize, kappa: f64, r: f64, eps1: f64, eps_m: f64) -> f64 {
    let xi = kappa * eps_m.sqrt();
    let xi1 = kappa * eps1.sqrt();
    let x = xi * r;
    let log_d = weight(te, eps1, 1.0) * xi1 * ds(l, xi1 * r) / s(l, xi1 * r);
    let w = weight(te, eps_m, 1.0);
    let cc = (w * xi * ds(l, x) - log_d * s(l, x)) / (log_d * c(l, x) - w * xi * dc(l, x));
    (if te { -cc } else { cc }) / xi
}

/// Two-layer sphere: core `eps_c` for r < a, shell `eps_s` for a < r < b.
pub fn core_shell_amplitude(
    te: bool,
    l: usize,
    kappa: f64,
    a: f64,
    b: f64,
    eps_c: f64,
    eps_s: f64,
    eps_m: f64,
) -> f64 {
    let xi = kappa * eps_m.sqrt();
    let xs = kappa * eps_s.sqrt();
    let xc = kappa * eps_c.sqrt();
    let (wc, ws, w) = (weight(te, eps_c, 1.0), weight(te, eps_s, 1.0), weight(te, eps_m, 1.0));
    let log_d = wc * xc * ds(l, xc * a) / s(l, xc * a);
    let cs = (ws * xs * ds(l, xs * a) - log_d * s(l, xs * a))
        / (log_d * c(l, xs * a) - ws * xs * dc(l, xs * a));
    let y = xs * b;
    let log_d = ws * xs * (ds(l, y) + cs * dc(l, y)) / (s(l, y) + cs * c(l, y));
    let x = xi * b;
    let co = (w * xi * ds(l, x) - log_d * s(l, x)) / (log_d * c(l, x) - w * xi * dc(l, x));
    (if te { -co } else { co }) / xi
}

/// Interior amplitude of a cavity in a magnetodielectric half-space, in the
/// library's normalization (regular coefficient times xi, TE sign flipped).
pub fn cavity_amplitude(te: bool, l: usize, kappa: f64, r2: f64, eps2: f64, mu2: f64, eps_m: f64) -> f64 {
    let xi = kappa * eps_m.sqrt();
    let xi2 = kappa * (eps2 * mu2).sqrt();
    let x = xi * r2;
    let log_d = weight(te, eps2, mu2) * xi2 * dc(l, xi2 * r2) / c(l, xi2 * r2);
    let w = weight(te, eps_m, 1.0);
    let d = (w * xi * dc(l, x) - log_d * c(l, x)) / (log_d * s(l, x) - w * xi * ds(l, x));
    (if te { -d } else { d }) * xi
}

/// Li_4(x) for |x| <= 1 by its power series.
pub fn polylog4(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = 1.0;
    for n in 1..200_000 {
        p *= x;
        let t = p / (n as f64).powi(4);
        sum += t;
        if t.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Force per unit area between two non-dispersive half-spaces `eps1`,
/// `eps2` across a gap `d` of `eps_m` at zero temperature; positive is
/// repulsive. After scaling out the gap the wavenumber integral is a
/// polylogarithm and one angle-like integral remains, done here with
/// composite Simpson.
pub fn plate_force(d: f64, eps1: f64, eps2: f64, eps_m: f64) -> f64 {
    let x = |t: f64| -> f64 {
        let a = |e: f64| (1.0 + (e / eps_m - 1.0) * t * t).sqrt();
        let (a1, a2) = (a(eps1), a(eps2));
        let te = ((1.0 - a1) / (1.0 + a1)) * ((1.0 - a2) / (1.0 + a2));
        let tm = ((eps1 - eps_m * a1) / (eps1 + eps_m * a1)) * ((eps2 - eps_m * a2) / (eps2 + eps_m * a2));
        polylog4(te) + polylog4(tm)
    };
    // t = s^4 resolves the sharp edge near t = 0 for strong contrast
    let g = |s: f64| 4.0 * s.powi(3) * x(s.powi(4));
    let n = 4000;
    let h = 1.0 / n as f64;
    let mut acc = g(0.0) + g(1.0);
    for j in 1..n {
        acc += if j % 2 == 1 { 4.0 } else { 2.0 } * g(j as f64 * h);
    }
    let integral = acc * h / 3.0;
    let pi = std::f64::consts::PI;
    -3.0 / (16.0 * pi * pi * eps_m.sqrt() * d.powi(4)) * integral
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
