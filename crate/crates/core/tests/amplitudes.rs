mod common;

use casimir_core::energetics::{mode_summand, Geometry};
use casimir_core::media::{Dispersion, RadialProfile, ResponseModel};
use casimir_core::scattering::{
    mie_exterior, mie_interior_cavity, mode_product, t_radius_derivative, variable_phase_t, Mode,
    Polarization,
};
use casimir_core::specfun::bessel_eval;
use common::{cavity_amplitude, core_shell_amplitude, rel, sphere_amplitude};

#[test]
fn bessel_matches_elementary_forms() {
    for l in 0..=3 {
        for &z in &[0.01, 0.3, 1.0, 4.5, 20.0, 80.0] {
            let b = bessel_eval(l, z).unwrap();
            assert!(rel(b.i(), common::i_l(l, z)) < 1e-12, "i_{l}({z})");
            assert!(rel(b.k(), common::k_l(l, z)) < 1e-13, "k_{l}({z})");
            assert!(rel(b.dk(), common::dk_l(l, z)) < 1e-13, "k'_{l}({z})");
            assert!(rel(b.di(), common::di_l(l, z)) < 1e-11, "i'_{l}({z})");
        }
    }
}

#[test]
fn frozen_bessel_values() {
    let cases = [
        (5, 0.3, 2.345_766_394_332_606_1e-7, 1_289_835.585_880_632_5),
        (50, 20.0, 2.755_196_573_961_317_9e-15, 167_051_247_024.277_5),
    ];
    for (l, z, i, k) in cases {
        let b = bessel_eval(l, z).unwrap();
        assert!(rel(b.i(), i) < 1e-12);
        assert!(rel(b.k(), k) < 1e-12);
    }
    let b = bessel_eval(200, 1e-6).unwrap();
    assert!(rel(b.ln_i_scaled + 1e-6, -3767.735_347_699_008_2) < 1e-13);
    assert!(rel(bessel_eval(3, 40.0).unwrap().k(), 1.231_607_855_689_317_5e-19) < 1e-12);
}

#[test]
fn exterior_matches_boundary_matching() {
    for l in 1..=3 {
        for &kappa in &[0.05, 0.7, 3.0] {
            for &(r, e1, em) in &[(1.0, 2.0, 1.0), (1.3, 1.5, 2.5), (0.4, 9.0, 3.0)] {
                for (pol, te) in [(Polarization::TE, true), (Polarization::TM, false)] {
                    let a = mie_exterior(Mode::new(l, pol).unwrap(), kappa, r, e1, em).unwrap();
                    let o = sphere_amplitude(te, l, kappa, r, e1, em);
                    assert!(rel(a.value(), o) < 1e-9, "{pol:?} l={l} kappa={kappa}: {} vs {o}", a.value());
                }
            }
        }
    }
}

#[test]
fn frozen_exterior_values() {
    let t = |m: Mode, k, r, e, em| mie_exterior(m, k, r, e, em).unwrap().value();
    assert!(rel(t(Mode::te(1).unwrap(), 1.0, 1.0, 2.0, 1.0), 0.023_777_892_072_882_385) < 1e-12);
    assert!(rel(t(Mode::tm(1).unwrap(), 1.0, 1.0, 2.0, 1.0), 0.186_843_327_553_570_78) < 1e-12);
    assert!(rel(t(Mode::tm(3).unwrap(), 0.7, 1.3, 1.5, 2.5), -0.002_594_614_774_043_990_6) < 1e-11);
}

#[test]
fn interior_matches_boundary_matching() {
    for l in 1..=3 {
        for &kappa in &[0.05, 0.7, 3.0] {
            for &(r2, e2, mu2, em) in &[(2.0, 3.0, 1.0, 1.0), (2.0, 1.5, 3.0, 2.5), (1.1, 8.0, 1.0, 2.0)] {
                for (pol, te) in [(Polarization::TE, true), (Polarization::TM, false)] {
                    let a = mie_interior_cavity(Mode::new(l, pol).unwrap(), kappa, r2, e2, mu2, em).unwrap();
                    let o = cavity_amplitude(te, l, kappa, r2, e2, mu2, em);
                    assert!(rel(a.value(), o) < 1e-9, "{pol:?} l={l} kappa={kappa}: {} vs {o}", a.value());
                }
            }
        }
    }
}

#[test]
fn frozen_interior_values() {
    let a = mie_interior_cavity(Mode::tm(2).unwrap(), 0.5, 2.0, 3.0, 1.0, 1.0).unwrap();
    assert!(rel(a.value(), 6.106_614_937_247_982_2) < 1e-12);
    let a = mie_interior_cavity(Mode::te(2).unwrap(), 0.5, 2.0, 1.5, 3.0, 2.5).unwrap();
    assert!(rel(a.value(), -0.793_535_281_189_209_7) < 1e-12);
}

#[test]
fn perfect_conductor_wall_limit() {
    // TE amplitude of a cavity in an ideal metal is k_1(x)/i_1(x) times xi
    let a = mie_interior_cavity(Mode::te(1).unwrap(), 1.0, 2.0, 1e14, 1.0, 1.0).unwrap();
    assert!(rel(a.value(), 0.104_170_012_344_968_53) < 1e-6);
}

#[test]
fn frozen_summands() {
    let g = Geometry::new(
        1.0,
        2.0,
        ResponseModel::constant(2.0).unwrap(),
        ResponseModel::constant(3.0).unwrap(),
        ResponseModel::vacuum(),
    )
    .unwrap();
    let te = mode_summand(&g, Mode::te(1).unwrap(), 1.0).unwrap();
    let tm = mode_summand(&g, Mode::tm(1).unwrap(), 1.0).unwrap();
    assert!(rel(te, -0.001_570_865_531_193_849_4) < 1e-11, "{te}");
    assert!(rel(tm, -0.016_357_177_338_572_622) < 1e-11, "{tm}");
}

#[test]
fn mode_product_is_product_of_oracle_amplitudes() {
    for (pol, te) in [(Polarization::TE, true), (Polarization::TM, false)] {
        for l in 1..=3 {
            let m = Mode::new(l, pol).unwrap();
            let ext = mie_exterior(m, 0.8, 1.0, 4.0, 1.5).unwrap();
            let int = mie_interior_cavity(m, 0.8, 1.7, 6.0, 1.0, 1.5).unwrap();
            let p = mode_product(&ext, &int).unwrap();
            let xi = 0.8 * 1.5f64.sqrt();
            let x = xi * 1.0;
            let y = xi * 1.7;
            let prop = (common::i_l(l, x) / common::k_l(l, x)) * (common::k_l(l, y) / common::i_l(l, y));
            let expect = sphere_amplitude(te, l, 0.8, 1.0, 4.0, 1.5)
                * cavity_amplitude(te, l, 0.8, 1.7, 6.0, 1.0, 1.5)
                * common::k_l(l, x) / common::i_l(l, x)
                * common::i_l(l, y) / common::k_l(l, y)
                * prop;
            assert!(rel(p, expect) < 1e-10, "{p} vs {expect}");
            assert!(p > 0.0 && p < 1.0);
        }
    }
}

#[test]
fn small_kappa_tm_dipole() {
    // T ~ (2/3) (eps1 - eps_M)/(eps1 + 2 eps_M) kappa^2 r^3 for l = 1, TM
    let k = 1e-3;
    let t = mie_exterior(Mode::tm(1).unwrap(), k, 1.0, 2.0, 1.0).unwrap().value();
    assert!(rel(t / (k * k), 1.0 / 6.0) < 1e-5);
}

#[test]
fn core_shell_variable_phase_matches_matching() {
    let model = |ec: f64, es: f64, b: f64| {
        ResponseModel::profile(
            RadialProfile::layers(
                vec![0.6 * b],
                vec![Dispersion::Constant { eps: ec }, Dispersion::Constant { eps: es }],
                b,
            )
            .unwrap(),
        )
        .unwrap()
    };
    for &(ec, es, em) in &[(4.0, 2.0, 1.0), (1.2, 6.0, 1.5), (1.0, 3.0, 2.0)] {
        for l in 1..=3 {
            for &kappa in &[0.2, 1.5] {
                for (pol, te) in [(Polarization::TE, true), (Polarization::TM, false)] {
                    let vp = variable_phase_t(&model(ec, es, 1.2), Mode::new(l, pol).unwrap(), kappa, 1.2, em)
                        .unwrap()
                        .value();
                    let o = core_shell_amplitude(te, l, kappa, 0.72, 1.2, ec, es, em);
                    assert!(rel(vp, o) < 1e-7, "{pol:?} l={l} kappa={kappa}: {vp} vs {o}");
                }
            }
        }
    }
}

#[test]
fn derivative_matches_oracle_difference() {
    for (pol, te) in [(Polarization::TE, true), (Polarization::TM, false)] {
        for l in 1..=3 {
            let (k, r, e1, em) = (0.9, 1.1, 3.0, 1.4);
            let t = mie_exterior(Mode::new(l, pol).unwrap(), k, r, e1, em).unwrap().value();
            let d = t_radius_derivative(Mode::new(l, pol).unwrap(), k, r, t, e1, em).unwrap();
            let h = 1e-4;
            let fd = (sphere_amplitude(te, l, k, r + h, e1, em) - sphere_amplitude(te, l, k, r - h, e1, em)) / (2.0 * h);
            assert!(rel(d, fd) < 1e-6, "{pol:?} l={l}: {d} vs {fd}");
            assert!(d > 0.0);
        }
    }
}
