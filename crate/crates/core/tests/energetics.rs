mod common;

use casimir_core::energetics::{
    dilute_self_energy, dilute_self_free_energy, interaction_energy, interaction_pressure,
    matsubara_free_energy, planar_limit_force, self_pressure_crossover, static_limit_summand,
    total_pressure, Geometry, PressureMethod, SpectrumSpec,
};
use casimir_core::media::{
    classify_sign, permittivity_at, permittivity_profile_at, Dispersion, RadialProfile,
    ResponseModel, Sign,
};
use casimir_core::scattering::Mode;
use casimir_core::CasimirError;
use common::rel;
use std::f64::consts::PI;

fn geometry(e1: f64, e2: f64, em: f64, r1: f64, r2: f64) -> Geometry {
    Geometry::new(
        r1,
        r2,
        ResponseModel::constant(e1).unwrap(),
        ResponseModel::constant(e2).unwrap(),
        ResponseModel::constant(em).unwrap(),
    )
    .unwrap()
}

#[test]
fn permittivity_examples() {
    assert_eq!(permittivity_at(&ResponseModel::vacuum(), 3.0).unwrap(), 1.0);
    let drude = ResponseModel::drude(1.0, 0.1).unwrap();
    assert!(rel(permittivity_at(&drude, 1.0).unwrap(), 1.0 + 1.0 / 1.1) < 1e-15);
    let lorentz = ResponseModel::lorentz(4.0, 2.0).unwrap();
    assert!((permittivity_at(&lorentz, 1e9).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(
        permittivity_at(&drude, 0.0),
        Err(CasimirError::Domain { .. })
    ));
}

#[test]
fn profile_examples() {
    let two = ResponseModel::profile(
        RadialProfile::layers(
            vec![0.5],
            vec![Dispersion::Constant { eps: 3.0 }, Dispersion::Constant { eps: 2.0 }],
            1.0,
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(permittivity_profile_at(&two, 1.0, 0.75).unwrap(), 2.0);
    assert_eq!(permittivity_profile_at(&two, 1.0, 0.25).unwrap(), 3.0);
    let lin = ResponseModel::profile(RadialProfile::linear(1.0, 2.0, 1.0).unwrap()).unwrap();
    assert!(rel(permittivity_profile_at(&lin, 1.0, 0.5).unwrap(), 1.5) < 1e-15);
    assert!(permittivity_profile_at(&lin, 1.0, 1.5).is_err());
}

#[test]
fn sign_examples() {
    let c = |e| ResponseModel::constant(e).unwrap();
    assert_eq!(classify_sign(&c(2.0), &c(1.0), &[1.0], &[0.0]).value, Sign::Plus);
    assert_eq!(classify_sign(&c(1.5), &c(1.5), &[1.0], &[0.0]).value, Sign::Undefined);
    let drude = ResponseModel::drude(1.0, 0.1).unwrap();
    assert_eq!(
        classify_sign(&drude, &c(1.5), &[0.1, 1.0, 10.0], &[0.0]).value,
        Sign::Undefined
    );
    assert_eq!(
        classify_sign(&c(1.2), &c(2.0), &[0.1, 1.0, 10.0], &[0.0]).value,
        Sign::Minus
    );
}

#[test]
fn energy_and_pressure_examples() {
    let spec = SpectrumSpec::zero_temperature();
    let g = geometry(2.0, 3.0, 1.0, 1.0, 2.0);
    let e = interaction_energy(&g, &spec).unwrap();
    assert!(e.value < 0.0 && e.converged);
    assert!(rel(e.ledger_total(), e.value) < 1e-12);
    let p = interaction_pressure(&g, &spec, PressureMethod::CalogeroAnalytic).unwrap();
    assert!(p.value > 0.0);
    let p = interaction_pressure(&geometry(1.2, 3.0, 2.0, 1.0, 2.0), &spec, PressureMethod::FiniteDifference).unwrap();
    assert!(p.value < 0.0);
}

#[test]
fn transparent_sphere_gives_zero() {
    let spec = SpectrumSpec::zero_temperature().accepting_undefined_sign();
    let g = geometry(1.5, 3.0, 1.5, 1.0, 2.0);
    assert_eq!(interaction_energy(&g, &spec).unwrap().value, 0.0);
    let strict = interaction_energy(&g, &SpectrumSpec::zero_temperature());
    assert!(matches!(strict, Err(CasimirError::UndefinedSign)));
}

#[test]
fn energy_shrinks_with_sphere() {
    let spec = SpectrumSpec::zero_temperature();
    let mut last = f64::INFINITY;
    for r1 in [1.6, 1.3, 1.0, 0.7] {
        let e = interaction_energy(&geometry(2.0, 3.0, 1.0, r1, 2.0), &spec).unwrap().value;
        assert!(e.abs() < last);
        last = e.abs();
    }
}

#[test]
fn static_summand_tm_dipole_is_negative() {
    let g = geometry(2.0, 3.0, 1.0, 1.0, 2.0);
    let s = static_limit_summand(&g, Mode::tm(1).unwrap()).unwrap();
    // (2l+1) ln(1 - T1 T2) from the oracle at a small frequency;
    // corrections are O(kappa^2)
    let k = 1e-3;
    let a = common::sphere_amplitude(false, 1, k, 1.0, 2.0, 1.0) * common::cavity_amplitude(false, 1, k, 2.0, 3.0, 1.0, 1.0);
    assert!(s < 0.0);
    assert!(rel(s, 3.0 * (1.0 - a).ln()) < 1e-5, "{s} vs {}", 3.0 * (1.0 - a).ln());
}

#[test]
fn dilute_self_energy_values() {
    let v = dilute_self_energy(1.1, 1.0).unwrap();
    assert!(rel(v.value, 23.0 * 0.01 / (1536.0 * PI)) < 1e-13);
    assert!(v.warning.is_none());
    assert_eq!(dilute_self_energy(1.0, 1.0).unwrap().value, 0.0);
    assert_eq!(dilute_self_free_energy(1.1, 1.0, 0.0).unwrap().value, v.value);
    let f = dilute_self_free_energy(1.1, 1.0, 0.1).unwrap();
    let expect = 0.01 * (23.0 / (1536.0 * PI) + 7.0 / 270.0 * PI.powi(3) * 1e-4);
    assert!(rel(f.value, expect) < 1e-13);
    assert!(rel(f.value, 4.8468e-5) < 1e-4);
    assert!(dilute_self_energy(2.0, 1.0).unwrap().warning.is_some());
}

#[test]
fn crossover_is_root_of_self_pressure() {
    let t = self_pressure_crossover(1.0).unwrap();
    let p = |t: f64| dilute_self_free_energy(1.1, 1.0, t).unwrap().pressure;
    assert!(p(0.99 * t) > 0.0 && p(1.01 * t) < 0.0);
    let closed = (8280.0 / (43008.0 * PI.powi(4))).powf(0.25);
    assert!(rel(t, closed) < 1e-9);
    assert!(rel(self_pressure_crossover(2.0).unwrap(), closed / 2.0) < 1e-9);
}

#[test]
fn total_pressure_dilute_sphere_is_outward() {
    let g = geometry(1.1, 3.0, 1.0, 1.0, 2.0);
    let p = total_pressure(&g, &SpectrumSpec::zero_temperature()).unwrap();
    assert!(p.value > 0.0);
    let parts = p.diagnostics.self_part.unwrap() + p.diagnostics.interaction_part.unwrap();
    assert!(rel(parts, p.value) < 1e-12);
}

#[test]
fn low_temperature_free_energy_approaches_energy() {
    let g = geometry(2.0, 3.0, 1.0, 1.0, 2.0);
    let e = interaction_energy(&g, &SpectrumSpec::zero_temperature()).unwrap().value;
    let f = matsubara_free_energy(&g, &SpectrumSpec::matsubara(1e-3).unwrap()).unwrap().value;
    assert!(rel(f, e) < 1e-2, "{f} vs {e}");
}

#[test]
fn planar_limit_matches_plate_formula() {
    let spec = SpectrumSpec::zero_temperature();
    for &(e1, e2, em) in &[(2.0, 3.0, 1.0), (1.5, 4.0, 2.5)] {
        let pl = planar_limit_force(1.0, e1, e2, em, &[10.0, 30.0, 100.0], &spec).unwrap();
        let plate = common::plate_force(1.0, e1, e2, em);
        eprintln!("{e1} {e2} {em}: {} (linear {}) vs plates {plate}", pl.force, pl.linear_estimate);
        assert!(rel(pl.force, plate) < 1e-5);
        assert_eq!(pl.sign, Sign::of(plate));
    }
}

#[test]
fn plate_oracle_perfect_conductor_limit() {
    let f = common::plate_force(1.0, 1e12, 1e12, 1.0);
    assert!(rel(f, -0.041_122_147_872_961_7) < 1e-9, "{f}");
    assert!(rel(f, -PI * PI / 240.0) < 1e-4);
}
