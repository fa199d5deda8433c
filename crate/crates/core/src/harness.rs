//! Randomized, reproducible checks of the sign and monotonicity theorems.
//!
//! Trial `i` of a suite run with seed `s` draws its configuration from a
//! ChaCha8 generator seeded with `s` on stream `i`, so any trial can be
//! rebuilt in isolation with [`trial_config`]. Draws whose sign class is
//! undefined are redrawn from the same stream and counted as skipped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energetics::{
    interaction_energy, interaction_pressure, planar_limit_force, static_limit_summand, Geometry,
    PressureMethod, SpectrumSpec,
};
use crate::error::{CasimirError, Result};
use crate::media::{Dispersion, RadialProfile, ResponseModel, Sign};
use crate::scattering::{
    mie_exterior, mie_interior_cavity, mode_product, t_radius_derivative_scaled, Mode, Polarization,
};

const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    EnergySign,
    PressureSign,
    TMonotonicity,
    Contraction,
    AEllSign,
    DlpSign,
    MagnetodielectricSign,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::EnergySign,
        TheoremId::PressureSign,
        TheoremId::TMonotonicity,
        TheoremId::Contraction,
        TheoremId::AEllSign,
        TheoremId::DlpSign,
        TheoremId::MagnetodielectricSign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::EnergySign => "energy_sign",
            TheoremId::PressureSign => "pressure_sign",
            TheoremId::TMonotonicity => "t_monotonicity",
            TheoremId::Contraction => "contraction",
            TheoremId::AEllSign => "a_ell_sign",
            TheoremId::DlpSign => "dlp_sign",
            TheoremId::MagnetodielectricSign => "magnetodielectric_sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

/// Everything needed to rebuild one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub theorem: TheoremId,
    pub seed: u64,
    pub index: u64,
    pub r1: f64,
    pub r2: f64,
    pub eps1: f64,
    /// Two-layer sphere: `(core boundary, core eps)`; the outer layer is `eps1`.
    pub core: Option<(f64, f64)>,
    pub eps2: f64,
    pub mu2: f64,
    pub eps_m: f64,
    pub ell: Option<usize>,
    pub polarization: Option<Polarization>,
    pub kappa: Option<f64>,
    /// Radii for the monotonicity suite.
    pub radii: Vec<f64>,
    pub skipped: usize,
}

impl TrialConfig {
    pub fn sphere(&self) -> Result<ResponseModel> {
        match self.core {
            None => ResponseModel::constant(self.eps1),
            Some((b, e)) => ResponseModel::profile(RadialProfile::layers(
                vec![b],
                vec![Dispersion::Constant { eps: e }, Dispersion::Constant { eps: self.eps1 }],
                self.r1,
            )?),
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(
            self.r1,
            self.r2,
            self.sphere()?,
            ResponseModel::constant(self.eps2)?.with_permeability(self.mu2)?,
            ResponseModel::constant(self.eps_m)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub config: TrialConfig,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub trials: usize,
    pub seed: u64,
    /// Undefined-sign draws that were redrawn.
    pub skipped: usize,
    pub failures: Vec<Counterexample>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The static coefficient
/// `(e1 - eM)(e2 - eM) l(l+1) / ([l e1 + (l+1) eM][l eM + (l+1) e2])`.
pub fn a_ell(ell: usize, eps1: f64, eps2: f64, eps_m: f64) -> Result<f64> {
    if ell == 0 {
        return Err(CasimirError::Domain {
            what: "ell",
            value: 0.0,
            constraint: "l >= 1",
        });
    }
    for (what, v) in [("eps1", eps1), ("eps2", eps2), ("eps_m", eps_m)] {
        if !(v >= 1.0 && v.is_finite()) {
            return Err(CasimirError::Domain {
                what,
                value: v,
                constraint: "permittivity must be >= 1",
            });
        }
    }
    let l = ell as f64;
    Ok((eps1 - eps_m) * (eps2 - eps_m) * l * (l + 1.0)
        / ((l * eps1 + (l + 1.0) * eps_m) * (l * eps_m + (l + 1.0) * eps2)))
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn draw(theorem: TheoremId, rng: &mut ChaCha8Rng, seed: u64, index: u64) -> TrialConfig {
    let r2 = 1.0;
    let r1 = rng.random_range(0.2..0.9) * r2;
    let eps_m = rng.random_range(1.0..10.0);
    let mut eps1 = rng.random_range(1.0..10.0);
    let (eps2, mu2) = if theorem == TheoremId::MagnetodielectricSign {
        (rng.random_range(1.0..eps_m), rng.random_range(1.0..5.0))
    } else {
        (rng.random_range(1.0..10.0), 1.0)
    };
    let layered = matches!(theorem, TheoremId::EnergySign | TheoremId::PressureSign)
        && rng.random_bool(0.2);
    let core = layered.then(|| (rng.random_range(0.3..0.8) * r1, rng.random_range(1.0..10.0)));
    let mut cfg = TrialConfig {
        theorem,
        seed,
        index,
        r1,
        r2,
        eps1,
        core,
        eps2,
        mu2,
        eps_m,
        ell: None,
        polarization: None,
        kappa: None,
        radii: Vec::new(),
        skipped: 0,
    };
    match theorem {
        TheoremId::Contraction => {
            cfg.ell = Some(rng.random_range(1..=20));
            cfg.polarization = Some(if rng.random_bool(0.5) { Polarization::TE } else { Polarization::TM });
            cfg.kappa = Some(log_uniform(rng, 1e-3, 1e2));
            cfg.mu2 = if rng.random_bool(0.5) { rng.random_range(1.0..5.0) } else { 1.0 };
        }
        TheoremId::AEllSign => {
            cfg.ell = Some(rng.random_range(1..=10));
        }
        TheoremId::TMonotonicity => {
            if rng.random_bool(0.05) {
                eps1 = eps_m;
                cfg.eps1 = eps1;
            }
            cfg.ell = Some(rng.random_range(1..=10));
            cfg.polarization = Some(if rng.random_bool(0.5) { Polarization::TE } else { Polarization::TM });
            cfg.kappa = Some(log_uniform(rng, 0.1, 10.0));
            let r0 = rng.random_range(0.3..1.5);
            cfg.radii = (0..5).map(|j| r0 * (1.0 + 0.25 * j as f64)).collect();
        }
        _ => {}
    }
    cfg
}

fn defined(cfg: &TrialConfig) -> bool {
    match cfg.theorem {
        // exact equality is the interesting boundary case here
        TheoremId::TMonotonicity => true,
        // the planar sign only needs strict orderings
        TheoremId::DlpSign | TheoremId::AEllSign => {
            cfg.eps1 != cfg.eps_m && cfg.eps2 != cfg.eps_m
        }
        _ => cfg
            .geometry()
            .map(|g| g.sign_class().value.is_defined())
            .unwrap_or(false),
    }
}

/// Configuration of trial `index` of `theorem` under `seed`.
pub fn trial_config(theorem: TheoremId, seed: u64, index: u64) -> TrialConfig {
    let mut rng = rng_for(seed, index);
    let mut skipped = 0;
    loop {
        let mut cfg = draw(theorem, &mut rng, seed, index);
        if defined(&cfg) || skipped >= MAX_REDRAWS {
            cfg.skipped = skipped;
            return cfg;
        }
        skipped += 1;
    }
}

fn expect_sign(what: &str, value: f64, expected: Sign) -> std::result::Result<(), String> {
    if Sign::of(value) == expected {
        Ok(())
    } else {
        Err(format!("{what} = {value:e}, expected sign {:?}", expected))
    }
}

fn run_trial(cfg: &TrialConfig) -> std::result::Result<(), String> {
    let err = |e: CasimirError| e.to_string();
    let spec = SpectrumSpec::zero_temperature();
    match cfg.theorem {
        TheoremId::EnergySign => {
            let g = cfg.geometry().map_err(err)?;
            let s = g.sign_class().value;
            let e = interaction_energy(&g, &spec).map_err(err)?;
            expect_sign("E_int", e.value, s.flip())
        }
        TheoremId::PressureSign => {
            let g = cfg.geometry().map_err(err)?;
            let s = g.sign_class().value;
            let p = interaction_pressure(&g, &spec, PressureMethod::CalogeroAnalytic).map_err(err)?;
            expect_sign("p_int", p.value, s)
        }
        TheoremId::MagnetodielectricSign => {
            let g = cfg.geometry().map_err(err)?;
            let s = g.sign_class().value;
            let e = interaction_energy(&g, &spec).map_err(err)?;
            expect_sign("E_int", e.value, s.flip())?;
            let p = interaction_pressure(&g, &spec, PressureMethod::CalogeroAnalytic).map_err(err)?;
            expect_sign("p_int", p.value, s)
        }
        TheoremId::Contraction => {
            let g = cfg.geometry().map_err(err)?;
            let s = g.sign_class().value;
            let mode = Mode::new(cfg.ell.unwrap_or(1), cfg.polarization.unwrap_or(Polarization::TM)).map_err(err)?;
            let kappa = cfg.kappa.unwrap_or(1.0);
            let a = mie_exterior(mode, kappa, cfg.r1, cfg.eps1, cfg.eps_m).map_err(err)?;
            let b = mie_interior_cavity(mode, kappa, cfg.r2, cfg.eps2, cfg.mu2, cfg.eps_m).map_err(err)?;
            let p = mode_product(&a, &b).map_err(err)?;
            let signed = s.as_i8() as f64 * p;
            if (0.0..1.0).contains(&signed) {
                Ok(())
            } else {
                Err(format!("s * T1 T2 = {signed:e} outside [0, 1)"))
            }
        }
        TheoremId::AEllSign => {
            let g = cfg.geometry().map_err(err)?;
            let l = cfg.ell.unwrap_or(1);
            let a = a_ell(l, cfg.eps1, cfg.eps2, cfg.eps_m).map_err(err)?;
            let h = 1e-4 * g.gap();
            let summand = |r1: f64| -> std::result::Result<f64, String> {
                let gg = g.with_r1(r1).map_err(err)?;
                let mut t = 0.0;
                for pol in Polarization::ALL {
                    t += static_limit_summand(&gg, Mode::new(l, pol).map_err(err)?).map_err(err)?;
                }
                Ok(t)
            };
            let slope = (summand(g.r1 + h)? - summand(g.r1 - h)?) / (2.0 * h);
            let pressure = -slope / (4.0 * std::f64::consts::PI * g.r1 * g.r1);
            if Sign::of(pressure) == Sign::of(a) {
                Ok(())
            } else {
                Err(format!("A_l = {a:e} but static l-pressure = {pressure:e}"))
            }
        }
        TheoremId::DlpSign => {
            let d = cfg.r2 - cfg.r1;
            let ladder = [10.0 * d, 30.0 * d, 100.0 * d];
            let res = planar_limit_force(d, cfg.eps1, cfg.eps2, cfg.eps_m, &ladder, &spec).map_err(err)?;
            let expected = Sign::of(-(cfg.eps1 - cfg.eps_m) * (cfg.eps2 - cfg.eps_m));
            expect_sign("planar force", res.force, expected)
        }
        TheoremId::TMonotonicity => monotonicity_trial(cfg),
    }
}

fn monotonicity_trial(cfg: &TrialConfig) -> std::result::Result<(), String> {
    let err = |e: CasimirError| e.to_string();
    let mode = Mode::new(cfg.ell.unwrap_or(1), cfg.polarization.unwrap_or(Polarization::TE)).map_err(err)?;
    let kappa = cfg.kappa.unwrap_or(1.0);
    let s1 = Sign::of(cfg.eps1 - cfg.eps_m);
    for &r in &cfg.radii {
        let amp = mie_exterior(mode, kappa, r, cfg.eps1, cfg.eps_m).map_err(err)?;
        let d = t_radius_derivative_scaled(&amp, cfg.eps1, cfg.eps_m).map_err(err)?;
        let h = 1e-5 * r;
        let t = |rr: f64| mie_exterior(mode, kappa, rr, cfg.eps1, cfg.eps_m).map(|a| a.value());
        let fd = (t(r + h).map_err(err)? - t(r - h).map_err(err)?) / (2.0 * h);
        let closed = d.value();
        if s1 == Sign::Undefined {
            if closed != 0.0 || fd != 0.0 {
                return Err(format!("eps1 = eps_M but dT/dr = {closed:e} (fd {fd:e}) at r = {r}"));
            }
            continue;
        }
        if Sign::of(closed) != s1 || Sign::of(fd) != s1 {
            return Err(format!("dT/dr = {closed:e}, fd {fd:e} at r = {r}; expected sign {s1:?}"));
        }
        if (closed - fd).abs() > 1e-5 * closed.abs() {
            return Err(format!("dT/dr = {closed:e} vs fd {fd:e} at r = {r}"));
        }
    }
    Ok(())
}

fn run(theorem: TheoremId, trials: usize, seed: u64) -> Result<TheoremReport> {
    if trials == 0 {
        return Err(CasimirError::InvalidModel("a suite needs at least one trial".into()));
    }
    let outcomes: Vec<(TrialConfig, std::result::Result<(), String>)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = trial_config(theorem, seed, i);
            let r = run_trial(&cfg);
            (cfg, r)
        })
        .collect();
    let skipped = outcomes.iter().map(|(c, _)| c.skipped).sum();
    let failures = outcomes
        .into_iter()
        .filter_map(|(config, r)| r.err().map(|detail| Counterexample { config, detail }))
        .collect();
    Ok(TheoremReport {
        theorem_id: theorem,
        trials,
        seed,
        skipped,
        failures,
    })
}

/// Re-run one recorded trial; `Some(detail)` when it fails.
pub fn replay_trial(cfg: &TrialConfig) -> Option<String> {
    run_trial(cfg).err()
}

/// Run `trials` randomized checks of one theorem.
pub fn run_sign_suite(theorem: TheoremId, trials: usize, seed: u64) -> Result<TheoremReport> {
    run(theorem, trials, seed)
}

/// Closed-form and finite-difference radial slopes of the exterior
/// amplitude at five radii per trial, checked for sign and agreement.
pub fn run_monotonicity_suite(trials: usize, seed: u64) -> Result<TheoremReport> {
    run(TheoremId::TMonotonicity, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn a_ell_examples() {
        assert_eq!(a_ell(1, 2.0, 3.0, 1.0).unwrap(), 1.0 / 7.0);
        assert_eq!(a_ell(3, 1.5, 3.0, 1.5).unwrap(), 0.0);
        let big = a_ell(1000, 2.0, 3.0, 1.5).unwrap();
        assert_relative_eq!(big, 0.5 * 1.5 / (3.5 * 4.5), max_relative = 2e-3);
        assert!(a_ell(0, 2.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn trials_are_reproducible() {
        for t in TheoremId::ALL {
            assert_eq!(trial_config(t, 7, 3), trial_config(t, 7, 3));
            assert_ne!(trial_config(t, 7, 3), trial_config(t, 7, 4));
            assert_eq!(TheoremId::from_name(t.name()), Some(t));
        }
    }

    #[test]
    fn magnetodielectric_draws_are_minus() {
        for i in 0..20 {
            let c = trial_config(TheoremId::MagnetodielectricSign, 1, i);
            let g = c.geometry().unwrap();
            assert_eq!(g.sign_class().wall.value, Sign::Minus);
        }
    }

    #[test]
    fn small_suites_pass() {
        for t in [TheoremId::Contraction, TheoremId::TMonotonicity, TheoremId::AEllSign] {
            let r = run_sign_suite(t, 20, 11).unwrap();
            assert!(r.passed(), "{:?}", r.failures);
        }
    }
}
