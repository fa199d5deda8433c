//! Run configuration.
//!
//! The document is TOML with these sections:
//!
//! ```toml
//! [geometry]
//! r1 = 1.0
//! r2 = 2.0
//! sphere = "glass"      # names declared under [media.*]; "vacuum" is implicit
//! wall = "metal"
//! medium = "vacuum"
//!
//! [media.glass]
//! kind = "constant"     # constant | drude | lorentz | tabulated | layers | linear
//! eps = 2.0
//!
//! [spectrum]            # optional
//! temperature = 0.1     # absent: zero temperature
//!
//! [task]
//! kind = "pressure"     # energy | pressure | total_pressure | free_energy | planar_limit | check
//!
//! [[sweep]]             # optional, at most two
//! parameter = "r1"      # r1 | r2 | temperature | media.NAME.FIELD
//! from = 0.2
//! to = 1.8
//! points = 17
//!
//! [output]              # optional
//! dir = "out"
//! name = "run"
//! ```
//!
//! Parsing never stops at the first problem: every unknown key, missing
//! field, unresolved reference and gate violation is collected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use casimir_core::energetics::{Frequencies, Geometry, PressureMethod, SpectrumSpec};
use casimir_core::harness::{TheoremId, TrialConfig};
use casimir_core::media::{Dispersion, RadialProfile, ResponseModel};
use thiserror::Error;
use toml::{Table, Value};

use crate::plan::{self, PlanPoint};

/// All problems found in a configuration document.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s):", self.errors.len())?;
        for e in &self.errors {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

/// Values from the command line that take precedence over the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub l_max: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediumKind {
    Constant { eps: f64 },
    Drude { plasma_frequency: f64, damping: f64 },
    Lorentz { eps_static: f64, resonance: f64 },
    Tabulated { kappa: Vec<f64>, eps: Vec<f64> },
    /// Concentric layers named by other (homogeneous) media; the last
    /// layer extends to the sphere surface.
    Layers { boundaries: Vec<f64>, layers: Vec<String> },
    /// Linear ramp from the centre to the sphere surface.
    Linear { eps_center: f64, eps_surface: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub kind: MediumKind,
    pub mu: f64,
}

impl Medium {
    fn vacuum() -> Self {
        Medium {
            kind: MediumKind::Constant { eps: 1.0 },
            mu: 1.0,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MediumKind::Constant { .. } => "constant",
            MediumKind::Drude { .. } => "drude",
            MediumKind::Lorentz { .. } => "lorentz",
            MediumKind::Tabulated { .. } => "tabulated",
            MediumKind::Layers { .. } => "layers",
            MediumKind::Linear { .. } => "linear",
        }
    }

    /// Scalar fields that a sweep may target.
    pub fn numeric_fields(&self) -> &'static [&'static str] {
        match self.kind {
            MediumKind::Constant { .. } => &["eps", "mu"],
            MediumKind::Drude { .. } => &["plasma_frequency", "damping", "mu"],
            MediumKind::Lorentz { .. } => &["eps_static", "resonance", "mu"],
            MediumKind::Tabulated { .. } | MediumKind::Layers { .. } => &["mu"],
            MediumKind::Linear { .. } => &["eps_center", "eps_surface", "mu"],
        }
    }

    pub(crate) fn set(&mut self, field: &str, value: f64) {
        let slot = match (&mut self.kind, field) {
            (_, "mu") => &mut self.mu,
            (MediumKind::Constant { eps }, "eps") => eps,
            (MediumKind::Drude { plasma_frequency, .. }, "plasma_frequency") => plasma_frequency,
            (MediumKind::Drude { damping, .. }, "damping") => damping,
            (MediumKind::Lorentz { eps_static, .. }, "eps_static") => eps_static,
            (MediumKind::Lorentz { resonance, .. }, "resonance") => resonance,
            (MediumKind::Linear { eps_center, .. }, "eps_center") => eps_center,
            (MediumKind::Linear { eps_surface, .. }, "eps_surface") => eps_surface,
            _ => unreachable!("sweep fields are checked during parsing"),
        };
        *slot = value;
    }

    fn dispersion(&self) -> Option<Dispersion> {
        Some(match &self.kind {
            MediumKind::Constant { eps } => Dispersion::Constant { eps: *eps },
            MediumKind::Drude {
                plasma_frequency,
                damping,
            } => Dispersion::Drude {
                plasma_frequency: *plasma_frequency,
                damping: *damping,
            },
            MediumKind::Lorentz {
                eps_static,
                resonance,
            } => Dispersion::LorentzOscillator {
                eps_static: *eps_static,
                resonance: *resonance,
            },
            MediumKind::Tabulated { kappa, eps } => Dispersion::Tabulated {
                kappa: kappa.clone(),
                eps: eps.clone(),
            },
            MediumKind::Layers { .. } | MediumKind::Linear { .. } => return None,
        })
    }

    pub fn constant_eps(&self) -> Option<f64> {
        match self.kind {
            MediumKind::Constant { eps } => Some(eps),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    pub r1: f64,
    pub r2: f64,
    pub sphere: String,
    pub wall: String,
    pub medium: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub temperature: Option<f64>,
    pub n_kappa: usize,
    pub n_kappa_max: usize,
    pub tolerance: Option<f64>,
    pub n_max: usize,
    pub l_max: usize,
    pub ell_tolerance: f64,
    pub accept_undefined_sign: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        let zero_t = SpectrumSpec::zero_temperature();
        let (n_kappa, n_kappa_max) = match zero_t.frequencies {
            Frequencies::ZeroTemperature {
                n_kappa, n_kappa_max, ..
            } => (n_kappa, n_kappa_max),
            Frequencies::Matsubara { .. } => unreachable!(),
        };
        SpectrumConfig {
            temperature: None,
            n_kappa,
            n_kappa_max,
            tolerance: None,
            n_max: 100_000,
            l_max: zero_t.ell.l_max,
            ell_tolerance: zero_t.ell.tolerance,
            accept_undefined_sign: false,
        }
    }
}

impl SpectrumConfig {
    /// Spectrum at the given temperature (`None` or 0: zero temperature).
    pub fn spec(&self, temperature: Option<f64>) -> casimir_core::Result<SpectrumSpec> {
        let mut s = match temperature {
            Some(t) if t != 0.0 => {
                let mut s = SpectrumSpec::matsubara(t)?;
                if let Frequencies::Matsubara { n_max, .. } = &mut s.frequencies {
                    *n_max = self.n_max;
                }
                s
            }
            _ => {
                let mut s = SpectrumSpec::zero_temperature();
                if let Frequencies::ZeroTemperature {
                    n_kappa, n_kappa_max, ..
                } = &mut s.frequencies
                {
                    *n_kappa = self.n_kappa;
                    *n_kappa_max = self.n_kappa_max;
                }
                s
            }
        };
        if let Some(tol) = self.tolerance {
            s = s.with_tolerance(tol);
        }
        s = s.with_l_max(self.l_max);
        s.ell.tolerance = self.ell_tolerance;
        s.accept_undefined_sign = self.accept_undefined_sign;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Energy,
    Pressure { method: PressureMethod },
    TotalPressure,
    FreeEnergy,
    /// Radii of the ladder in units of the gap `r2 - r1`.
    PlanarLimit { ladder: Vec<f64> },
    Check {
        theorems: Vec<TheoremId>,
        trials: usize,
        seed: u64,
        /// Re-run one recorded trial instead of a suite.
        replay: Option<TrialConfig>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Energy => "energy",
            Task::Pressure { .. } => "pressure",
            Task::TotalPressure => "total_pressure",
            Task::FreeEnergy => "free_energy",
            Task::PlanarLimit { .. } => "planar_limit",
            Task::Check { .. } => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Absent only for the `check` task.
    pub geometry: Option<GeometrySpec>,
    pub media: BTreeMap<String, Medium>,
    pub spectrum: SpectrumConfig,
    pub task: Task,
    pub sweeps: Vec<Sweep>,
    pub output: OutputSpec,
}

impl RunConfig {
    /// Every point of the sweep grid (a single point without sweeps),
    /// first sweep varying slowest.
    pub fn plan(&self) -> Vec<PlanPoint> {
        plan::expand(self)
    }

    pub(crate) fn medium(&self, name: &str) -> Option<&Medium> {
        self.media.get(name)
    }

    /// Core model for a named medium; profiles are attached to radius `r1`.
    pub(crate) fn model(
        media: &BTreeMap<String, Medium>,
        name: &str,
        r1: f64,
    ) -> casimir_core::Result<ResponseModel> {
        let m = &media[name];
        let base = match &m.kind {
            MediumKind::Layers { boundaries, layers } => {
                let ds = layers
                    .iter()
                    .map(|l| media[l].dispersion().expect("layers are homogeneous"))
                    .collect();
                ResponseModel::profile(RadialProfile::layers(boundaries.clone(), ds, r1)?)?
            }
            MediumKind::Linear {
                eps_center,
                eps_surface,
            } => ResponseModel::profile(RadialProfile::linear(*eps_center, *eps_surface, r1)?)?,
            _ => match m.dispersion().expect("homogeneous") {
                Dispersion::Constant { eps } => ResponseModel::constant(eps)?,
                Dispersion::Drude {
                    plasma_frequency,
                    damping,
                } => ResponseModel::drude(plasma_frequency, damping)?,
                Dispersion::LorentzOscillator {
                    eps_static,
                    resonance,
                } => ResponseModel::lorentz(eps_static, resonance)?,
                Dispersion::Tabulated { kappa, eps } => ResponseModel::tabulated(kappa, eps)?,
            },
        };
        if m.mu != 1.0 {
            base.with_permeability(m.mu)
        } else {
            Ok(base)
        }
    }

    pub(crate) fn build_geometry(
        g: &GeometrySpec,
        media: &BTreeMap<String, Medium>,
    ) -> casimir_core::Result<Geometry> {
        Geometry::new(
            g.r1,
            g.r2,
            Self::model(media, &g.sphere, g.r1)?,
            Self::model(media, &g.wall, g.r1)?,
            Self::model(media, &g.medium, g.r1)?,
        )
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

/// As [`parse_config`], with command-line overrides applied before
/// validation.
pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        errors: vec![format!("syntax error: {}", e.to_string().trim_end())],
    })?;
    let mut p = Parser::default();
    let cfg = p.document(&root, overrides);
    match cfg {
        Some(cfg) if p.errors.is_empty() => {
            p.validate_points(&cfg);
            if p.errors.is_empty() {
                Ok(cfg)
            } else {
                Err(ConfigError { errors: p.errors })
            }
        }
        _ => Err(ConfigError { errors: p.errors }),
    }
}

const MEDIUM_KINDS: [&str; 6] = ["constant", "drude", "lorentz", "tabulated", "layers", "linear"];

#[derive(Default)]
struct Parser {
    errors: Vec<String>,
}

impl Parser {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn unknown_keys(&mut self, table: &Table, ctx: &str, allowed: &[&str]) {
        for k in table.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(format!(
                    "unknown key `{k}` in [{ctx}] (expected one of: {})",
                    allowed.join(", ")
                ));
            }
        }
    }

    fn table<'a>(&mut self, parent: &'a Table, key: &str, ctx: &str) -> Option<&'a Table> {
        match parent.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.err(format!("`{key}` in {ctx} must be a section"));
                None
            }
        }
    }

    fn number(&mut self, t: &Table, key: &str, ctx: &str) -> Option<f64> {
        match t.get(key) {
            None => None,
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(v) => {
                self.err(format!("[{ctx}] {key} must be a number, found {}", v.type_str()));
                None
            }
        }
    }

    fn required_number(&mut self, t: &Table, key: &str, ctx: &str) -> Option<f64> {
        let v = self.number(t, key, ctx);
        if v.is_none() && !t.contains_key(key) {
            self.err(format!("[{ctx}] is missing `{key}`"));
        }
        v
    }

    fn count(&mut self, t: &Table, key: &str, ctx: &str) -> Option<u64> {
        match t.get(key) {
            None => None,
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as u64),
            Some(v) => {
                self.err(format!("[{ctx}] {key} must be a non-negative integer, found {v}"));
                None
            }
        }
    }

    fn string<'a>(&mut self, t: &'a Table, key: &str, ctx: &str) -> Option<&'a str> {
        match t.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(v) => {
                self.err(format!("[{ctx}] {key} must be a string, found {}", v.type_str()));
                None
            }
        }
    }

    fn required_string<'a>(&mut self, t: &'a Table, key: &str, ctx: &str) -> Option<&'a str> {
        let v = self.string(t, key, ctx);
        if v.is_none() && !t.contains_key(key) {
            self.err(format!("[{ctx}] is missing `{key}`"));
        }
        v
    }

    fn boolean(&mut self, t: &Table, key: &str, ctx: &str) -> Option<bool> {
        match t.get(key) {
            None => None,
            Some(Value::Boolean(b)) => Some(*b),
            Some(v) => {
                self.err(format!("[{ctx}] {key} must be true or false, found {}", v.type_str()));
                None
            }
        }
    }

    fn numbers(&mut self, t: &Table, key: &str, ctx: &str) -> Option<Vec<f64>> {
        match t.get(key) {
            None => None,
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for v in a {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(i) => out.push(*i as f64),
                        _ => {
                            self.err(format!("[{ctx}] {key} must be an array of numbers"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(v) => {
                self.err(format!("[{ctx}] {key} must be an array, found {}", v.type_str()));
                None
            }
        }
    }

    fn strings(&mut self, t: &Table, key: &str, ctx: &str) -> Option<Vec<String>> {
        match t.get(key) {
            None => None,
            Some(Value::Array(a)) if a.iter().all(Value::is_str) => {
                Some(a.iter().map(|v| v.as_str().unwrap_or_default().to_string()).collect())
            }
            Some(_) => {
                self.err(format!("[{ctx}] {key} must be an array of strings"));
                None
            }
        }
    }

    fn document(&mut self, root: &Table, ov: &Overrides) -> Option<RunConfig> {
        self.unknown_keys(
            root,
            "document",
            &["geometry", "media", "spectrum", "task", "sweep", "output", "replay"],
        );
        let media = self.media(root);
        let mut spectrum = self.spectrum(root);
        if let Some(l) = ov.l_max {
            spectrum.l_max = l;
        }
        if let Some(t) = ov.tolerance {
            spectrum.tolerance = Some(t);
        }
        let task = self.task(root, ov);
        let geometry = match (&task, root.contains_key("geometry")) {
            (Some(Task::Check { .. }), false) => None,
            _ => self.geometry(root, &media),
        };
        let sweeps = self.sweeps(root, &media);
        let output = self.output(root, ov);

        let task = task?;
        if !matches!(task, Task::Check { .. }) && geometry.is_none() {
            return None;
        }
        let cfg = RunConfig {
            geometry,
            media,
            spectrum,
            task,
            sweeps,
            output,
        };
        self.task_gates(&cfg);
        Some(cfg)
    }

    fn media(&mut self, root: &Table) -> BTreeMap<String, Medium> {
        let mut out = BTreeMap::new();
        out.insert("vacuum".to_string(), Medium::vacuum());
        let Some(media) = self.table(root, "media", "the document") else {
            return out;
        };
        for (name, v) in media {
            let ctx = format!("media.{name}");
            let Value::Table(t) = v else {
                self.err(format!("[{ctx}] must be a section"));
                continue;
            };
            if let Some(m) = self.medium(t, &ctx) {
                out.insert(name.clone(), m);
            }
        }
        // layer references must name homogeneous media
        let snapshot = out.clone();
        for (name, m) in &snapshot {
            if let MediumKind::Layers { layers, .. } = &m.kind {
                for l in layers {
                    match snapshot.get(l) {
                        None => self.err(format!(
                            "[media.{name}] layer `{l}` does not name a declared medium"
                        )),
                        Some(lm) if lm.dispersion().is_none() => self.err(format!(
                            "[media.{name}] layer `{l}` must be a homogeneous medium, not {}",
                            lm.kind_name()
                        )),
                        Some(lm) if lm.mu != 1.0 => {
                            self.err(format!("[media.{name}] layer `{l}` must be non-magnetic"))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        out
    }

    fn medium(&mut self, t: &Table, ctx: &str) -> Option<Medium> {
        let kind = self.required_string(t, "kind", ctx)?;
        let mu = self.number(t, "mu", ctx).unwrap_or(1.0);
        let (allowed, kind): (&[&str], Option<MediumKind>) = match kind {
            "constant" => (
                &["kind", "mu", "eps"],
                self.required_number(t, "eps", ctx).map(|eps| MediumKind::Constant { eps }),
            ),
            "drude" => {
                let wp = self.required_number(t, "plasma_frequency", ctx);
                let g = self.required_number(t, "damping", ctx);
                (
                    &["kind", "mu", "plasma_frequency", "damping"],
                    wp.zip(g).map(|(plasma_frequency, damping)| MediumKind::Drude {
                        plasma_frequency,
                        damping,
                    }),
                )
            }
            "lorentz" => {
                let e = self.required_number(t, "eps_static", ctx);
                let w = self.required_number(t, "resonance", ctx);
                (
                    &["kind", "mu", "eps_static", "resonance"],
                    e.zip(w).map(|(eps_static, resonance)| MediumKind::Lorentz {
                        eps_static,
                        resonance,
                    }),
                )
            }
            "tabulated" => {
                let k = self.numbers(t, "kappa", ctx);
                let e = self.numbers(t, "eps", ctx);
                if k.is_none() || e.is_none() {
                    self.err(format!("[{ctx}] tabulated media need `kappa` and `eps` arrays"));
                }
                (
                    &["kind", "mu", "kappa", "eps"],
                    k.zip(e).map(|(kappa, eps)| MediumKind::Tabulated { kappa, eps }),
                )
            }
            "layers" => {
                let b = self.numbers(t, "boundaries", ctx);
                let l = self.strings(t, "layers", ctx);
                if b.is_none() || l.is_none() {
                    self.err(format!("[{ctx}] layered media need `boundaries` and `layers`"));
                }
                (
                    &["kind", "mu", "boundaries", "layers"],
                    b.zip(l).map(|(boundaries, layers)| MediumKind::Layers { boundaries, layers }),
                )
            }
            "linear" => {
                let c = self.required_number(t, "eps_center", ctx);
                let s = self.required_number(t, "eps_surface", ctx);
                (
                    &["kind", "mu", "eps_center", "eps_surface"],
                    c.zip(s).map(|(eps_center, eps_surface)| MediumKind::Linear {
                        eps_center,
                        eps_surface,
                    }),
                )
            }
            other => {
                self.err(format!(
                    "[{ctx}] unknown kind `{other}` (expected one of: {})",
                    MEDIUM_KINDS.join(", ")
                ));
                return None;
            }
        };
        self.unknown_keys(t, ctx, allowed);
        let m = Medium { kind: kind?, mu };
        // homogeneous models can be checked without a geometry
        if m.dispersion().is_some() {
            if let Err(e) = RunConfig::model(&BTreeMap::from([("m".to_string(), m.clone())]), "m", 1.0) {
                self.err(format!("[{ctx}] {e}"));
            }
        }
        Some(m)
    }

    fn geometry(&mut self, root: &Table, media: &BTreeMap<String, Medium>) -> Option<GeometrySpec> {
        let Some(t) = self.table(root, "geometry", "the document") else {
            self.err("missing [geometry] section");
            return None;
        };
        let ctx = "geometry";
        self.unknown_keys(t, ctx, &["r1", "r2", "sphere", "wall", "medium"]);
        let r1 = self.required_number(t, "r1", ctx);
        let r2 = self.required_number(t, "r2", ctx);
        let mut names = Vec::new();
        for key in ["sphere", "wall", "medium"] {
            let n = self.required_string(t, key, ctx).map(str::to_string);
            if let Some(n) = &n {
                if !media.contains_key(n) {
                    self.err(format!("[geometry] {key} = \"{n}\" does not name a declared medium"));
                }
            }
            names.push(n);
        }
        let [sphere, wall, medium]: [Option<String>; 3] = names.try_into().ok()?;
        Some(GeometrySpec {
            r1: r1?,
            r2: r2?,
            sphere: sphere?,
            wall: wall?,
            medium: medium?,
        })
    }

    fn spectrum(&mut self, root: &Table) -> SpectrumConfig {
        let mut s = SpectrumConfig::default();
        let Some(t) = self.table(root, "spectrum", "the document") else {
            return s;
        };
        let ctx = "spectrum";
        self.unknown_keys(
            t,
            ctx,
            &[
                "temperature",
                "n_kappa",
                "n_kappa_max",
                "tolerance",
                "n_max",
                "l_max",
                "ell_tolerance",
                "accept_undefined_sign",
            ],
        );
        s.temperature = self.number(t, "temperature", ctx);
        if let Some(v) = self.count(t, "n_kappa", ctx) {
            s.n_kappa = v as usize;
        }
        if let Some(v) = self.count(t, "n_kappa_max", ctx) {
            s.n_kappa_max = v as usize;
        }
        s.tolerance = self.number(t, "tolerance", ctx);
        if let Some(v) = self.count(t, "n_max", ctx) {
            s.n_max = v as usize;
        }
        if let Some(v) = self.count(t, "l_max", ctx) {
            s.l_max = v as usize;
        }
        if let Some(v) = self.number(t, "ell_tolerance", ctx) {
            s.ell_tolerance = v;
        }
        if let Some(v) = self.boolean(t, "accept_undefined_sign", ctx) {
            s.accept_undefined_sign = v;
        }
        s
    }

    fn task(&mut self, root: &Table, ov: &Overrides) -> Option<Task> {
        let Some(t) = self.table(root, "task", "the document") else {
            self.err("missing [task] section");
            return None;
        };
        let ctx = "task";
        let kind = self.required_string(t, "kind", ctx)?;
        let (allowed, task): (&[&str], Option<Task>) = match kind {
            "energy" => (&["kind"], Some(Task::Energy)),
            "total_pressure" => (&["kind"], Some(Task::TotalPressure)),
            "free_energy" => (&["kind"], Some(Task::FreeEnergy)),
            "pressure" => {
                let method = match self.string(t, "method", ctx).unwrap_or("analytic") {
                    "analytic" => Some(PressureMethod::CalogeroAnalytic),
                    "finite_difference" => Some(PressureMethod::FiniteDifference),
                    other => {
                        self.err(format!(
                            "[task] unknown method `{other}` (expected analytic or finite_difference)"
                        ));
                        None
                    }
                };
                (&["kind", "method"], method.map(|method| Task::Pressure { method }))
            }
            "planar_limit" => {
                let ladder = self.numbers(t, "ladder", ctx).unwrap_or_else(|| vec![10.0, 30.0, 100.0]);
                if ladder.len() < 2
                    || ladder.windows(2).any(|w| !(w[1] > w[0]))
                    || ladder.iter().any(|x| !(*x > 0.0 && x.is_finite()))
                {
                    self.err("[task] ladder needs at least two increasing positive multiples of the gap");
                }
                (&["kind", "ladder"], Some(Task::PlanarLimit { ladder }))
            }
            "check" => {
                let theorems = match t.get("theorem") {
                    None => Some(TheoremId::ALL.to_vec()),
                    Some(Value::String(s)) if s == "all" => Some(TheoremId::ALL.to_vec()),
                    Some(Value::String(s)) => self.theorem(s).map(|id| vec![id]),
                    Some(Value::Array(a)) => {
                        let mut ids = Vec::new();
                        for v in a {
                            match v.as_str().and_then(|s| self.theorem(s)) {
                                Some(id) => ids.push(id),
                                None if !v.is_str() => {
                                    self.err("[task] theorem entries must be strings")
                                }
                                None => {}
                            }
                        }
                        Some(ids)
                    }
                    Some(_) => {
                        self.err("[task] theorem must be a name, \"all\", or an array of names");
                        None
                    }
                };
                let trials = self.count(t, "trials", ctx).unwrap_or(100) as usize;
                if trials == 0 {
                    self.err("[task] trials must be at least 1");
                }
                let seed = ov.seed.or(self.count(t, "seed", ctx)).unwrap_or(42);
                let replay = self.replay(root);
                (
                    &["kind", "theorem", "trials", "seed"],
                    theorems.map(|theorems| Task::Check {
                        theorems,
                        trials,
                        seed,
                        replay,
                    }),
                )
            }
            other => {
                self.err(format!(
                    "[task] unknown kind `{other}` (expected energy, pressure, total_pressure, free_energy, planar_limit or check)"
                ));
                return None;
            }
        };
        self.unknown_keys(t, ctx, allowed);
        if kind != "check" && root.contains_key("replay") {
            self.err("[replay] is only meaningful for the check task");
        }
        task
    }

    fn theorem(&mut self, name: &str) -> Option<TheoremId> {
        let id = TheoremId::from_name(name);
        if id.is_none() {
            let names: Vec<_> = TheoremId::ALL.iter().map(|t| t.name()).collect();
            self.err(format!(
                "[task] unknown theorem `{name}` (expected one of: {})",
                names.join(", ")
            ));
        }
        id
    }

    fn replay(&mut self, root: &Table) -> Option<TrialConfig> {
        let v = root.get("replay")?;
        match v.clone().try_into::<TrialConfig>() {
            Ok(c) => Some(c),
            Err(e) => {
                self.err(format!("[replay] is not a valid trial record: {}", e.to_string().trim_end()));
                None
            }
        }
    }

    fn sweeps(&mut self, root: &Table, media: &BTreeMap<String, Medium>) -> Vec<Sweep> {
        let Some(v) = root.get("sweep") else {
            return Vec::new();
        };
        let Value::Array(items) = v else {
            self.err("sweeps are declared as [[sweep]] array sections");
            return Vec::new();
        };
        if items.len() > 2 {
            self.err(format!("at most two [[sweep]] sections are supported, found {}", items.len()));
        }
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let ctx = format!("sweep #{}", i + 1);
            let Value::Table(t) = item else {
                self.err(format!("[{ctx}] must be a section"));
                continue;
            };
            self.unknown_keys(t, &ctx, &["parameter", "from", "to", "points", "scale"]);
            let parameter = self.required_string(t, "parameter", &ctx).map(str::to_string);
            let from = self.required_number(t, "from", &ctx);
            let to = self.required_number(t, "to", &ctx);
            let points = self.count(t, "points", &ctx);
            if points.is_none() && !t.contains_key("points") {
                self.err(format!("[{ctx}] is missing `points`"));
            }
            let scale = match self.string(t, "scale", &ctx).unwrap_or("linear") {
                "linear" => Some(Scale::Linear),
                "log" => Some(Scale::Log),
                other => {
                    self.err(format!("[{ctx}] unknown scale `{other}` (expected linear or log)"));
                    None
                }
            };
            if let Some(p) = &parameter {
                self.sweep_target(p, media, &ctx);
                if out.iter().any(|s: &Sweep| &s.parameter == p) {
                    self.err(format!("[{ctx}] parameter `{p}` is swept twice"));
                }
            }
            if points == Some(0) {
                self.err(format!("[{ctx}] points must be at least 1"));
            }
            if points == Some(1) && from != to {
                self.err(format!("[{ctx}] a single point needs from = to"));
            }
            if let (Some(Scale::Log), Some(a), Some(b)) = (scale, from, to) {
                if !(a > 0.0 && b > 0.0) {
                    self.err(format!("[{ctx}] a log sweep needs positive endpoints"));
                }
            }
            if let (Some(parameter), Some(from), Some(to), Some(points), Some(scale)) =
                (parameter, from, to, points, scale)
            {
                out.push(Sweep {
                    parameter,
                    from,
                    to,
                    points: points as usize,
                    scale,
                });
            }
        }
        out
    }

    fn sweep_target(&mut self, p: &str, media: &BTreeMap<String, Medium>, ctx: &str) {
        if matches!(p, "r1" | "r2" | "temperature") {
            return;
        }
        let parts: Vec<&str> = p.split('.').collect();
        match parts.as_slice() {
            ["media", name, field] => match media.get(*name) {
                None => self.err(format!("[{ctx}] `{p}`: no medium named `{name}`")),
                Some(m) if !m.numeric_fields().contains(field) => self.err(format!(
                    "[{ctx}] `{p}`: a {} medium has no numeric field `{field}` (expected one of: {})",
                    m.kind_name(),
                    m.numeric_fields().join(", ")
                )),
                Some(_) => {}
            },
            _ => self.err(format!(
                "[{ctx}] unknown parameter `{p}` (expected r1, r2, temperature or media.NAME.FIELD)"
            )),
        }
    }

    fn output(&mut self, root: &Table, ov: &Overrides) -> OutputSpec {
        let mut out = OutputSpec {
            dir: PathBuf::from("."),
            name: "casimir".to_string(),
        };
        if let Some(t) = self.table(root, "output", "the document") {
            let ctx = "output";
            self.unknown_keys(t, ctx, &["dir", "name", "format"]);
            if let Some(d) = self.string(t, "dir", ctx) {
                out.dir = PathBuf::from(d);
            }
            if let Some(n) = self.string(t, "name", ctx) {
                if n.is_empty() || n.contains(['/', '\\']) {
                    self.err("[output] name must be a plain, non-empty file stem");
                } else {
                    out.name = n.to_string();
                }
            }
            if let Some(f) = self.string(t, "format", ctx) {
                if f != "csv" {
                    self.err(format!("[output] unsupported format `{f}` (only csv is available)"));
                }
            }
        }
        if let Some(d) = &ov.output_dir {
            out.dir = d.clone();
        }
        out
    }

    fn task_gates(&mut self, cfg: &RunConfig) {
        let swept = |name: &str| cfg.sweeps.iter().any(|s| s.parameter == name);
        let swept_prefix = |prefix: &str| cfg.sweeps.iter().any(|s| s.parameter.starts_with(prefix));
        let has_temperature = cfg.spectrum.temperature.is_some_and(|t| t != 0.0) || swept("temperature");
        match &cfg.task {
            Task::Energy if has_temperature => self.err(
                "task energy is the zero-temperature energy; use free_energy for a finite temperature",
            ),
            Task::FreeEnergy if !has_temperature => {
                self.err("task free_energy needs [spectrum] temperature or a temperature sweep")
            }
            Task::TotalPressure => {
                if let Some(g) = &cfg.geometry {
                    let vac = cfg.medium(&g.medium).is_some_and(|m| m.constant_eps() == Some(1.0) && m.mu == 1.0);
                    if !vac || swept_prefix(&format!("media.{}.", g.medium)) {
                        self.err(format!(
                            "task total_pressure needs a vacuum gap medium (medium `{}` is not constant eps = 1)",
                            g.medium
                        ));
                    }
                    let homogeneous = cfg.medium(&g.sphere).is_some_and(|m| m.dispersion().is_some());
                    if !homogeneous {
                        self.err("task total_pressure needs a homogeneous sphere for the self-energy");
                    }
                }
            }
            Task::PlanarLimit { .. } => {
                if let Some(g) = &cfg.geometry {
                    for (role, name) in [("sphere", &g.sphere), ("wall", &g.wall), ("medium", &g.medium)] {
                        let ok = cfg.medium(name).is_some_and(|m| m.constant_eps().is_some() && m.mu == 1.0);
                        if !ok {
                            self.err(format!(
                                "task planar_limit needs constant non-magnetic media ({role} `{name}` is not)"
                            ));
                        }
                    }
                }
                if has_temperature {
                    self.err("task planar_limit is evaluated at zero temperature");
                }
            }
            Task::Check { .. } => {
                if !cfg.sweeps.is_empty() {
                    self.err("task check does not take [[sweep]] sections");
                }
            }
            _ => {}
        }
    }

    /// Build the core geometry and spectrum of every plan point.
    fn validate_points(&mut self, cfg: &RunConfig) {
        if cfg.geometry.is_none() {
            return;
        }
        let points = cfg.plan();
        let many = points.len() > 1;
        let mut seen = std::collections::BTreeSet::new();
        for p in &points {
            let prefix = if many {
                format!("sweep point {} ({}): ", p.index, p.describe())
            } else {
                String::new()
            };
            let mut problems = Vec::new();
            if let Err(e) = p.geometry() {
                problems.push(e.to_string());
            }
            if let Err(e) = cfg.spectrum.spec(p.temperature) {
                problems.push(e.to_string());
            }
            for msg in problems {
                // the same failure at every point is reported once
                if seen.insert(msg.clone()) {
                    self.err(format!("{prefix}{msg}"));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[geometry]
r1 = 1.0
r2 = 2.0
sphere = "a"
wall = "b"
medium = "vacuum"

[media.a]
kind = "constant"
eps = 2.0

[media.b]
kind = "constant"
eps = 3

[task]
kind = "pressure"
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.task, Task::Pressure { method: PressureMethod::CalogeroAnalytic });
        assert_eq!(c.geometry.as_ref().unwrap().r2, 2.0);
        assert_eq!(c.media["b"].constant_eps(), Some(3.0));
        assert_eq!(c.plan().len(), 1);
    }

    #[test]
    fn reversed_radii_name_the_invariant() {
        let text = MINIMAL.replace("r1 = 1.0", "r1 = 2.5");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.errors.len(), 1, "{e}");
        assert!(e.errors[0].contains("must be smaller than cavity radius"), "{e}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = MINIMAL
            .replace("eps = 3", "eps = 3\ncolour = \"red\"")
            .replace("wall = \"b\"", "wall = \"steel\"")
            .replace("kind = \"pressure\"", "kind = \"pressure\"\nmethod = \"guess\"");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.errors.len(), 3, "{e}");
        assert!(e.errors.iter().any(|m| m.contains("colour")));
        assert!(e.errors.iter().any(|m| m.contains("steel")));
        assert!(e.errors.iter().any(|m| m.contains("guess")));
    }

    #[test]
    fn syntax_error_reports_a_line() {
        let e = parse_config("[geometry]\nr1 = = 1\n").unwrap_err();
        assert!(e.errors[0].contains("line 2"), "{e}");
    }

    #[test]
    fn total_pressure_is_gated_on_vacuum() {
        let text = MINIMAL
            .replace("medium = \"vacuum\"", "medium = \"a\"")
            .replace("kind = \"pressure\"", "kind = \"total_pressure\"");
        let e = parse_config(&text).unwrap_err();
        assert!(e.errors.iter().any(|m| m.contains("vacuum gap medium")), "{e}");
    }

    #[test]
    fn sweep_targets_are_checked() {
        let text = format!(
            "{MINIMAL}\n[[sweep]]\nparameter = \"media.a.plasma_frequency\"\nfrom = 1\nto = 2\npoints = 3\n"
        );
        let e = parse_config(&text).unwrap_err();
        assert!(e.errors[0].contains("no numeric field"), "{e}");
        let text = format!("{MINIMAL}\n[[sweep]]\nparameter = \"media.a.eps\"\nfrom = 1.5\nto = 4\npoints = 3\n");
        assert_eq!(parse_config(&text).unwrap().plan().len(), 3);
    }

    #[test]
    fn overrides_apply_before_validation() {
        let ov = Overrides {
            l_max: Some(1_000_000),
            ..Overrides::default()
        };
        let e = parse_config_with(MINIMAL, &ov).unwrap_err();
        assert!(e.errors[0].contains("exceeds the supported cap"), "{e}");
    }

    #[test]
    fn check_needs_no_geometry() {
        let c = parse_config("[task]\nkind = \"check\"\ntheorem = \"a_ell_sign\"\ntrials = 5\n").unwrap();
        assert_eq!(
            c.task,
            Task::Check {
                theorems: vec![TheoremId::AEllSign],
                trials: 5,
                seed: 42,
                replay: None
            }
        );
    }
}
