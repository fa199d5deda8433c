//! Expansion of `[[sweep]]` sections into concrete evaluation points.

use std::collections::BTreeMap;

use casimir_core::energetics::Geometry;

use crate::config::{GeometrySpec, Medium, RunConfig, Scale, Sweep};

/// One fully resolved evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPoint {
    pub index: usize,
    /// Swept parameters and their values at this point, in sweep order.
    pub assignments: Vec<(String, f64)>,
    pub geometry: GeometrySpec,
    pub media: BTreeMap<String, Medium>,
    pub temperature: Option<f64>,
}

impl PlanPoint {
    pub fn geometry(&self) -> casimir_core::Result<Geometry> {
        RunConfig::build_geometry(&self.geometry, &self.media)
    }

    pub fn describe(&self) -> String {
        self.assignments
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Values of one sweep axis.
pub fn axis(s: &Sweep) -> Vec<f64> {
    if s.points == 1 {
        return vec![s.from];
    }
    let n = (s.points - 1) as f64;
    (0..s.points)
        .map(|i| {
            let t = i as f64 / n;
            if i == s.points - 1 {
                return s.to;
            }
            match s.scale {
                Scale::Linear => s.from + (s.to - s.from) * t,
                Scale::Log => (s.from.ln() + (s.to.ln() - s.from.ln()) * t).exp(),
            }
        })
        .collect()
}

pub(crate) fn expand(cfg: &RunConfig) -> Vec<PlanPoint> {
    let Some(base) = &cfg.geometry else {
        return Vec::new();
    };
    let axes: Vec<Vec<f64>> = cfg.sweeps.iter().map(axis).collect();
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for a in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                a.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, values)| {
            let mut geometry = base.clone();
            let mut media = cfg.media.clone();
            let mut temperature = cfg.spectrum.temperature;
            let mut assignments = Vec::with_capacity(values.len());
            for (s, v) in cfg.sweeps.iter().zip(values) {
                match s.parameter.as_str() {
                    "r1" => geometry.r1 = v,
                    "r2" => geometry.r2 = v,
                    "temperature" => temperature = Some(v),
                    p => {
                        let mut parts = p.splitn(3, '.').skip(1);
                        let (name, field) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
                        if let Some(m) = media.get_mut(name) {
                            m.set(field, v);
                        }
                    }
                }
                assignments.push((s.parameter.clone(), v));
            }
            PlanPoint {
                index,
                assignments,
                geometry,
                media,
                temperature,
            }
        })
        .collect()
}
