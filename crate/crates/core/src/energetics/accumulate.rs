//! Deterministic accumulation of weighted frequency nodes into per-mode
//! totals and reports.

use super::nodes::{Channel, Field, NodeResult};
use super::{
    pressure_from_slope, CasimirError, Diagnostics, EnergyReport, Geometry, ModeContribution,
    PairSign, PressureMethod, Quantity, Result,
};
use crate::scattering::Polarization;
use crate::sum::NeumaierSum;

const FIELDS: [Field; 4] = [Field::Energy, Field::Slope, Field::FiniteDifference, Field::Linear];

/// Relative disagreement between the two pressure routes that aborts.
pub(crate) const CROSS_CHECK_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulated {
    /// `[l - 1][polarization][field]`
    pub per_mode: Vec<[[f64; 4]; 2]>,
    pub max_product: f64,
    pub min_product: f64,
    pub ell_tail: f64,
    /// Frequency nodes whose l-sum stopped at the cap with a negligible
    /// estimated tail.
    pub capped_nodes: usize,
}

fn field_index(f: Field) -> usize {
    FIELDS.iter().position(|g| *g == f).expect("field listed")
}

impl Accumulated {
    /// Sum of weighted nodes, ordered by l, then polarization, then node.
    /// Nodes cut off at the l cap are accepted only if their estimated
    /// tails, weighted, stay below `ell_tolerance` of the totals.
    pub fn from_nodes(nodes: &[(f64, NodeResult)], ell_tolerance: f64) -> Result<Self> {
        let lmax = nodes.iter().map(|(_, n)| n.channels.len()).max().unwrap_or(0);
        let mut per_mode = vec![[[0.0; 4]; 2]; lmax];
        for (j, slot) in per_mode.iter_mut().enumerate() {
            for p in 0..2 {
                for (fi, f) in FIELDS.iter().enumerate() {
                    let mut s = NeumaierSum::new();
                    for (w, n) in nodes {
                        if let Some(pair) = n.channels.get(j) {
                            s.add(w * pair[p].field(*f));
                        }
                    }
                    slot[p][fi] = s.value();
                }
            }
        }
        let active = nodes.iter().filter(|(_, n)| !n.channels.is_empty());
        let mut max_product: f64 = 0.0;
        let mut min_product: f64 = 0.0;
        let mut ell_tail: f64 = 0.0;
        for (_, n) in active {
            max_product = max_product.max(n.max_product);
            min_product = min_product.min(n.min_product);
            ell_tail = ell_tail.max(n.tail);
        }
        let mut acc = Accumulated {
            per_mode,
            max_product,
            min_product,
            ell_tail,
            capped_nodes: 0,
        };
        let totals = [acc.total(Field::Energy).abs(), acc.total(Field::Slope).abs()];
        for (w, n) in nodes {
            let Some(bound) = n.capped else { continue };
            for (b, t) in bound.iter().zip(totals) {
                if (w * b).abs() > ell_tolerance * t {
                    return Err(CasimirError::Convergence {
                        what: "angular momentum sum",
                        detail: format!(
                            "tail criterion not met by l_max = {}; estimated tail {:.3e} against total {:.3e}; \
                             raise l_max or reduce r1/r2",
                            n.channels.len(),
                            (w * b).abs(),
                            t
                        ),
                    });
                }
            }
            acc.capped_nodes += 1;
        }
        Ok(acc)
    }

    fn warnings(&self) -> Vec<String> {
        if self.capped_nodes == 0 {
            return Vec::new();
        }
        vec![format!(
            "{} frequency nodes stopped at l_max with a negligible estimated tail",
            self.capped_nodes
        )]
    }

    pub fn total(&self, f: Field) -> f64 {
        let i = field_index(f);
        crate::sum::neumaier(self.per_mode.iter().flat_map(|m| [m[0][i], m[1][i]]))
    }

    pub fn l_max_used(&self) -> usize {
        self.per_mode.len()
    }

    fn contributions(&self, f: Field, scale: f64) -> Vec<ModeContribution> {
        let i = field_index(f);
        self.per_mode
            .iter()
            .enumerate()
            .flat_map(|(j, m)| {
                Polarization::ALL.map(|p| ModeContribution {
                    ell: j + 1,
                    polarization: p,
                    value: scale * m[p.index()][i],
                })
            })
            .collect()
    }
}

/// Combine two node results channel by channel: `ca * a + cb * b`.
pub(crate) fn combine_nodes(a: &NodeResult, ca: f64, b: &NodeResult, cb: f64) -> NodeResult {
    let n = a.channels.len().max(b.channels.len());
    let zero = [Channel::default(); 2];
    let channels = (0..n)
        .map(|j| {
            let x = a.channels.get(j).unwrap_or(&zero);
            let y = b.channels.get(j).unwrap_or(&zero);
            [Channel::combine(&x[0], ca, &y[0], cb), Channel::combine(&x[1], ca, &y[1], cb)]
        })
        .collect();
    NodeResult {
        channels,
        max_product: a.max_product.max(b.max_product),
        min_product: a.min_product.min(b.min_product),
        tail: a.tail.max(b.tail),
        capped: match (a.capped, b.capped) {
            (None, None) => None,
            (x, y) => {
                let (x, y) = (x.unwrap_or([0.0; 2]), y.unwrap_or([0.0; 2]));
                Some([0, 1].map(|i| ca.abs() * x[i] + cb.abs() * y[i]))
            }
        },
    }
}

pub(crate) struct Frame {
    pub quantity: Quantity,
    pub sign_class: PairSign,
    pub n_used: usize,
    pub frequency_tail: f64,
    pub zero_mode_fraction: Option<f64>,
}

pub(crate) fn energy_report(geo: &Geometry, acc: &Accumulated, frame: Frame) -> EnergyReport {
    let _ = geo;
    let value = acc.total(Field::Energy);
    let linear = acc.total(Field::Linear);
    EnergyReport {
        quantity: frame.quantity,
        value,
        unit: frame.quantity.unit(),
        per_mode: acc.contributions(Field::Energy, 1.0),
        l_max_used: acc.l_max_used(),
        n_kappa_used: frame.n_used,
        sign_class: frame.sign_class,
        converged: true,
        diagnostics: Diagnostics {
            frequency_tail: frame.frequency_tail,
            ell_tail: acc.ell_tail,
            max_product: acc.max_product,
            min_product: acc.min_product,
            first_order_ratio: (value != 0.0).then(|| linear / value),
            zero_mode_fraction: frame.zero_mode_fraction,
            warnings: acc.warnings(),
            ..Diagnostics::default()
        },
    }
}

pub(crate) fn pressure_report(
    geo: &Geometry,
    acc: &Accumulated,
    method: PressureMethod,
    frame: Frame,
) -> Result<EnergyReport> {
    let analytic = pressure_from_slope(acc.total(Field::Slope), geo.r1);
    let fd = pressure_from_slope(acc.total(Field::FiniteDifference), geo.r1);
    let scale = analytic.abs().max(fd.abs());
    if scale > 0.0 && (analytic - fd).abs() > CROSS_CHECK_LIMIT * scale {
        return Err(CasimirError::CrossValidation {
            finite_difference: fd,
            analytic,
        });
    }
    let (field, value) = match method {
        PressureMethod::CalogeroAnalytic => (Field::Slope, analytic),
        PressureMethod::FiniteDifference => (Field::FiniteDifference, fd),
    };
    let factor = pressure_from_slope(1.0, geo.r1);
    Ok(EnergyReport {
        quantity: frame.quantity,
        value,
        unit: frame.quantity.unit(),
        per_mode: acc.contributions(field, factor),
        l_max_used: acc.l_max_used(),
        n_kappa_used: frame.n_used,
        sign_class: frame.sign_class,
        converged: true,
        diagnostics: Diagnostics {
            frequency_tail: frame.frequency_tail,
            ell_tail: acc.ell_tail,
            max_product: acc.max_product,
            min_product: acc.min_product,
            finite_difference: Some(fd),
            analytic: Some(analytic),
            zero_mode_fraction: frame.zero_mode_fraction,
            warnings: acc.warnings(),
            ..Diagnostics::default()
        },
    })
}
