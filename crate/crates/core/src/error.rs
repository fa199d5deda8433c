use thiserror::Error;

use crate::scattering::Polarization;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CasimirError {
    #[error("domain error: {what} = {value} ({constraint})")]
    Domain {
        what: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("angular momentum {ell} exceeds the supported cap {cap}")]
    Capability { ell: usize, cap: usize },

    #[error("invalid response model: {0}")]
    InvalidModel(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("variable-phase integration failed at r = {last_radius}: {detail}")]
    Integration { last_radius: f64, detail: String },

    #[error(
        "contraction violated: mode product {product} >= 1 at l = {ell}, {polarization:?}, kappa = {kappa}"
    )]
    Contraction {
        ell: usize,
        polarization: Polarization,
        kappa: f64,
        product: f64,
    },

    #[error("pressure routes disagree: finite difference {finite_difference}, analytic {analytic}")]
    CrossValidation {
        finite_difference: f64,
        analytic: f64,
    },

    #[error("sign class of the configuration is undefined; supply an override to proceed")]
    UndefinedSign,

    #[error("self-energy unavailable: {0}")]
    SelfEnergyUnavailable(String),
}

pub type Result<T> = std::result::Result<T, CasimirError>;

pub(crate) fn require_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CasimirError::Domain {
            what,
            value,
            constraint: "must be positive and finite",
        })
    }
}
