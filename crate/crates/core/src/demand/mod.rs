//! Demand prediction from several covariate views.
//!
//! Each view gets its own canonical-correlation regression to the hourly
//! demand targets; the regressions are combined with weights that favour the
//! views with lower cross-validated error.

mod cca;
mod mdr;

pub use cca::{
    cca_predict, fit_cca, CcaModel, Standardizer, COVARIANCE_RIDGE, DEFAULT_MAX_COMPONENTS,
};
pub use mdr::{
    fit_mdr, fit_predict, loocv_rmse, mdr_predict, mdr_weights, LoocvReport, MdrModel, ModelKind, ERROR_FOLDS,
};
