//! Nine-setting Pauli tomography: simulated coincidence counts and
//! maximum-likelihood reconstruction.

mod dataset;
mod mle;
mod setting;

pub use dataset::{sample_counts, TomographyDataset};
pub use mle::{
    linear_inversion, linear_inversion_table, mle_reconstruct, mle_reconstruct_table, multinomial_loglik,
    params_from_rho, params_from_t, psd_projection, rho_from_params, t_from_params, CholeskyParams, CountTable,
    Likelihood, Method, MleDiagnostics, MleOptions, Objective, START_MIX,
};
pub use setting::{outcome_probabilities, Pauli, TomographySetting, OUTCOME_SIGNS};
