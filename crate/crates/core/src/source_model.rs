//! Closed-form model of the generated two-photon state.
//!
//! The state is a mixture of four coincidence matrices: two-photon
//! interference of signal photons (`rho11`), signal against a distinguishable
//! noise photon (`rho12`), a same-pulse pair split by the interferometer
//! (`rho02`, populating `|HH>` and `|VV>`), and two noise photons (`rho_l`).
//! Their weights follow from the emission probabilities and the overall
//! transmission `eta`, keeping only events where exactly two photons survive.

use serde::Serialize;

use crate::ent_metrics::{chsh_value, fidelity_pure, ObservablePair};
use crate::error::{Error, Result};
use crate::fock_oracle::{BeamSplitter, ComponentKind};
use crate::photon_stats::{EmissionProbabilities, Scheme};
use crate::state::{c, singlet_vector, CMat4, TwoQubitState};

const BALANCE_TOL: f64 = 1e-12;

/// Physical knobs of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    pub bs1: BeamSplitter,
    pub bs2: BeamSplitter,
    /// Signal-signal indistinguishability (corrected HOM visibility).
    pub v: f64,
    /// Noise-noise indistinguishability.
    pub v_l: f64,
    /// RF one-photon probability amplitude squared; 1 under LA.
    pub q: f64,
    /// Crystal phase in radians. `0` yields the singlet for ideal inputs.
    pub chi: f64,
    /// Overall transmission.
    pub eta: f64,
    pub probs: EmissionProbabilities,
    /// Weight of the model state against white noise.
    pub c_wn: f64,
    pub scheme: Scheme,
}

impl SourceParams {
    pub const DEFAULT_V_L: f64 = 0.5;

    /// Balanced beam splitters, perfect single photons, no noise.
    pub fn ideal() -> Self {
        Self {
            bs1: BeamSplitter::balanced(),
            bs2: BeamSplitter::balanced(),
            v: 1.0,
            v_l: Self::DEFAULT_V_L,
            q: 1.0,
            chi: 0.0,
            eta: 0.01,
            probs: EmissionProbabilities::ideal(),
            c_wn: 1.0,
            scheme: Scheme::La,
        }
    }

    pub fn validate(&self) -> Result<()> {
        BeamSplitter::new(self.bs1.t, self.bs1.r)?;
        BeamSplitter::new(self.bs2.t, self.bs2.r)?;
        for (name, x) in [("v", self.v), ("v_l", self.v_l), ("q", self.q), ("c_wn", self.c_wn)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidParams(format!("{name} = {x} outside [0, 1]")));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParams(format!("eta = {} outside (0, 1)", self.eta)));
        }
        if !self.chi.is_finite() {
            return Err(Error::InvalidParams("chi must be finite".into()));
        }
        let p = self.probs;
        EmissionProbabilities::new(p.p0, p.p1, p.p2).map_err(|e| Error::InvalidParams(e.to_string()))?;
        if self.scheme == Scheme::La && self.q != 1.0 {
            return Err(Error::InvalidParams(format!("LA excitation requires q = 1, got {}", self.q)));
        }
        Ok(())
    }

    pub fn is_balanced(&self) -> bool {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [self.bs1.t, self.bs1.r, self.bs2.t, self.bs2.r].iter().all(|x| (x - s).abs() < BALANCE_TOL)
    }
}

/// The four distinct coincidence matrices, unnormalized, with their RF `q`
/// prefactors (`q^2`, `q`, `q`, `1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMatrices {
    pub rho11: CMat4,
    pub rho12_2: CMat4,
    pub rho02: CMat4,
    pub rho_l: CMat4,
}

/// Interference pattern shared by `rho11` and `rho_l`, with overlap `overlap`.
fn interference_block(p: &SourceParams, overlap: f64) -> CMat4 {
    let (t1, r1, t2, r2) = (p.bs1.t, p.bs1.r, p.bs2.t, p.bs2.r);
    let pre = r1 * r1 * t1 * t1;
    let coh = -overlap * t2 * t2 * r2 * r2;
    let mut m = CMat4::zeros();
    m[(1, 1)] = c(pre * r2.powi(4), 0.0);
    m[(2, 2)] = c(pre * t2.powi(4), 0.0);
    m[(1, 2)] = c(pre * coh, 0.0) * c(0.0, -p.chi).exp();
    m[(2, 1)] = c(pre * coh, 0.0) * c(0.0, p.chi).exp();
    m
}

pub fn component_matrices(p: &SourceParams) -> ComponentMatrices {
    let q = p.q;
    let (t1, r1, t2, r2) = (p.bs1.t, p.bs1.r, p.bs2.t, p.bs2.r);

    let rho11 = interference_block(p, p.v) * c(q * q, 0.0);
    let rho12_2 = interference_block(p, 0.0) * c(q, 0.0);

    let split = 2.0 * t2 * t2 * r2 * r2 * q;
    let mut rho02 = CMat4::zeros();
    rho02[(0, 0)] = c(split * r1.powi(4), 0.0);
    rho02[(3, 3)] = c(split * t1.powi(4), 0.0);

    let rho_l = interference_block(p, p.v_l);
    ComponentMatrices { rho11, rho12_2, rho02, rho_l }
}

impl ComponentMatrices {
    /// Closed-form matrix that a single emission case reduces to.
    pub fn for_kind(&self, kind: ComponentKind) -> &CMat4 {
        use ComponentKind::*;
        match kind {
            Rho11 | Rho12_3 | Rho22_2 => &self.rho11,
            Rho12_2 | Rho22_3 => &self.rho12_2,
            Rho02 | Rho12_1 | Rho22_1 => &self.rho02,
            Rho22_4 => &self.rho_l,
        }
    }
}

/// Mixture weights of the four matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureCoefficients {
    pub c11: f64,
    pub c12: f64,
    pub c02: f64,
    pub c_l: f64,
}

pub fn mixture_coefficients(p: &SourceParams) -> MixtureCoefficients {
    let EmissionProbabilities { p0, p1, p2 } = p.probs;
    let e2 = p.eta * p.eta;
    let loss = 1.0 - p.eta;
    let three = p1 * p2 * e2 * loss;
    let four = p2 * p2 * e2 * loss * loss;
    MixtureCoefficients {
        c11: p1 * p1 * e2 + three + four,
        c12: three + four,
        c02: p0 * p2 * e2 + three + four,
        c_l: four,
    }
}

/// Unnormalized mixture `c11 rho11 + c12 rho12 + c02 rho02 + c_l rho_l`.
pub fn unnormalized_rho_exp(p: &SourceParams) -> CMat4 {
    let m = component_matrices(p);
    let k = mixture_coefficients(p);
    m.rho11 * c(k.c11, 0.0) + m.rho12_2 * c(k.c12, 0.0) + m.rho02 * c(k.c02, 0.0) + m.rho_l * c(k.c_l, 0.0)
}

/// Normalization of the mixture for balanced beam splitters.
pub fn balanced_normalization(p: &SourceParams) -> f64 {
    p.eta * p.eta / 8.0 * denominator(p)
}

/// `p1^2 q^2 + p2 q (2 p0 + p1 (1-eta)(3+q)) + p2^2 (1-eta)^2 (1 + q(3+q))`.
fn denominator(p: &SourceParams) -> f64 {
    let EmissionProbabilities { p0, p1, p2 } = p.probs;
    let (q, l) = (p.q, 1.0 - p.eta);
    p1 * p1 * q * q + p2 * q * (2.0 * p0 + p1 * l * (3.0 + q)) + p2 * p2 * l * l * (1.0 + q * (3.0 + q))
}

pub fn build_rho_exp(p: &SourceParams) -> Result<TwoQubitState> {
    p.validate()?;
    let m = unnormalized_rho_exp(p);
    let tr = m.trace().re;
    if tr.is_nan() || tr <= 0.0 {
        return Err(Error::Domain("mixture has zero trace; no two-photon events".into()));
    }
    TwoQubitState::new(m / c(tr, 0.0))
}

/// `c_wn rho + (1 - c_wn) I/4`.
pub fn apply_werner(rho: &TwoQubitState, c_wn: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&c_wn) {
        return Err(Error::InvalidParams(format!("c_wn = {c_wn} outside [0, 1]")));
    }
    TwoQubitState::new(rho.matrix() * c(c_wn, 0.0) + CMat4::identity() * c((1.0 - c_wn) / 4.0, 0.0))
}

/// Model state including white noise.
pub fn build_rho_werner(p: &SourceParams) -> Result<TwoQubitState> {
    apply_werner(&build_rho_exp(p)?, p.c_wn)
}

fn require_balanced(p: &SourceParams) -> Result<()> {
    p.validate()?;
    if !p.is_balanced() {
        return Err(Error::Unbalanced);
    }
    if denominator(p) <= 0.0 {
        return Err(Error::Domain("mixture has zero trace; no two-photon events".into()));
    }
    Ok(())
}

/// CHSH magnitude of the model state under the canonical settings, balanced
/// beam splitters only. The coherences enter through `v cos(chi)` and
/// `v_l cos(chi)`; at `chi = 0` this is the usual expression in `v`, `v_l`.
pub fn model_chsh(p: &SourceParams) -> Result<f64> {
    require_balanced(p)?;
    let EmissionProbabilities { p0, p1, p2 } = p.probs;
    let (q, l) = (p.q, 1.0 - p.eta);
    let v = p.v * p.chi.cos();
    let vl = p.v_l * p.chi.cos();
    let num = (1.0 + v) * p1 * p1 * q * q - p2 * q * (2.0 * p0 + p1 * l * (1.0 - q * (1.0 + v)))
        + p2 * p2 * l * l * (1.0 + vl - q * (1.0 - q * (1.0 + v)));
    Ok(std::f64::consts::SQRT_2 * (num / denominator(p)).abs())
}

/// Singlet fidelity `<psi-|rho_exp|psi->` of the model state, balanced beam
/// splitters only.
///
/// `rho02` has no weight on the singlet, `rho12` contributes 1/2 of its trace
/// and the interference blocks `(1 + v cos chi)/2`, which gives
/// `[(1+v) p1^2 q^2 + p1 p2 (1-eta) q (1 + q(1+v)) + p2^2 (1-eta)^2 (1 + v_l + q + q^2 (1+v))] / (2 D)`.
pub fn model_fidelity(p: &SourceParams) -> Result<f64> {
    require_balanced(p)?;
    let EmissionProbabilities { p1, p2, .. } = p.probs;
    let (q, l) = (p.q, 1.0 - p.eta);
    let v = p.v * p.chi.cos();
    let vl = p.v_l * p.chi.cos();
    let num = (1.0 + v) * p1 * p1 * q * q
        + p1 * p2 * l * q * (1.0 + q * (1.0 + v))
        + p2 * p2 * l * l * (1.0 + vl + q + q * q * (1.0 + v));
    Ok(num / (2.0 * denominator(p)))
}

/// CHSH magnitude with white noise: scales linearly with `c_wn`.
pub fn model_chsh_werner(p: &SourceParams) -> Result<f64> {
    Ok(p.c_wn * model_chsh(p)?)
}

/// Singlet fidelity with white noise, `[2 c N_F + (1 - c) D] / (4 D)`:
///
/// `p1^2 q^2 (1 + c(1+2v)) + p2^2 (1-eta)^2 [1 + c(1+2v_l) + q(3+q) - c q (1 - q(1+2v))]
///  + p2 q [2 p0 (1-c) + p1 (1-eta)(3 + q - c(1 - q(1+2v)))]`, over `4 D`.
pub fn model_fidelity_werner(p: &SourceParams) -> Result<f64> {
    require_balanced(p)?;
    let EmissionProbabilities { p0, p1, p2 } = p.probs;
    let (q, l, cw) = (p.q, 1.0 - p.eta, p.c_wn);
    let v = p.v * p.chi.cos();
    let vl = p.v_l * p.chi.cos();
    let num = p1 * p1 * q * q * (1.0 + cw * (1.0 + 2.0 * v))
        + p2 * p2 * l * l * (1.0 + cw * (1.0 + 2.0 * vl) + q * (3.0 + q) - cw * q * (1.0 - q * (1.0 + 2.0 * v)))
        + p2 * q * (2.0 * p0 * (1.0 - cw) + p1 * l * (3.0 + q - cw * (1.0 - q * (1.0 + 2.0 * v))));
    Ok(num / (4.0 * denominator(p)))
}

/// CHSH magnitude evaluated from the built state; valid for any beam splitters.
pub fn numeric_chsh(p: &SourceParams) -> Result<f64> {
    Ok(chsh_value(&build_rho_exp(p)?, &ObservablePair::canonical()).abs())
}

pub fn numeric_fidelity(p: &SourceParams) -> Result<f64> {
    Ok(fidelity_pure(&build_rho_exp(p)?, &singlet_vector()))
}
