//! Case-by-case derivation of the coincidence density matrices by brute-force
//! evolution of the emitted photons.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::photon_stats::Scheme;
use crate::source_model::SourceParams;
use crate::state::{c, CMat4, TwoQubitState, C64};

use super::expr::{FockExpression, InternalId, ModeLabel, OverlapTable, Path, Pol};
use super::interferometer::{evolve, postselect_coincidence, reduce_to_polarization, InterferometerSpec};

/// Which emission event (and which photons survive) is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    /// One signal photon in each pulse.
    Rho11,
    /// Signal + noise at `t`, signal at `t + tau`; the later signal is lost.
    Rho12_1,
    /// As above; the earlier signal is lost (noise meets later signal).
    Rho12_2,
    /// As above; the noise photon is lost.
    Rho12_3,
    /// Signal + noise at `t`, nothing at `t + tau`.
    Rho02,
    /// Two photons in each pulse; the whole first pulse is lost.
    Rho22_1,
    /// Two photons in each pulse; both noise photons are lost.
    Rho22_2,
    /// Two photons in each pulse; the first signal and second noise are lost.
    Rho22_3,
    /// Two photons in each pulse; both signals are lost.
    Rho22_4,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 9] = [
        ComponentKind::Rho11,
        ComponentKind::Rho12_1,
        ComponentKind::Rho12_2,
        ComponentKind::Rho12_3,
        ComponentKind::Rho02,
        ComponentKind::Rho22_1,
        ComponentKind::Rho22_2,
        ComponentKind::Rho22_3,
        ComponentKind::Rho22_4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Rho11 => "rho11",
            ComponentKind::Rho12_1 => "rho12_1",
            ComponentKind::Rho12_2 => "rho12_2",
            ComponentKind::Rho12_3 => "rho12_3",
            ComponentKind::Rho02 => "rho02",
            ComponentKind::Rho22_1 => "rho22_1",
            ComponentKind::Rho22_2 => "rho22_2",
            ComponentKind::Rho22_3 => "rho22_3",
            ComponentKind::Rho22_4 => "rho22_4",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComponentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown component kind `{s}`")))
    }
}

/// Everything the oracle needs to build and reduce an input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub interferometer: InterferometerSpec,
    /// `|<phi1|phi2>|^2`.
    pub v: f64,
    /// `|<gamma1|gamma2>|^2`.
    pub v_l: f64,
    pub q: f64,
    pub scheme: Scheme,
    /// Phase of the one-photon branch relative to vacuum in RF emission.
    pub vacuum_phase: f64,
    /// Phase attached to the signal-signal and noise-noise overlap amplitudes.
    pub overlap_phase: f64,
}

impl From<&SourceParams> for OracleParams {
    fn from(p: &SourceParams) -> Self {
        Self {
            interferometer: InterferometerSpec { bs1: p.bs1, bs2: p.bs2, chi: p.chi },
            v: p.v,
            v_l: p.v_l,
            q: p.q,
            scheme: p.scheme,
            vacuum_phase: 0.0,
            overlap_phase: 0.0,
        }
    }
}

struct Labels {
    table: OverlapTable,
    phi1: InternalId,
    phi2: InternalId,
    gamma1: InternalId,
    gamma2: InternalId,
}

impl Labels {
    fn new(p: &OracleParams) -> Result<Self> {
        let mut table = OverlapTable::new();
        let phi1 = table.add("phi1");
        let phi2 = table.add("phi2");
        let gamma1 = table.add("gamma1");
        let gamma2 = table.add("gamma2");
        table.set_overlap(phi1, phi2, C64::from_polar(p.v.sqrt(), p.overlap_phase))?;
        table.set_overlap(gamma1, gamma2, C64::from_polar(p.v_l.sqrt(), p.overlap_phase))?;
        Ok(Self { table, phi1, phi2, gamma1, gamma2 })
    }
}

fn emitted(id: InternalId, bin: u8) -> FockExpression {
    FockExpression::single(ModeLabel::new(Path::A, Pol::H, id, bin))
}

/// A quantum-dot signal photon; under RF it is in superposition with vacuum.
fn signal(p: &OracleParams, id: InternalId, bin: u8) -> FockExpression {
    match p.scheme {
        Scheme::La => emitted(id, bin),
        Scheme::Rf => {
            let vac = FockExpression::vacuum().scaled(c((1.0 - p.q).max(0.0).sqrt(), 0.0));
            let one = emitted(id, bin).scaled(C64::from_polar(p.q.sqrt(), p.vacuum_phase));
            vac.plus(&one)
        }
    }
}

/// Noise photons are never in superposition with vacuum.
fn noise(id: InternalId, bin: u8) -> FockExpression {
    emitted(id, bin)
}

fn validate(p: &OracleParams) -> Result<()> {
    for (name, x) in [("v", p.v), ("v_l", p.v_l), ("q", p.q)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParams(format!("{name} = {x} outside [0, 1]")));
        }
    }
    Ok(())
}

/// The surviving photons for `kind`, before the interferometer.
pub fn input_state(kind: ComponentKind, p: &OracleParams) -> Result<(FockExpression, OverlapTable)> {
    validate(p)?;
    let l = Labels::new(p)?;
    let state = match kind {
        ComponentKind::Rho11 | ComponentKind::Rho12_3 | ComponentKind::Rho22_2 => {
            signal(p, l.phi1, 0).times(&signal(p, l.phi2, 1))
        }
        ComponentKind::Rho12_1 | ComponentKind::Rho02 => signal(p, l.phi1, 0).times(&noise(l.gamma1, 0)),
        ComponentKind::Rho22_1 => signal(p, l.phi2, 1).times(&noise(l.gamma2, 1)),
        ComponentKind::Rho12_2 | ComponentKind::Rho22_3 => noise(l.gamma1, 0).times(&signal(p, l.phi2, 1)),
        ComponentKind::Rho22_4 => noise(l.gamma1, 0).times(&noise(l.gamma2, 1)),
    };
    Ok((state, l.table))
}

/// Evolve, post-select and reduce one case. The result is unnormalized and
/// carries the RF `q` power of the surviving signal photons.
pub fn derive_component(kind: ComponentKind, p: &OracleParams) -> Result<CMat4> {
    let (input, table) = input_state(kind, p)?;
    let out = postselect_coincidence(&evolve(&input, &p.interferometer));
    reduce_to_polarization(&out, &table)
}

/// All nine oracle matrices, in [`ComponentKind::ALL`] order.
pub fn derive_all(p: &OracleParams) -> Result<Vec<(ComponentKind, CMat4)>> {
    ComponentKind::ALL.iter().map(|&k| Ok((k, derive_component(k, p)?))).collect()
}

/// Unnormalized mixture assembled event by event: each derived case is
/// weighted with its own emission and survival probability, without the
/// grouping into shared coefficients used by the closed-form model.
pub fn oracle_mixture(params: &SourceParams, oracle: &OracleParams) -> Result<CMat4> {
    let pr = params.probs;
    let eta = params.eta;
    let two = eta * eta;
    let three = two * (1.0 - eta);
    let four = two * (1.0 - eta) * (1.0 - eta);
    let weight = |k: ComponentKind| match k {
        ComponentKind::Rho11 => pr.p1 * pr.p1 * two,
        ComponentKind::Rho02 => pr.p0 * pr.p2 * two,
        ComponentKind::Rho12_1 | ComponentKind::Rho12_2 | ComponentKind::Rho12_3 => pr.p1 * pr.p2 * three,
        ComponentKind::Rho22_1 | ComponentKind::Rho22_2 | ComponentKind::Rho22_3 | ComponentKind::Rho22_4 => {
            pr.p2 * pr.p2 * four
        }
    };
    let mut acc = CMat4::zeros();
    for (k, m) in derive_all(oracle)? {
        acc += m * c(weight(k), 0.0);
    }
    Ok(acc)
}

/// Normalized oracle prediction of the generated state.
pub fn oracle_rho_exp(params: &SourceParams) -> Result<TwoQubitState> {
    params.validate()?;
    TwoQubitState::from_unnormalized(oracle_mixture(params, &OracleParams::from(params))?)
}
