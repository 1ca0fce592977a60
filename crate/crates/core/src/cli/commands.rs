use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunConfig, TomoSource};
use crate::ent_metrics::{
    chsh_value, concurrence, fidelity_general_squared, fidelity_pure, horodecki_max, purity, trace_distance,
    ObservablePair,
};
use crate::error::{Error, Result};
use crate::fock_oracle::{derive_component, oracle_mixture, ComponentKind, OracleParams};
use crate::photon_stats::{expected_coincidence_rate, g2_from_probabilities, EmissionProbabilities};
use crate::source_model::{
    apply_werner, build_rho_exp, component_matrices, mixture_coefficients, model_chsh, model_chsh_werner,
    model_fidelity, model_fidelity_werner, unnormalized_rho_exp, MixtureCoefficients,
};
use crate::state::{max_abs_entry, singlet_vector, CMat4, StateJson, TwoQubitState};
use crate::tomography::{
    mle_reconstruct_table, sample_counts, CountTable, MleDiagnostics, MleOptions, TomographyDataset,
    TomographySetting,
};

/// Oracle agreement threshold for a passing `oracle` run.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rendered output plus whether internal validations passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn kv_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        writeln!(out, "{k},{}", fmt_f64(*v)).unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsReport {
    pub scheme: String,
    pub t1: f64,
    pub r1: f64,
    pub t2: f64,
    pub r2: f64,
    pub v: f64,
    pub v_l: f64,
    pub q: f64,
    pub chi: f64,
    pub eta: f64,
    pub c_wn: f64,
    pub probabilities: EmissionProbabilities,
    pub g2: f64,
}

impl ParamsReport {
    fn new(cfg: &RunConfig) -> Result<Self> {
        let p = &cfg.params;
        Ok(Self {
            scheme: p.scheme.to_string(),
            t1: p.bs1.t,
            r1: p.bs1.r,
            t2: p.bs2.t,
            r2: p.bs2.r,
            v: p.v,
            v_l: p.v_l,
            q: p.q,
            chi: p.chi,
            eta: p.eta,
            c_wn: p.c_wn,
            probabilities: p.probs,
            g2: match cfg.g2 {
                Some(g) => g,
                None => g2_from_probabilities(&p.probs)?,
            },
        })
    }
}

/// Closed-form value where it exists (balanced beam splitters) and the
/// trace-based value on the built state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Pair {
    pub closed_form: Option<f64>,
    pub numeric: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub params: ParamsReport,
    pub mixture: MixtureCoefficients,
    pub rho_exp: StateJson,
    pub rho_werner: StateJson,
    pub chsh: Pair,
    pub chsh_signed: f64,
    pub chsh_werner: Pair,
    pub fidelity: Pair,
    pub fidelity_werner: Pair,
    pub concurrence: f64,
    pub concurrence_werner: f64,
    pub horodecki_max: f64,
    pub horodecki_max_werner: f64,
    pub purity: f64,
    pub coincidence_rate_hz: Option<f64>,
}

fn closed(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::Unbalanced) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn model_report(cfg: &RunConfig) -> Result<ModelReport> {
    let p = &cfg.params;
    let rho = build_rho_exp(p)?;
    let wn = apply_werner(&rho, p.c_wn)?;
    let settings = ObservablePair::canonical();
    let psi = singlet_vector();
    let s = chsh_value(&rho, &settings);
    Ok(ModelReport {
        params: ParamsReport::new(cfg)?,
        mixture: mixture_coefficients(p),
        rho_exp: rho.to_json(),
        rho_werner: wn.to_json(),
        chsh: Pair { closed_form: closed(model_chsh(p))?, numeric: s.abs() },
        chsh_signed: s,
        chsh_werner: Pair { closed_form: closed(model_chsh_werner(p))?, numeric: chsh_value(&wn, &settings).abs() },
        fidelity: Pair { closed_form: closed(model_fidelity(p))?, numeric: fidelity_pure(&rho, &psi) },
        fidelity_werner: Pair { closed_form: closed(model_fidelity_werner(p))?, numeric: fidelity_pure(&wn, &psi) },
        concurrence: concurrence(&rho)?,
        concurrence_werner: concurrence(&wn)?,
        horodecki_max: horodecki_max(&rho),
        horodecki_max_werner: horodecki_max(&wn),
        purity: purity(&rho),
        coincidence_rate_hz: cfg.rate.as_ref().map(expected_coincidence_rate),
    })
}

pub fn cmd_model(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let r = model_report(cfg)?;
    let text = match format {
        Format::Json => to_json(&r)?,
        Format::Csv => {
            let mut rows = vec![
                ("chsh".to_string(), r.chsh.numeric),
                ("chsh_signed".into(), r.chsh_signed),
                ("chsh_werner".into(), r.chsh_werner.numeric),
                ("fidelity".into(), r.fidelity.numeric),
                ("fidelity_werner".into(), r.fidelity_werner.numeric),
                ("concurrence".into(), r.concurrence),
                ("concurrence_werner".into(), r.concurrence_werner),
                ("horodecki_max".into(), r.horodecki_max),
                ("horodecki_max_werner".into(), r.horodecki_max_werner),
                ("purity".into(), r.purity),
            ];
            for (name, pair) in [("chsh", r.chsh), ("chsh_werner", r.chsh_werner), ("fidelity", r.fidelity), ("fidelity_werner", r.fidelity_werner)] {
                if let Some(x) = pair.closed_form {
                    rows.push((format!("{name}_closed_form"), x));
                }
            }
            if let Some(hz) = r.coincidence_rate_hz {
                rows.push(("coincidence_rate_hz".into(), hz));
            }
            kv_csv(&rows)
        }
    };
    Ok(Outcome { text, ok: true })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentDelta {
    pub component: String,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub components: Vec<ComponentDelta>,
    pub rho_exp_max_abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn oracle_report(cfg: &RunConfig) -> Result<OracleReport> {
    let p = &cfg.params;
    let mut oracle = OracleParams::from(p);
    oracle.vacuum_phase = cfg.rf_phase;
    oracle.v = (oracle.v + cfg.debug_oracle_v_offset).clamp(0.0, 1.0);
    let closed = component_matrices(p);
    let components = ComponentKind::ALL
        .iter()
        .map(|&k| {
            let m = derive_component(k, &oracle)?;
            Ok(ComponentDelta { component: k.name().to_string(), max_abs_diff: max_abs_entry(&(m - closed.for_kind(k))) })
        })
        .collect::<Result<Vec<_>>>()?;
    let a = normalized(unnormalized_rho_exp(p))?;
    let b = normalized(oracle_mixture(p, &oracle)?)?;
    let rho_diff = max_abs_entry(&(a - b));
    let worst = components.iter().map(|c| c.max_abs_diff).fold(rho_diff, f64::max);
    Ok(OracleReport { components, rho_exp_max_abs_diff: rho_diff, tolerance: ORACLE_TOL, pass: worst <= ORACLE_TOL })
}

fn normalized(m: CMat4) -> Result<CMat4> {
    Ok(TwoQubitState::from_unnormalized(m)?.into_matrix())
}

pub fn cmd_oracle(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let r = oracle_report(cfg)?;
    let text = match format {
        Format::Json => to_json(&r)?,
        Format::Csv => {
            let mut rows: Vec<(String, f64)> = r.components.iter().map(|c| (c.component.clone(), c.max_abs_diff)).collect();
            rows.push(("rho_exp".into(), r.rho_exp_max_abs_diff));
            kv_csv(&rows).replacen("quantity,value", "component,max_abs_diff", 1)
        }
    };
    Ok(Outcome { text, ok: r.pass })
}

pub const SWEEP_COLUMNS: [&str; 6] = ["S_model", "S_werner", "F_model", "F_werner", "concurrence", "horodecki"];

/// Values of [`SWEEP_COLUMNS`] at one configuration. The last two refer to
/// the state including white noise.
pub fn sweep_row(cfg: &RunConfig) -> Result<[f64; 6]> {
    let rho = build_rho_exp(&cfg.params)?;
    let wn = apply_werner(&rho, cfg.params.c_wn)?;
    let settings = ObservablePair::canonical();
    let psi = singlet_vector();
    Ok([
        chsh_value(&rho, &settings).abs(),
        chsh_value(&wn, &settings).abs(),
        fidelity_pure(&rho, &psi),
        fidelity_pure(&wn, &psi),
        concurrence(&wn)?,
        horodecki_max(&wn),
    ])
}

pub fn cmd_sweep(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let grid = cfg.grid();
    // Collecting an indexed parallel iterator keeps grid order.
    let rows: Vec<[f64; 6]> = grid.par_iter().map(|pt| sweep_row(&cfg.at(pt)?)).collect::<Result<_>>()?;
    let names: Vec<&str> = cfg.axes.iter().map(|a| a.name.as_str()).collect();
    let text = match format {
        Format::Csv => {
            let mut out = names.iter().copied().chain(SWEEP_COLUMNS).collect::<Vec<_>>().join(",");
            out.push('\n');
            for (pt, row) in grid.iter().zip(&rows) {
                let cells: Vec<String> = pt.iter().chain(row.iter()).map(|x| fmt_f64(*x)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = grid
                .iter()
                .zip(&rows)
                .map(|(pt, row)| {
                    names
                        .iter()
                        .copied()
                        .chain(SWEEP_COLUMNS)
                        .zip(pt.iter().chain(row.iter()))
                        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
                        .collect()
                })
                .collect();
            to_json(&objs)?
        }
    };
    Ok(Outcome { text, ok: true })
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingCounts {
    pub setting: String,
    pub counts: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct TomoReport {
    pub source: String,
    pub shots: u64,
    pub seed: u64,
    pub noiseless: bool,
    pub counts: Vec<SettingCounts>,
    pub rho_true: StateJson,
    pub rho_mle: StateJson,
    pub fidelity_to_true: f64,
    pub trace_distance_to_true: f64,
    pub fidelity_singlet: f64,
    pub chsh: f64,
    pub concurrence: f64,
    pub horodecki_max: f64,
    pub purity: f64,
    pub diagnostics: MleDiagnostics,
}

fn tomo_truth(cfg: &RunConfig) -> Result<(String, TwoQubitState)> {
    Ok(match cfg.tomo.source {
        TomoSource::Model => ("model".into(), build_rho_exp(&cfg.params)?),
        TomoSource::Werner => ("werner".into(), apply_werner(&build_rho_exp(&cfg.params)?, cfg.params.c_wn)?),
        TomoSource::Singlet => ("singlet".into(), TwoQubitState::singlet()),
        TomoSource::File => {
            let path = cfg.tomo.state_file.as_ref().expect("validated with the config");
            let json: StateJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            (format!("file:{}", path.display()), json.to_state()?)
        }
    })
}

pub fn tomo_report(cfg: &RunConfig) -> Result<TomoReport> {
    let t = &cfg.tomo;
    let (source, truth) = tomo_truth(cfg)?;
    let (table, shots, seed) = if t.noiseless {
        (CountTable::exact(&truth, t.shots as f64), t.shots, t.seed)
    } else {
        let ds = match &t.dataset_in {
            Some(path) => TomographyDataset::read(path)?,
            None => sample_counts(&truth, t.shots, t.seed)?,
        };
        if let Some(path) = &t.dataset_out {
            ds.write(path)?;
        }
        (CountTable::from_dataset(&ds), ds.shots, ds.seed)
    };
    let opts = MleOptions { likelihood: t.likelihood, ..MleOptions::default() };
    let (rho, diagnostics) = mle_reconstruct_table(&table, &opts)?;
    Ok(TomoReport {
        source,
        shots,
        seed,
        noiseless: t.noiseless,
        counts: TomographySetting::all()
            .iter()
            .map(|s| SettingCounts { setting: s.to_string(), counts: table.weights[s.index()] })
            .collect(),
        rho_true: truth.to_json(),
        rho_mle: rho.to_json(),
        fidelity_to_true: fidelity_general_squared(&rho, &truth),
        trace_distance_to_true: trace_distance(&rho, &truth),
        fidelity_singlet: fidelity_pure(&rho, &singlet_vector()),
        chsh: chsh_value(&rho, &ObservablePair::canonical()).abs(),
        concurrence: concurrence(&rho)?,
        horodecki_max: horodecki_max(&rho),
        purity: purity(&rho),
        diagnostics,
    })
}

pub fn cmd_tomo(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let r = tomo_report(cfg)?;
    let text = match format {
        Format::Json => to_json(&r)?,
        Format::Csv => kv_csv(&[
            ("fidelity_to_true".into(), r.fidelity_to_true),
            ("trace_distance_to_true".into(), r.trace_distance_to_true),
            ("fidelity_singlet".into(), r.fidelity_singlet),
            ("chsh".into(), r.chsh),
            ("concurrence".into(), r.concurrence),
            ("horodecki_max".into(), r.horodecki_max),
            ("purity".into(), r.purity),
            ("loglik".into(), r.diagnostics.loglik),
            ("start_loglik".into(), r.diagnostics.start_loglik),
            ("iterations".into(), r.diagnostics.iterations as f64),
            ("converged".into(), f64::from(u8::from(r.diagnostics.converged))),
        ]),
    };
    Ok(Outcome { text, ok: r.diagnostics.converged })
}
