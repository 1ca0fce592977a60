//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fock_oracle::BeamSplitter;
use crate::photon_stats::{g2_to_probabilities, EmissionProbabilities, RateBudget, Scheme};
use crate::source_model::SourceParams;
use crate::tomography::Likelihood;

/// Keys that take a single value.
pub const KEYS: &[&str] = &[
    "t1", "r1", "t2", "r2", "bs1_transmissivity", "bs2_transmissivity",
    "v", "v_l", "q", "chi", "eta", "scheme", "p0", "p1", "p2", "g2", "brightness", "c_wn", "rf_phase",
    "eta_qdsps", "eta_fl", "eta_mzi", "eta_d", "r_qd",
    "shots", "seed", "noiseless", "likelihood", "tomo_state", "state_file", "dataset_out", "dataset_in",
    "debug_oracle_v_offset",
];

/// Keys a sweep axis may vary.
pub const SWEEP_KEYS: &[&str] = &[
    "t1", "t2", "bs1_transmissivity", "bs2_transmissivity", "v", "v_l", "q", "chi", "eta", "p0", "p1", "p2", "g2",
    "brightness", "c_wn",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomoSource {
    Model,
    Werner,
    Singlet,
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoConfig {
    pub shots: u64,
    pub seed: u64,
    pub noiseless: bool,
    pub likelihood: Likelihood,
    pub source: TomoSource,
    pub state_file: Option<PathBuf>,
    pub dataset_out: Option<PathBuf>,
    pub dataset_in: Option<PathBuf>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SourceParams,
    /// `g2` as configured, if the probabilities were derived from it.
    pub g2: Option<f64>,
    pub rf_phase: f64,
    pub rate: Option<RateBudget>,
    pub tomo: TomoConfig,
    pub axes: Vec<SweepAxis>,
    /// Added to `v` on the oracle side only.
    pub debug_oracle_v_offset: f64,
    raw: BTreeMap<String, String>,
}

fn err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

/// Split config text into single-valued entries and sweep axes.
fn tokenize(text: &str) -> Result<(BTreeMap<String, String>, Vec<SweepAxis>)> {
    let mut map = BTreeMap::new();
    let mut axes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line, format!("line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "axis" {
            axes.push(parse_axis(value)?);
            continue;
        }
        if !KEYS.contains(&key) {
            return Err(err(key, "unknown key"));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(err(key, "given more than once"));
        }
    }
    Ok((map, axes))
}

fn parse_axis(value: &str) -> Result<SweepAxis> {
    let f: Vec<&str> = value.split_whitespace().collect();
    if f.len() != 4 {
        return Err(err("axis", format!("expected `name start stop count`, got `{value}`")));
    }
    let name = f[0];
    if !SWEEP_KEYS.contains(&name) {
        return Err(err("axis", format!("`{name}` cannot be swept")));
    }
    let num = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| err("axis", format!("bad number `{s}`")));
    let count: usize = f[3].parse().map_err(|_| err("axis", format!("bad count `{}`", f[3])))?;
    if count == 0 {
        return Err(err("axis", "count must be at least 1"));
    }
    Ok(SweepAxis { name: name.to_string(), start: num(f[1])?, stop: num(f[2])?, count })
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.0
            .get(key)
            .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| err(key, format!("`{s}` is not a finite number"))))
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.0
            .get(key)
            .map(|s| s.parse::<u64>().map_err(|_| err(key, format!("`{s}` is not a non-negative integer"))))
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.0
            .get(key)
            .map(|s| match s.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(err(key, format!("`{s}` is not a boolean"))),
            })
            .transpose()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.0.get(key).map(PathBuf::from)
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn beam_splitter(r: &Reader, n: u8) -> Result<BeamSplitter> {
    let (tk, rk, tt) = (format!("t{n}"), format!("r{n}"), format!("bs{n}_transmissivity"));
    let bad = |key: &str, e: Error| err(key, e.to_string());
    match (r.f64(&tk)?, r.f64(&rk)?, r.f64(&tt)?) {
        (None, None, None) => Ok(BeamSplitter::balanced()),
        (None, None, Some(x)) => BeamSplitter::from_transmissivity(x).map_err(|e| bad(&tt, e)),
        (_, _, Some(_)) => Err(err(&tt, format!("conflicts with {tk}/{rk}"))),
        (Some(t), None, None) => BeamSplitter::new(t, (1.0 - t * t).max(0.0).sqrt()).map_err(|e| bad(&tk, e)),
        (None, Some(rr), None) => BeamSplitter::new((1.0 - rr * rr).max(0.0).sqrt(), rr).map_err(|e| bad(&rk, e)),
        (Some(t), Some(rr), None) => BeamSplitter::new(t, rr).map_err(|e| bad(&tk, e)),
    }
}

fn probabilities(r: &Reader, scheme: Scheme) -> Result<(EmissionProbabilities, Option<f64>)> {
    let explicit = ["p0", "p1", "p2"].iter().any(|k| r.has(k));
    match (r.f64("g2")?, explicit) {
        (Some(_), true) => Err(err("g2", "conflicts with p0/p1/p2")),
        (Some(g2), false) => {
            let b = match (r.f64("brightness")?, scheme) {
                (Some(b), _) => b,
                (None, Scheme::Rf) => 1.0,
                (None, Scheme::La) => return Err(err("brightness", "required with g2 under LA excitation")),
            };
            Ok((g2_to_probabilities(g2, b, scheme).map_err(|e| err("g2", e.to_string()))?, Some(g2)))
        }
        (None, true) => {
            if r.has("brightness") {
                return Err(err("brightness", "only used together with g2"));
            }
            let p = EmissionProbabilities::new(r.f64_or("p0", 0.0)?, r.f64_or("p1", 0.0)?, r.f64_or("p2", 0.0)?)
                .map_err(|e| err("p0", e.to_string()))?;
            Ok((p, None))
        }
        (None, false) => {
            if r.has("brightness") {
                return Err(err("brightness", "only used together with g2"));
            }
            Ok((EmissionProbabilities::ideal(), None))
        }
    }
}

fn rate_budget(r: &Reader) -> Result<Option<RateBudget>> {
    const RATE_KEYS: [&str; 5] = ["eta_qdsps", "eta_fl", "eta_mzi", "eta_d", "r_qd"];
    if !RATE_KEYS.iter().any(|k| r.has(k)) {
        return Ok(None);
    }
    let mut vals = [0.0; 5];
    for (i, k) in RATE_KEYS.iter().enumerate() {
        vals[i] = r.f64(k)?.ok_or_else(|| err(k, "all of eta_qdsps, eta_fl, eta_mzi, eta_d, r_qd are needed"))?;
    }
    RateBudget::new(vals[0], vals[1], vals[2], vals[3], vals[4]).map(Some).map_err(|e| err("r_qd", e.to_string()))
}

fn tomo_config(r: &Reader) -> Result<TomoConfig> {
    let source = match r.str("tomo_state").unwrap_or("model") {
        "model" => TomoSource::Model,
        "werner" => TomoSource::Werner,
        "singlet" => TomoSource::Singlet,
        "file" => TomoSource::File,
        other => return Err(err("tomo_state", format!("`{other}` is not one of model, werner, singlet, file"))),
    };
    let likelihood = match r.str("likelihood").unwrap_or("multinomial") {
        "multinomial" => Likelihood::Multinomial,
        "poisson" => Likelihood::Poisson,
        other => return Err(err("likelihood", format!("`{other}` is not one of multinomial, poisson"))),
    };
    let t = TomoConfig {
        shots: r.u64("shots")?.unwrap_or(10_000),
        seed: r.u64("seed")?.unwrap_or(0),
        noiseless: r.bool("noiseless")?.unwrap_or(false),
        likelihood,
        source,
        state_file: r.path("state_file"),
        dataset_out: r.path("dataset_out"),
        dataset_in: r.path("dataset_in"),
    };
    if t.shots == 0 {
        return Err(err("shots", "must be at least 1"));
    }
    if (t.source == TomoSource::File) != t.state_file.is_some() {
        return Err(err("state_file", "required exactly when tomo_state = file"));
    }
    if t.noiseless && (t.dataset_in.is_some() || t.dataset_out.is_some()) {
        return Err(err("noiseless", "noiseless frequencies have no count dataset"));
    }
    Ok(t)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let (raw, axes) = tokenize(text)?;
        // The base configuration sits at the first grid point, so swept keys
        // need no separate value.
        let mut base = raw.clone();
        for a in &axes {
            base.insert(a.name.clone(), format!("{:e}", a.start));
        }
        let mut cfg = Self::from_map(base)?;
        cfg.raw = raw;
        cfg.axes = axes;
        // Every grid point is validated before anything is computed.
        for point in cfg.grid() {
            cfg.at(&point)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| err("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_map(raw: BTreeMap<String, String>) -> Result<Self> {
        let r = Reader(&raw);
        let scheme = match r.str("scheme") {
            None => Scheme::La,
            Some(s) => s.parse().map_err(|e: Error| err("scheme", e.to_string()))?,
        };
        let (probs, g2) = probabilities(&r, scheme)?;
        let q_default = 1.0;
        let params = SourceParams {
            bs1: beam_splitter(&r, 1)?,
            bs2: beam_splitter(&r, 2)?,
            v: r.f64_or("v", 1.0)?,
            v_l: r.f64_or("v_l", SourceParams::DEFAULT_V_L)?,
            q: r.f64_or("q", q_default)?,
            chi: r.f64_or("chi", 0.0)?,
            eta: r.f64_or("eta", SourceParams::ideal().eta)?,
            probs,
            c_wn: r.f64_or("c_wn", 1.0)?,
            scheme,
        };
        params.validate().map_err(|e| err(blame(&e), e.to_string()))?;
        Ok(Self {
            params,
            g2,
            rf_phase: r.f64_or("rf_phase", 0.0)?,
            rate: rate_budget(&r)?,
            tomo: tomo_config(&r)?,
            axes: Vec::new(),
            debug_oracle_v_offset: r.f64_or("debug_oracle_v_offset", 0.0)?,
            raw,
        })
    }

    /// Row-major grid of axis values; a single empty point without axes.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            let vals = axis.values();
            out = out.iter().flat_map(|p| vals.iter().map(move |&x| [p.as_slice(), &[x]].concat())).collect();
        }
        out
    }

    /// Configuration with the sweep axes pinned to `point`.
    pub fn at(&self, point: &[f64]) -> Result<Self> {
        let mut raw = self.raw.clone();
        for (axis, x) in self.axes.iter().zip(point) {
            raw.insert(axis.name.clone(), format!("{x:e}"));
        }
        Self::from_map(raw)
    }
}

/// Best-effort key for a parameter validation message.
fn blame(e: &Error) -> &'static str {
    let msg = e.to_string();
    ["v_l", "c_wn", "eta", "chi", "q", "v", "p0"]
        .into_iter()
        .find(|k| msg.contains(&format!("{k} ")))
        .or_else(|| msg.contains("LA excitation").then_some("q"))
        .or_else(|| msg.contains("beam splitter").then_some("t1"))
        .unwrap_or("params")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_ideal() {
        let c = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c.params, SourceParams::ideal());
        assert!(c.rate.is_none());
        assert_eq!(c.tomo.shots, 10_000);
    }

    #[test]
    fn unknown_key_is_named() {
        match RunConfig::parse("v = 0.9\nvisibility = 0.9\n") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "visibility"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_are_named() {
        for (text, key) in [
            ("v = abc", "v"),
            ("v = 1.5", "v"),
            ("eta = 1", "eta"),
            ("scheme = XX", "scheme"),
            ("g2 = 0.01", "brightness"),
            ("g2 = 0.01\np2 = 0.1", "g2"),
            ("shots = 0", "shots"),
            ("v = 0.5\nv = 0.6", "v"),
            ("axis = v 0 1", "axis"),
            ("axis = shots 0 1 3", "axis"),
            ("eta_d = 0.5", "eta_qdsps"),
            ("scheme = LA\nq = 0.9", "q"),
            ("tomo_state = file", "state_file"),
        ] {
            match RunConfig::parse(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn g2_and_brightness() {
        let c = RunConfig::parse("scheme = LA\ng2 = 0.012\nbrightness = 0.5\nv = 0.927\neta = 0.00829").unwrap();
        assert_eq!(c.g2, Some(0.012));
        assert!((c.params.probs.p0 - 0.5).abs() < 1e-12);
        let rf = RunConfig::parse("scheme = RF\ng2 = 0.016\nq = 0.95").unwrap();
        assert!(rf.params.probs.p0.abs() < 1e-12);
        assert_eq!(rf.params.q, 0.95);
    }

    #[test]
    fn beam_splitter_forms() {
        let c = RunConfig::parse("bs1_transmissivity = 0.36\nt2 = 0.6").unwrap();
        assert!((c.params.bs1.t - 0.6).abs() < 1e-15 && (c.params.bs1.r - 0.8).abs() < 1e-15);
        assert!((c.params.bs2.r - 0.8).abs() < 1e-15);
        assert!(RunConfig::parse("t1 = 0.6\nbs1_transmissivity = 0.36").is_err());
        assert!(RunConfig::parse("t1 = 0.6\nr1 = 0.6").is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let c = RunConfig::parse("axis = v 0.5 1 2\naxis = c_wn 0.8 1 3\n").unwrap();
        let g = c.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![0.5, 0.8]);
        assert_eq!(g[1], vec![0.5, 0.9]);
        assert_eq!(g[3], vec![1.0, 0.8]);
        let p = c.at(&g[4]).unwrap();
        assert_eq!((p.params.v, p.params.c_wn), (1.0, 0.9));
    }

    #[test]
    fn grid_points_are_validated_up_front() {
        assert!(RunConfig::parse("axis = v 0.5 1.5 3").is_err());
        assert!(RunConfig::parse("scheme = LA\naxis = q 0.9 1 2").is_err());
    }

    #[test]
    fn axis_endpoints_exact() {
        let a = SweepAxis { name: "v".into(), start: 0.1, stop: 0.7, count: 7 };
        let v = a.values();
        assert_eq!((v[0], v[6]), (0.1, 0.7));
        assert_eq!(SweepAxis { count: 1, ..a }.values(), vec![0.1]);
    }

    #[test]
    fn rate_budget_needs_all_keys() {
        let c = RunConfig::parse("eta_qdsps = 0.104\neta_fl = 0.57\neta_mzi = 0.5\neta_d = 0.35\nr_qd = 79e6").unwrap();
        assert!(c.rate.is_some());
    }
}
