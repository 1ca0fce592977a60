//! Photon-number statistics of the emitter, Hong-Ou-Mandel visibility
//! relations and the coincidence-rate budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for every probability comparison in this module.
pub const PROB_TOL: f64 = 1e-12;

/// Excitation scheme of the quantum dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Phonon-assisted (longitudinal-acoustic) excitation; no vacuum coherence.
    #[serde(rename = "LA")]
    La,
    /// Resonant fluorescence; emission is coherent with the vacuum.
    #[serde(rename = "RF")]
    Rf,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LA" => Ok(Scheme::La),
            "RF" => Ok(Scheme::Rf),
            other => Err(Error::Parse(format!("unknown scheme `{other}` (expected LA or RF)"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::La => "LA",
            Scheme::Rf => "RF",
        })
    }
}

/// Per-pulse probabilities of emitting zero, one or two photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionProbabilities {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl EmissionProbabilities {
    pub fn new(p0: f64, p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p0", p0), ("p1", p1), ("p2", p2)] {
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} outside [0, 1]")));
            }
        }
        let total = p0 + p1 + p2;
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Domain(format!("p0 + p1 + p2 = {total} != 1")));
        }
        Ok(Self { p0, p1, p2 })
    }

    /// A perfect single-photon source.
    pub fn ideal() -> Self {
        Self { p0: 0.0, p1: 1.0, p2: 0.0 }
    }
}

/// Second-order autocorrelation at zero delay, `2 p2 / (p1 + 2 p2)^2`.
pub fn g2_from_probabilities(p: &EmissionProbabilities) -> Result<f64> {
    let mean = p.p1 + 2.0 * p.p2;
    if mean <= 0.0 {
        return Err(Error::Domain("p1 + 2 p2 must be positive".into()));
    }
    Ok(2.0 * p.p2 / (mean * mean))
}

/// Invert the g2 relation under the scheme's constraint.
///
/// LA fixes `p0 = 1 - B` and `p1 + p2 = B`; RF has `p0 = 0` and ignores `B`.
/// With `p1 + 2 p2 = B + p2` the relation becomes the quadratic
/// `g2 p2^2 + 2 (g2 B - 1) p2 + g2 B^2 = 0`, whose roots multiply to `B^2`.
/// Only the smaller root lies in `[0, B]`; it is evaluated in the
/// cancellation-free form `g2 B^2 / ((1 - g2 B) + sqrt(1 - 2 g2 B))`.
pub fn g2_to_probabilities(g2: f64, brightness: f64, scheme: Scheme) -> Result<EmissionProbabilities> {
    if !(0.0..0.5).contains(&g2) {
        return Err(Error::Domain(format!("g2 = {g2} outside [0, 0.5)")));
    }
    let b = match scheme {
        Scheme::Rf => 1.0,
        Scheme::La => {
            if !(brightness > 0.0 && brightness <= 1.0) {
                return Err(Error::Domain(format!("brightness {brightness} outside (0, 1]")));
            }
            brightness
        }
    };
    let disc = 1.0 - 2.0 * g2 * b;
    if disc < 0.0 {
        return Err(Error::Domain(format!("no real root for g2 = {g2}, B = {b}")));
    }
    let p2 = g2 * b * b / ((1.0 - g2 * b) + disc.sqrt());
    if !(0.0..=b + PROB_TOL).contains(&p2) {
        return Err(Error::Domain(format!("root p2 = {p2} outside [0, {b}]")));
    }
    let p1 = (b - p2).max(0.0);
    EmissionProbabilities::new(1.0 - b, p1, p2)
}

/// `v = 1 - 2 P_cc`.
pub fn hom_visibility_from_coincidence(p_cc: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p_cc) {
        return Err(Error::Domain(format!("coincidence probability {p_cc} outside [0, 1/2]")));
    }
    Ok(1.0 - 2.0 * p_cc)
}

/// Inputs of the measured-visibility relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomMeasurement {
    /// Beam-splitter intensity reflectivity.
    pub reflectivity: f64,
    /// Beam-splitter intensity transmissivity.
    pub transmissivity: f64,
    pub g2: f64,
    /// Overlap between signal and noise photons.
    pub v_sn: f64,
}

impl HomMeasurement {
    pub fn balanced(g2: f64) -> Self {
        Self { reflectivity: 0.5, transmissivity: 0.5, g2, v_sn: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        let (r, t) = (self.reflectivity, self.transmissivity);
        if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&t) || (r + t - 1.0).abs() > PROB_TOL {
            return Err(Error::Domain(format!("R = {r}, T = {t} must be in [0,1] with R + T = 1")));
        }
        if self.g2 < 0.0 {
            return Err(Error::Domain(format!("g2 = {} is negative", self.g2)));
        }
        if !(0.0..1.0).contains(&self.v_sn) {
            return Err(Error::Domain(format!("v_sn = {} outside [0, 1)", self.v_sn)));
        }
        Ok(())
    }
}

/// Visibility that a HOM measurement would report for true indistinguishability
/// `v_true`: `4RT (1 + v - (1 + v) g2 / (1 - v_sn)) - 1`.
pub fn measured_visibility_model(m: &HomMeasurement, v_true: f64) -> Result<f64> {
    m.validate()?;
    let rt4 = 4.0 * m.reflectivity * m.transmissivity;
    let one_v = 1.0 + v_true;
    Ok(rt4 * (one_v - one_v / (1.0 - m.v_sn) * m.g2) - 1.0)
}

/// Indistinguishability corrected for multiphoton noise, `(v_m + g2)/(1 - g2)`.
pub fn corrected_visibility(v_m: f64, g2: f64) -> Result<f64> {
    if g2 >= 1.0 {
        return Err(Error::Domain(format!("g2 = {g2} must be < 1")));
    }
    Ok((v_m + g2) / (1.0 - g2))
}

/// Per-stage transmissions feeding the coincidence rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBudget {
    pub eta_qdsps: f64,
    pub eta_fl: f64,
    pub eta_mzi: f64,
    pub eta_d: f64,
    /// Pump repetition rate in Hz.
    pub r_qd: f64,
}

impl RateBudget {
    pub fn new(eta_qdsps: f64, eta_fl: f64, eta_mzi: f64, eta_d: f64, r_qd: f64) -> Result<Self> {
        for (name, e) in [("eta_qdsps", eta_qdsps), ("eta_fl", eta_fl), ("eta_mzi", eta_mzi), ("eta_d", eta_d)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Domain(format!("{name} = {e} outside [0, 1]")));
            }
        }
        if r_qd.is_nan() || r_qd <= 0.0 || !r_qd.is_finite() {
            return Err(Error::Domain(format!("repetition rate {r_qd} must be positive")));
        }
        Ok(Self { eta_qdsps, eta_fl, eta_mzi, eta_d, r_qd })
    }
}

/// Expected two-fold coincidence rate in Hz. The 1/8 collects the 1/4 chance
/// that consecutive photons take opposite arms and the 1/2 of post-selection.
pub fn expected_coincidence_rate(b: &RateBudget) -> f64 {
    let t = b.eta_qdsps * b.eta_fl * b.eta_mzi * b.eta_d;
    t * t * b.r_qd / 8.0
}

/// Dark-count coincidence probability `R_dd * dt_cw`.
pub fn dark_count_probability(r_dd: f64, delta_t_cw: f64) -> Result<f64> {
    if r_dd < 0.0 || delta_t_cw < 0.0 {
        return Err(Error::Domain("dark-count rate and window must be non-negative".into()));
    }
    Ok(r_dd * delta_t_cw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Substitution check of the defining relation `2 p2 = g2 (p1 + 2 p2)^2`.
    fn residual(g2: f64, p: &EmissionProbabilities) -> f64 {
        2.0 * p.p2 - g2 * (p.p1 + 2.0 * p.p2).powi(2)
    }

    /// Bisection on `[0, B/2]` for the root of the defining relation, kept
    /// independent of the closed-form root.
    fn bisect_p2(g2: f64, b: f64) -> f64 {
        let f = |p2: f64| 2.0 * p2 - g2 * (b + p2).powi(2);
        // f(0) = -g2 B^2 <= 0 and f(B) = 2B (1 - 2 g2 B) > 0.
        let (mut lo, mut hi) = (0.0, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 { lo = mid } else { hi = mid }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn g2_from_probabilities_examples() {
        let ideal = EmissionProbabilities::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(g2_from_probabilities(&ideal).unwrap(), 0.0);

        let p = EmissionProbabilities::new(0.5, 0.45, 0.05).unwrap();
        assert!((g2_from_probabilities(&p).unwrap() - 0.1 / 0.3025).abs() < 1e-15);
        assert!((g2_from_probabilities(&p).unwrap() - 0.3306).abs() < 1e-4);

        let p = EmissionProbabilities::new(0.0, 0.99187, 0.00813).unwrap();
        assert!((g2_from_probabilities(&p).unwrap() - 0.016).abs() < 1e-4);
    }

    #[test]
    fn g2_from_probabilities_degenerate() {
        let p = EmissionProbabilities { p0: 1.0, p1: 0.0, p2: 0.0 };
        assert!(matches!(g2_from_probabilities(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn g2_to_probabilities_examples() {
        let p = g2_to_probabilities(0.0, 1.0, Scheme::La).unwrap();
        assert_eq!((p.p0, p.p1, p.p2), (0.0, 1.0, 0.0));

        let p = g2_to_probabilities(0.016, 0.3, Scheme::Rf).unwrap();
        assert_eq!(p.p0, 0.0);
        assert!((p.p2 - 0.00813).abs() < 1e-5);
        assert!((p.p1 - 0.99187).abs() < 1e-5);
        assert!((p.p2 - bisect_p2(0.016, 1.0)).abs() < 1e-14);
        assert!(residual(0.016, &p).abs() < 1e-15);

        let p = g2_to_probabilities(0.012, 0.5, Scheme::La).unwrap();
        assert!((p.p0 - 0.5).abs() < 1e-15);
        assert!((p.p1 + p.p2 - 0.5).abs() < 1e-15);
        assert!((p.p2 - bisect_p2(0.012, 0.5)).abs() < 1e-14);
        assert!(residual(0.012, &p).abs() < 1e-15);
        assert!(p.p2 <= p.p1);
    }

    #[test]
    fn g2_to_probabilities_rejects_out_of_domain() {
        assert!(g2_to_probabilities(0.5, 1.0, Scheme::Rf).is_err());
        assert!(g2_to_probabilities(-0.1, 1.0, Scheme::Rf).is_err());
        assert!(g2_to_probabilities(0.1, 0.0, Scheme::La).is_err());
        assert!(g2_to_probabilities(0.1, 1.5, Scheme::La).is_err());
    }

    #[test]
    fn hom_visibility_examples() {
        assert_eq!(hom_visibility_from_coincidence(0.0).unwrap(), 1.0);
        assert_eq!(hom_visibility_from_coincidence(0.5).unwrap(), 0.0);
        assert_eq!(hom_visibility_from_coincidence(0.25).unwrap(), 0.5);
        assert!(hom_visibility_from_coincidence(0.6).is_err());
        assert!(hom_visibility_from_coincidence(-0.1).is_err());
    }

    #[test]
    fn measured_visibility_examples() {
        let ideal = HomMeasurement::balanced(0.0);
        assert_eq!(measured_visibility_model(&ideal, 1.0).unwrap(), 1.0);

        let la = HomMeasurement::balanced(0.012);
        let vm = measured_visibility_model(&la, 0.927).unwrap();
        assert!((vm - 0.904).abs() < 0.002, "{vm}");

        let m = HomMeasurement { reflectivity: 0.517, transmissivity: 0.483, g2: 0.012, v_sn: 0.0 };
        let expected = 4.0 * 0.517 * 0.483 * (1.927 - 1.927 * 0.012) - 1.0;
        assert!((measured_visibility_model(&m, 0.927).unwrap() - expected).abs() < 1e-15);

        let bad = HomMeasurement { v_sn: 1.0, ..HomMeasurement::balanced(0.01) };
        assert!(measured_visibility_model(&bad, 0.9).is_err());
    }

    #[test]
    fn corrected_visibility_examples() {
        assert!((corrected_visibility(0.904, 0.012).unwrap() - 0.927).abs() < 1e-3);
        assert!((corrected_visibility(0.918, 0.016).unwrap() - 0.949).abs() < 1e-3);
        assert_eq!(corrected_visibility(1.0, 0.0).unwrap(), 1.0);
        assert!(corrected_visibility(0.5, 1.0).is_err());
    }

    #[test]
    fn coincidence_rate_examples() {
        let la = RateBudget::new(0.104, 0.57, 0.5, 0.35, 79e6).unwrap();
        let r = expected_coincidence_rate(&la);
        assert!((r - 1.0628e3).abs() < 1.0, "{r}");

        let lossless = RateBudget::new(1.0, 1.0, 1.0, 1.0, 79e6).unwrap();
        assert_eq!(expected_coincidence_rate(&lossless), 9.875e6);

        let rf = RateBudget::new(0.072, 0.50, 0.5, 0.35, 79e6).unwrap();
        let expected = (0.072f64 * 0.5 * 0.5 * 0.35).powi(2) * 79e6 / 8.0;
        let r = expected_coincidence_rate(&rf);
        assert!((r - expected).abs() < 1e-9);
        assert!(r > 100.0 && r < 1000.0);

        assert!(RateBudget::new(1.2, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(RateBudget::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn dark_counts() {
        assert_eq!(dark_count_probability(0.0, 1e-9).unwrap(), 0.0);
        assert!((dark_count_probability(1500.0, 1e-9).unwrap() - 1.5e-6).abs() < 1e-20);
        assert!((dark_count_probability(100.0, 2e-9).unwrap() - 2e-7).abs() < 1e-20);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        assert!(EmissionProbabilities::new(0.1, 0.8, 0.05).is_err());
        assert!(EmissionProbabilities::new(-0.1, 1.0, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn g2_round_trip(g2 in 0.0f64..0.499, b in 0.01f64..=1.0, rf in any::<bool>()) {
            let scheme = if rf { Scheme::Rf } else { Scheme::La };
            let p = g2_to_probabilities(g2, b, scheme).unwrap();
            let back = g2_from_probabilities(&p).unwrap();
            prop_assert!((back - g2).abs() < 1e-10, "{} vs {}", back, g2);
        }

        #[test]
        fn corrected_inverts_measured(v in 0.0f64..=1.0, g2 in 0.0f64..=0.4) {
            let vm = measured_visibility_model(&HomMeasurement::balanced(g2), v).unwrap();
            let back = corrected_visibility(vm, g2).unwrap();
            prop_assert!((back - v).abs() < 1e-12);
        }

        #[test]
        fn corrected_is_increasing(vm in -0.99f64..1.0, g2 in 0.0f64..0.9, dv in 1e-6f64..0.01) {
            let base = corrected_visibility(vm, g2).unwrap();
            prop_assert!(corrected_visibility(vm + dv, g2).unwrap() > base);
            prop_assert!(corrected_visibility(vm, g2 + dv * 0.05).unwrap() > base);
        }

        #[test]
        fn rate_scales_quadratically(e in 0.01f64..0.5, which in 0usize..4) {
            let mut etas = [0.3, 0.4, 0.45, 0.35];
            let base = RateBudget::new(etas[0], etas[1], etas[2], etas[3], 79e6).unwrap();
            etas[which] = e;
            let b1 = RateBudget::new(etas[0], etas[1], etas[2], etas[3], 79e6).unwrap();
            etas[which] = 2.0 * e;
            let b2 = RateBudget::new(etas[0], etas[1], etas[2], etas[3], 79e6).unwrap();
            let r1 = expected_coincidence_rate(&b1);
            prop_assert!((expected_coincidence_rate(&b2) / r1 - 4.0).abs() < 1e-12);
            prop_assert!(expected_coincidence_rate(&base) > 0.0);
        }
    }
}
