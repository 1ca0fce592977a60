//! Mode maps of the unbalanced Mach-Zehnder: first beam splitter, polarization
//! switch on the short arm, delay on the long arm, second beam splitter and
//! the crystal phase on output arm `b`.

use crate::error::{Error, Result};
use crate::state::{c, CMat4, C64};

use super::expr::{FockExpression, ModeLabel, OverlapTable, Path, Pol, TimeBin, TRACKED_BINS};

const UNIT_TOL: f64 = 1e-12;

/// Real amplitude coefficients `(t, r)` of a lossless beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    pub t: f64,
    pub r: f64,
}

impl BeamSplitter {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if t < 0.0 || r < 0.0 || (t * t + r * r - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParams(format!("beam splitter t = {t}, r = {r} needs t^2 + r^2 = 1")));
        }
        Ok(Self { t, r })
    }

    pub fn balanced() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { t: s, r: s }
    }

    /// From the intensity transmissivity `T`.
    pub fn from_transmissivity(tt: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tt) {
            return Err(Error::InvalidParams(format!("transmissivity {tt} outside [0, 1]")));
        }
        Ok(Self { t: tt.sqrt(), r: (1.0 - tt).sqrt() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerSpec {
    pub bs1: BeamSplitter,
    pub bs2: BeamSplitter,
    /// Phase on H photons leaving the second beam splitter on arm `b`.
    pub chi: f64,
}

impl InterferometerSpec {
    pub fn balanced() -> Self {
        Self { bs1: BeamSplitter::balanced(), bs2: BeamSplitter::balanced(), chi: 0.0 }
    }
}

/// `a+ -> t a+ + i r b+`, `b+ -> i r a+ + t b+`.
pub fn apply_beamsplitter(state: &FockExpression, bs: BeamSplitter) -> FockExpression {
    let (t, ir) = (c(bs.t, 0.0), c(0.0, bs.r));
    state.map_modes(|m| {
        let to_a = ModeLabel { path: Path::A, ..m };
        let to_b = ModeLabel { path: Path::B, ..m };
        Some(match m.path {
            Path::A => vec![(t, to_a), (ir, to_b)],
            Path::B => vec![(ir, to_a), (t, to_b)],
        })
    })
}

/// Shift every path-`b` operator by one time bin. Operators pushed past the
/// tracked bins cannot meet a partner at zero delay; their terms are dropped
/// and the expression is flagged.
pub fn apply_delay(state: &FockExpression) -> FockExpression {
    state.map_modes(|m| match m.path {
        Path::A => Some(vec![(c(1.0, 0.0), m)]),
        Path::B => {
            let bin = m.bin.0 + 1;
            (bin < TRACKED_BINS).then(|| vec![(c(1.0, 0.0), ModeLabel { bin: TimeBin(bin), ..m })])
        }
    })
}

/// Half-wave plate on the short arm: swaps H and V on path `a`.
pub fn apply_pol_switch(state: &FockExpression) -> FockExpression {
    state.map_modes(|m| {
        let out = match (m.path, m.pol) {
            (Path::A, Pol::H) => ModeLabel { pol: Pol::V, ..m },
            (Path::A, Pol::V) => ModeLabel { pol: Pol::H, ..m },
            _ => m,
        };
        Some(vec![(c(1.0, 0.0), out)])
    })
}

/// Multiply every path-`b`, H-polarized operator by `exp(i chi)`.
pub fn apply_chi_phase(state: &FockExpression, chi: f64) -> FockExpression {
    let phase = C64::from_polar(1.0, chi);
    state.map_modes(|m| {
        let k = if m.path == Path::B && m.pol == Pol::H { phase } else { c(1.0, 0.0) };
        Some(vec![(k, m)])
    })
}

/// Full interferometer: BS1, switch, delay, BS2, then the crystal phase.
pub fn evolve(state: &FockExpression, spec: &InterferometerSpec) -> FockExpression {
    let s = apply_beamsplitter(state, spec.bs1);
    let s = apply_pol_switch(&s);
    let s = apply_delay(&s);
    let s = apply_beamsplitter(&s, spec.bs2);
    apply_chi_phase(&s, spec.chi)
}

/// Keep two-photon terms with one photon per path in a common time bin.
pub fn postselect_coincidence(state: &FockExpression) -> FockExpression {
    state.filter(|m| match m.modes() {
        [x, y] => x.path == Path::A && y.path == Path::B && x.bin == y.bin,
        _ => false,
    })
}

/// Trace out internal states and time bins of a post-selected expression.
///
/// Each term carries `(pol_a, id_a)` and `(pol_b, id_b)`. Within a time bin
/// the contribution of the pair of terms `(k, l)` to
/// `rho[(pa_k, pb_k), (pa_l, pb_l)]` is `c_k conj(c_l) <id_a_l|id_a_k> <id_b_l|id_b_k>`.
/// Different time bins add incoherently.
pub fn reduce_to_polarization(state: &FockExpression, overlaps: &OverlapTable) -> Result<CMat4> {
    let mut rows = Vec::with_capacity(state.len());
    for (m, amp) in state.terms() {
        match m.modes() {
            [x, y] if x.path == Path::A && y.path == Path::B && x.bin == y.bin => {
                overlaps.get(x.internal, x.internal)?;
                overlaps.get(y.internal, y.internal)?;
                rows.push((*amp, *x, *y));
            }
            _ => return Err(Error::Domain(format!("expression is not post-selected: term {m:?}"))),
        }
    }
    let mut rho = CMat4::zeros();
    for &(ck, ak, bk) in &rows {
        let i = 2 * ak.pol.index() + bk.pol.index();
        for &(cl, al, bl) in &rows {
            if ak.bin != al.bin {
                continue;
            }
            let j = 2 * al.pol.index() + bl.pol.index();
            let g = overlaps.get(al.internal, ak.internal)? * overlaps.get(bl.internal, bk.internal)?;
            rho[(i, j)] += ck * cl.conj() * g;
        }
    }
    Ok(rho)
}
