use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::state::{c, C64};

/// Terms whose amplitude magnitude falls below this are dropped.
pub const PRUNE_TOL: f64 = 1e-15;

/// Number of time bins tracked: emission at `t0`, `t0 + tau`, and the
/// delayed copy of the second pulse at `t0 + 2 tau`.
pub const TRACKED_BINS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }
}

/// Index of an internal (spectral/temporal wavepacket) state in an [`OverlapTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InternalId(pub usize);

/// Time bin in units of the pulse separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeBin(pub u8);

/// A single bosonic creation operator. Field order is the canonical sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub path: Path,
    pub pol: Pol,
    pub internal: InternalId,
    pub bin: TimeBin,
}

impl ModeLabel {
    pub fn new(path: Path, pol: Pol, internal: InternalId, bin: u8) -> Self {
        Self { path, pol, internal, bin: TimeBin(bin) }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = match self.path {
            Path::A => 'a',
            Path::B => 'b',
        };
        let pol = match self.pol {
            Pol::H => 'H',
            Pol::V => 'V',
        };
        write!(f, "{path}+[{pol},#{},t{}]", self.internal.0, self.bin.0)
    }
}

/// Sorted product of creation operators acting on the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<ModeLabel>);

impl Monomial {
    pub fn vacuum() -> Self {
        Self(Vec::new())
    }

    pub fn from_modes(mut modes: Vec<ModeLabel>) -> Self {
        modes.sort();
        Self(modes)
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.0
    }

    pub fn photon_number(&self) -> usize {
        self.0.len()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut modes = self.0.clone();
        modes.extend_from_slice(&other.0);
        Monomial::from_modes(modes)
    }
}

/// Image of one creation operator under a linear mode map. `None` means the
/// operator left the tracked mode space and its term is discarded.
pub type ModeImage = Option<Vec<(C64, ModeLabel)>>;

/// Linear combination of creation-operator monomials over the vacuum.
///
/// Like monomials are merged on insertion and the map keeps them in canonical
/// order, so two expressions built along different routes compare equal term
/// by term.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockExpression {
    terms: BTreeMap<Monomial, C64>,
    overflowed: bool,
}

impl FockExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        let mut e = Self::zero();
        e.add_term(Monomial::vacuum(), c(1.0, 0.0));
        e
    }

    pub fn single(mode: ModeLabel) -> Self {
        let mut e = Self::zero();
        e.add_term(Monomial::from_modes(vec![mode]), c(1.0, 0.0));
        e
    }

    pub fn add_term(&mut self, m: Monomial, amp: C64) {
        let slot = self.terms.entry(m).or_insert(c(0.0, 0.0));
        *slot += amp;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(c(0.0, 0.0))
    }

    /// True if some term was dropped because a photon left the tracked bins.
    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn scaled(&self, k: C64) -> Self {
        let mut out = Self { terms: BTreeMap::new(), overflowed: self.overflowed };
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * k);
        }
        out.pruned()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.add_term(m.clone(), *a);
        }
        out.overflowed |= other.overflowed;
        out.pruned()
    }

    /// Product of two operator polynomials (creation operators commute).
    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), overflowed: self.overflowed || other.overflowed };
        for (m1, a1) in &self.terms {
            for (m2, a2) in &other.terms {
                out.add_term(m1.times(m2), a1 * a2);
            }
        }
        out.pruned()
    }

    /// Apply a linear map to every creation operator and expand the products.
    pub fn map_modes(&self, f: impl Fn(ModeLabel) -> ModeImage) -> Self {
        let mut out = Self { terms: BTreeMap::new(), overflowed: self.overflowed };
        'terms: for (mono, amp) in &self.terms {
            let mut partial: Vec<(C64, Vec<ModeLabel>)> = vec![(*amp, Vec::with_capacity(mono.photon_number()))];
            for &mode in mono.modes() {
                let Some(image) = f(mode) else {
                    out.overflowed = true;
                    continue 'terms;
                };
                let mut next = Vec::with_capacity(partial.len() * image.len());
                for (a, modes) in &partial {
                    for &(k, m) in &image {
                        let mut ms = modes.clone();
                        ms.push(m);
                        next.push((a * k, ms));
                    }
                }
                partial = next;
            }
            for (a, modes) in partial {
                out.add_term(Monomial::from_modes(modes), a);
            }
        }
        out.pruned()
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, a)| (m.clone(), *a)).collect(),
            overflowed: self.overflowed,
        }
    }

    /// Sum of |amplitude|^2 over terms; the squared norm when no mode is repeated.
    pub fn weight(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Largest coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (m, a) in &self.terms {
            d = d.max((a - other.amplitude(m)).norm());
        }
        for (m, a) in &other.terms {
            if !self.terms.contains_key(m) {
                d = d.max(a.norm());
            }
        }
        d
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, a| a.norm() >= PRUNE_TOL);
        self
    }
}

impl fmt::Display for FockExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", a.re, a.im)?;
            for mode in m.modes() {
                write!(f, " {mode}")?;
            }
            if m.photon_number() == 0 {
                f.write_str(" |0>")?;
            }
        }
        Ok(())
    }
}

/// Gram matrix of internal states: `entry(i, j) = <i|j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTable {
    names: Vec<String>,
    gram: Vec<Vec<C64>>,
}

impl OverlapTable {
    pub fn new() -> Self {
        Self { names: Vec::new(), gram: Vec::new() }
    }

    /// Register a new internal state, orthogonal to all existing ones.
    pub fn add(&mut self, name: &str) -> InternalId {
        let n = self.names.len();
        for row in &mut self.gram {
            row.push(c(0.0, 0.0));
        }
        let mut row = vec![c(0.0, 0.0); n + 1];
        row[n] = c(1.0, 0.0);
        self.gram.push(row);
        self.names.push(name.to_string());
        InternalId(n)
    }

    /// Set `<i|j> = amp` and `<j|i> = conj(amp)`.
    pub fn set_overlap(&mut self, i: InternalId, j: InternalId, amp: C64) -> Result<()> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(Error::InvalidParams("diagonal overlaps are fixed to 1".into()));
        }
        if amp.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!("overlap magnitude {} exceeds 1", amp.norm())));
        }
        self.gram[i.0][j.0] = amp;
        self.gram[j.0][i.0] = amp.conj();
        Ok(())
    }

    pub fn get(&self, i: InternalId, j: InternalId) -> Result<C64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.gram[i.0][j.0])
    }

    pub fn name(&self, i: InternalId) -> Option<&str> {
        self.names.get(i.0).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn check(&self, i: InternalId) -> Result<()> {
        if i.0 < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownLabel(i.0))
        }
    }
}

impl Default for OverlapTable {
    fn default() -> Self {
        Self::new()
    }
}
