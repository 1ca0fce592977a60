use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::state::{c, CMat4, CVec4, TwoQubitState, C64};
use nalgebra::Vector2;

/// Measured single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Unit eigenvector for eigenvalue `+1` (`plus`) or `-1`.
    pub fn eigenvector(self, plus: bool) -> Vector2<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if plus { 1.0 } else { -1.0 };
        match (self, plus) {
            (Pauli::Z, true) => Vector2::new(c(1., 0.), c(0., 0.)),
            (Pauli::Z, false) => Vector2::new(c(0., 0.), c(1., 0.)),
            (Pauli::X, _) => Vector2::new(c(s, 0.), c(sign * s, 0.)),
            (Pauli::Y, _) => Vector2::new(c(s, 0.), c(0., sign * s)),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

impl FromStr for Pauli {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            _ => Err(Error::Parse(format!("unknown Pauli label `{s}`"))),
        }
    }
}

/// One of the nine local Pauli measurement settings.
///
/// Outcomes are ordered `(+,+), (+,-), (-,+), (-,-)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TomographySetting {
    pub pauli_a: Pauli,
    pub pauli_b: Pauli,
}

pub const OUTCOME_SIGNS: [(bool, bool); 4] = [(true, true), (true, false), (false, true), (false, false)];

impl TomographySetting {
    pub const fn new(pauli_a: Pauli, pauli_b: Pauli) -> Self {
        Self { pauli_a, pauli_b }
    }

    /// `XX, XY, XZ, YX, ..., ZZ`.
    pub fn all() -> [TomographySetting; 9] {
        std::array::from_fn(|i| Self::new(Pauli::ALL[i / 3], Pauli::ALL[i % 3]))
    }

    /// Position in [`TomographySetting::all`].
    pub fn index(self) -> usize {
        3 * self.pauli_a as usize + self.pauli_b as usize
    }

    /// Product eigenvectors in outcome order.
    pub fn vectors(self) -> [CVec4; 4] {
        OUTCOME_SIGNS.map(|(sa, sb)| {
            let a = self.pauli_a.eigenvector(sa);
            let b = self.pauli_b.eigenvector(sb);
            CVec4::from_fn(|i, _| a[i / 2] * b[i % 2])
        })
    }

    pub fn projectors(self) -> [CMat4; 4] {
        self.vectors().map(|v| v * v.adjoint())
    }
}

impl fmt::Display for TomographySetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.pauli_a, self.pauli_b)
    }
}

/// `Tr[rho Pi_k]` in outcome order, clamped at zero.
pub fn outcome_probabilities(rho: &TwoQubitState, s: TomographySetting) -> [f64; 4] {
    s.vectors().map(|v| (v.adjoint() * rho.matrix() * v)[(0, 0)].re.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projectors_resolve_identity() {
        for s in TomographySetting::all() {
            let sum: CMat4 = s.projectors().iter().sum();
            assert!((sum - CMat4::identity()).norm() < 1e-12, "{s}");
            for p in s.projectors() {
                assert!((p * p - p).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigenvectors_have_right_eigenvalues() {
        use crate::state::{pauli_x, pauli_y, pauli_z};
        for (p, m) in [(Pauli::X, pauli_x()), (Pauli::Y, pauli_y()), (Pauli::Z, pauli_z())] {
            for plus in [true, false] {
                let v = p.eigenvector(plus);
                let lam = if plus { 1.0 } else { -1.0 };
                assert!((m * v - v * c(lam, 0.)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ordering_and_labels() {
        let all = TomographySetting::all();
        assert_eq!(all[0].to_string(), "XX");
        assert_eq!(all[1].to_string(), "XY");
        assert_eq!(all[8].to_string(), "ZZ");
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.index(), i);
        }
        assert!("W".parse::<Pauli>().is_err());
    }

    #[test]
    fn singlet_probabilities() {
        let s = TwoQubitState::singlet();
        for setting in [TomographySetting::new(Pauli::Z, Pauli::Z), TomographySetting::new(Pauli::X, Pauli::X)] {
            let p = outcome_probabilities(&s, setting);
            let want = [0.0, 0.5, 0.5, 0.0];
            for k in 0..4 {
                assert!((p[k] - want[k]).abs() < 1e-15, "{setting} {p:?}");
            }
        }
        for setting in TomographySetting::all() {
            let p = outcome_probabilities(&TwoQubitState::maximally_mixed(), setting);
            assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-15));
            let q = outcome_probabilities(&s, setting);
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
