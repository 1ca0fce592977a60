//! Entanglement and nonlocality metrics of two-qubit states.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{
    c, hermitian_eigen, kron, pauli_x, pauli_y, pauli_z, psd_sqrt, CMat2, CMat4, CVec4, TwoQubitState, C64,
};

/// Eigenvalues below this signal a broken input rather than rounding.
pub const CONCURRENCE_NEG_TOL: f64 = 1e-8;

pub type Bloch = Vector3<f64>;

/// `n . sigma` for a unit Bloch vector.
pub fn observable(n: &Bloch) -> CMat2 {
    pauli_x() * c(n.x, 0.0) + pauli_y() * c(n.y, 0.0) + pauli_z() * c(n.z, 0.0)
}

fn unit(n: Bloch, name: &str) -> Result<Bloch> {
    if (n.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!("{name} is not a unit vector (|n| = {})", n.norm())));
    }
    Ok(n)
}

/// Two dichotomic settings per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservablePair {
    pub a0: Bloch,
    pub a1: Bloch,
    pub b0: Bloch,
    pub b1: Bloch,
}

impl ObservablePair {
    pub fn new(a0: Bloch, a1: Bloch, b0: Bloch, b1: Bloch) -> Result<Self> {
        Ok(Self { a0: unit(a0, "a0")?, a1: unit(a1, "a1")?, b0: unit(b0, "b0")?, b1: unit(b1, "b1")? })
    }

    /// `A0 = Z`, `A1 = X`, `B0 = (Z+X)/sqrt2`, `B1 = (Z-X)/sqrt2`.
    pub fn canonical() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a0: Bloch::z(),
            a1: Bloch::x(),
            b0: Bloch::new(s, 0.0, s),
            b1: Bloch::new(-s, 0.0, s),
        }
    }
}

/// SU(2) element from Euler-type angles.
pub fn su2(a: f64, b: f64, g: f64) -> CMat2 {
    let e = |t: f64| C64::from_polar(1.0, t);
    let (cs, sn) = (a.cos(), a.sin());
    CMat2::new(e(b) * cs, -e(-g) * sn, e(g) * sn, e(-b) * cs)
}

/// `(U_A x U_B) rho (U_A x U_B)^dagger`.
pub fn apply_local_unitary(rho: &TwoQubitState, ua: &CMat2, ub: &CMat2) -> Result<TwoQubitState> {
    let k = kron(ua, ub);
    TwoQubitState::new(k * rho.matrix() * k.adjoint())
}

/// `Tr[rho (a.sigma) x (b.sigma)]`.
pub fn correlator(rho: &TwoQubitState, a: &Bloch, b: &Bloch) -> f64 {
    (rho.matrix() * kron(&observable(a), &observable(b))).trace().re
}

/// Signed CHSH combination `E00 + E01 + E10 - E11`.
pub fn chsh_value(rho: &TwoQubitState, s: &ObservablePair) -> f64 {
    correlator(rho, &s.a0, &s.b0) + correlator(rho, &s.a0, &s.b1) + correlator(rho, &s.a1, &s.b0)
        - correlator(rho, &s.a1, &s.b1)
}

/// `<psi|rho|psi>` for a normalized `psi`.
pub fn fidelity_pure(rho: &TwoQubitState, psi: &CVec4) -> f64 {
    let n = psi.norm_squared();
    (psi.adjoint() * rho.matrix() * psi)[(0, 0)].re / n
}

/// Root fidelity `Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`.
pub fn fidelity_general(rho1: &TwoQubitState, rho2: &TwoQubitState) -> f64 {
    let s1 = psd_sqrt(rho1.matrix());
    let inner = s1 * rho2.matrix() * s1;
    hermitian_eigen(&inner).0.iter().map(|x| x.max(0.0).sqrt()).sum()
}

/// Squared (Jozsa) fidelity; equals [`fidelity_pure`] when one state is pure.
pub fn fidelity_general_squared(rho1: &TwoQubitState, rho2: &TwoQubitState) -> f64 {
    fidelity_general(rho1, rho2).powi(2)
}

/// `(sigma_y x sigma_y) rho* (sigma_y x sigma_y)`.
pub fn spin_flip(rho: &CMat4) -> CMat4 {
    let yy = kron(&pauli_y(), &pauli_y());
    yy * rho.conjugate() * yy
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, with `l_i` the
/// decreasing square roots of the eigenvalues of `rho rho~`.
///
/// The `l_i` are taken as the singular values of `tau = A^dagger (Y x Y) A*`
/// for `rho = A A^dagger`. Null directions of `rho` then enter `tau` only at
/// second order, so rank-deficient states keep full precision.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64> {
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    if vals[0] < -CONCURRENCE_NEG_TOL {
        return Err(Error::Numerical(format!("state has eigenvalue {:e}", vals[0])));
    }
    let a = vecs * CMat4::from_diagonal(&vals.map(|x| c(x.max(0.0).sqrt(), 0.0)));
    let yy = kron(&pauli_y(), &pauli_y());
    let tau = a.adjoint() * yy * a.conjugate();
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|x, y| y.total_cmp(x));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// `T_ij = Tr[rho sigma_i x sigma_j]`, `i, j` over `x, y, z`.
pub fn correlation_matrix(rho: &TwoQubitState) -> Matrix3<f64> {
    let paulis = [pauli_x(), pauli_y(), pauli_z()];
    Matrix3::from_fn(|i, j| (rho.matrix() * kron(&paulis[i], &paulis[j])).trace().re)
}

/// Maximal CHSH value over all settings: `2 sqrt(s1^2 + s2^2)` with `s1 >= s2`
/// the two largest singular values of the correlation matrix.
pub fn horodecki_max(rho: &TwoQubitState) -> f64 {
    let t = correlation_matrix(rho);
    let mut sv: Vec<f64> = t.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt()
}

/// `1/2 ||rho1 - rho2||_1`.
pub fn trace_distance(rho1: &TwoQubitState, rho2: &TwoQubitState) -> f64 {
    let d = rho1.matrix() - rho2.matrix();
    0.5 * hermitian_eigen(&d).0.iter().map(|x| x.abs()).sum::<f64>()
}

pub fn purity(rho: &TwoQubitState) -> f64 {
    (rho.matrix() * rho.matrix()).trace().re
}

/// Metrics bundle used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub chsh_signed: f64,
    pub chsh: f64,
    pub fidelity_singlet: f64,
    pub concurrence: f64,
    pub horodecki_max: f64,
    pub purity: f64,
}

pub fn summarize(rho: &TwoQubitState) -> Result<MetricSummary> {
    let s = chsh_value(rho, &ObservablePair::canonical());
    Ok(MetricSummary {
        chsh_signed: s,
        chsh: s.abs(),
        fidelity_singlet: fidelity_pure(rho, &crate::state::singlet_vector()),
        concurrence: concurrence(rho)?,
        horodecki_max: horodecki_max(rho),
        purity: purity(rho),
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::source_model::apply_werner;
    use crate::state::singlet_vector;
    use nalgebra::Matrix4;
    use proptest::prelude::*;

    fn state_strategy() -> impl Strategy<Value = TwoQubitState> {
        prop::collection::vec(-1.0f64..1.0, 32).prop_map(|x| {
            let a = Matrix4::from_fn(|i, j| C64::new(x[4 * i + j], x[16 + 4 * i + j]));
            TwoQubitState::from_unnormalized(a * a.adjoint()).unwrap()
        })
    }

    fn bloch_strategy() -> impl Strategy<Value = Bloch> {
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
            let s = (1.0 - z * z).sqrt();
            Bloch::new(s * phi.cos(), s * phi.sin(), z)
        })
    }

    fn settings_strategy() -> impl Strategy<Value = ObservablePair> {
        (bloch_strategy(), bloch_strategy(), bloch_strategy(), bloch_strategy())
            .prop_map(|(a0, a1, b0, b1)| ObservablePair { a0, a1, b0, b1 })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn horodecki_dominates_fixed_settings(rho in state_strategy(),
                                              settings in prop::collection::vec(settings_strategy(), 1000)) {
            let bmax = horodecki_max(&rho);
            for s in &settings {
                prop_assert!(bmax >= chsh_value(&rho, s).abs() - 1e-9);
            }
        }

        #[test]
        fn chsh_is_linear(r1 in state_strategy(), r2 in state_strategy(), alpha in 0.0f64..1.0,
                          s in settings_strategy()) {
            let mix = TwoQubitState::new(r1.matrix() * c(alpha, 0.) + r2.matrix() * c(1.0 - alpha, 0.)).unwrap();
            let lhs = chsh_value(&mix, &s);
            let rhs = alpha * chsh_value(&r1, &s) + (1.0 - alpha) * chsh_value(&r2, &s);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn concurrence_is_local_unitary_invariant(rho in state_strategy(),
                                                  u in prop::array::uniform6(0.0f64..std::f64::consts::TAU)) {
            let rotated = apply_local_unitary(&rho, &su2(u[0], u[1], u[2]), &su2(u[3], u[4], u[5])).unwrap();
            prop_assert!((concurrence(&rotated).unwrap() - concurrence(&rho).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn werner_fidelity_is_affine(rho in state_strategy(), c1 in 0.0f64..1.0, c2 in 0.0f64..1.0, t in 0.0f64..1.0) {
            let psi = singlet_vector();
            let f = |cw: f64| fidelity_pure(&apply_werner(&rho, cw).unwrap(), &psi);
            let mid = t * c1 + (1.0 - t) * c2;
            prop_assert!((f(mid) - (t * f(c1) + (1.0 - t) * f(c2))).abs() < 1e-12);
        }

        #[test]
        fn metrics_stay_in_range(rho in state_strategy()) {
            let cval = concurrence(&rho).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&cval));
            prop_assert!(correlation_matrix(&rho).iter().all(|x| x.abs() <= 1.0 + 1e-12));
            let p = purity(&rho);
            prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p));
        }

        #[test]
        fn general_fidelity_is_symmetric(r1 in state_strategy(), r2 in state_strategy()) {
            prop_assert!((fidelity_general(&r1, &r2) - fidelity_general(&r2, &r1)).abs() < 1e-8);
        }

        #[test]
        fn trace_distance_bounds(r1 in state_strategy(), r2 in state_strategy()) {
            let d = trace_distance(&r1, &r2);
            let f = fidelity_general(&r1, &r2);
            // Fuchs-van de Graaf.
            prop_assert!(1.0 - f <= d + 1e-8);
            prop_assert!(d <= (1.0 - f * f).max(0.0).sqrt() + 1e-8);
        }
    }

    #[test]
    fn psd_violation_is_rejected() {
        let mut m = TwoQubitState::singlet().into_matrix();
        m[(0, 0)] += c(-1e-6, 0.);
        m[(3, 3)] += c(1e-6, 0.);
        assert!(TwoQubitState::new(m).is_err());
    }
}
