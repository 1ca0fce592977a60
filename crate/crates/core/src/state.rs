//! Two-qubit polarization states and the small dense linear algebra shared by
//! the model, the metrics and the tomography code.
//!
//! Basis order is `|HH>, |HV>, |VH>, |VV>`, first factor on path A. `H` is the
//! +1 eigenvector of sigma_z.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;
pub type CVec4 = Vector4<C64>;

/// Tolerance for the Hermitian, trace and PSD invariants of [`TwoQubitState`].
pub const STATE_TOL: f64 = 1e-10;

pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> CMat2 {
    CMat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

pub fn pauli_y() -> CMat2 {
    CMat2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
}

pub fn pauli_z() -> CMat2 {
    CMat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
}

pub fn kron(a: &CMat2, b: &CMat2) -> CMat4 {
    CMat4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Largest absolute entry of `m - m^dagger`.
pub fn hermiticity_defect(m: &CMat4) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_entry(m: &CMat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat4) -> (Vector4<f64>, CMat4) {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = Vector4::from_fn(|i, _| eig.eigenvalues[idx[i]]);
    let vecs = CMat4::from_fn(|r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

/// Rebuild `V diag(f(lambda)) V^dagger` from a Hermitian eigendecomposition.
pub fn hermitian_map(m: &CMat4, f: impl Fn(f64) -> f64) -> CMat4 {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMat4::from_diagonal(&vals.map(|x| c(f(x), 0.0)));
    vecs * d * vecs.adjoint()
}

/// Square root of a PSD matrix; eigenvalues below zero are clamped.
pub fn psd_sqrt(m: &CMat4) -> CMat4 {
    hermitian_map(m, |x| x.max(0.0).sqrt())
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState(CMat4);

impl TwoQubitState {
    /// Validate `m` against the density-matrix invariants at [`STATE_TOL`].
    pub fn new(m: CMat4) -> Result<Self> {
        Self::with_tolerance(m, STATE_TOL)
    }

    pub fn with_tolerance(m: CMat4, tol: f64) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = hermiticity_defect(&m);
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let (vals, _) = hermitian_eigen(&m);
        if vals[0] < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                vals[0]
            )));
        }
        Ok(Self(m))
    }

    /// Normalize a nonzero PSD matrix by its trace.
    pub fn from_unnormalized(m: CMat4) -> Result<Self> {
        let tr = m.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(m / c(tr, 0.0))
    }

    pub fn from_pure(psi: &CVec4) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / c(n, 0.0);
        Self::new(v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self(CMat4::identity() * c(0.25, 0.0))
    }

    /// `(|HV> - |VH>)/sqrt(2)`.
    pub fn singlet() -> Self {
        Self::from_pure(&singlet_vector()).expect("singlet is a valid state")
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.0
    }

    pub fn into_matrix(self) -> CMat4 {
        self.0
    }

    pub fn eigenvalues(&self) -> Vector4<f64> {
        hermitian_eigen(&self.0).0
    }

    pub fn to_json(&self) -> StateJson {
        StateJson::from_matrix(&self.0)
    }
}

pub fn singlet_vector() -> CVec4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec4::new(c(0., 0.), c(s, 0.), c(-s, 0.), c(0., 0.))
}

/// Wire format for 4x4 matrices: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub basis: Vec<String>,
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl StateJson {
    pub fn from_matrix(m: &CMat4) -> Self {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        Self {
            basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            re,
            im,
        }
    }

    pub fn to_matrix(&self) -> Result<CMat4> {
        if self.basis != BASIS_LABELS {
            return Err(Error::Parse(format!(
                "unexpected basis {:?}, expected {:?}",
                self.basis, BASIS_LABELS
            )));
        }
        Ok(CMat4::from_fn(|i, j| c(self.re[i][j], self.im[i][j])))
    }

    pub fn to_state(&self) -> Result<TwoQubitState> {
        TwoQubitState::new(self.to_matrix()?)
    }
}
