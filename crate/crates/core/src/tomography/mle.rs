//! Linear inversion and maximum-likelihood reconstruction.
//!
//! The estimate is `rho = T^dagger T / Tr[T^dagger T]` with `T` lower
//! triangular, so every iterate is a density matrix. The parameter vector holds
//! the four real diagonal entries of `T`, then `(re, im)` of the strictly lower
//! entries in row-major order.

use nalgebra::SVector;
use serde::Serialize;

use super::dataset::TomographyDataset;
use super::setting::{outcome_probabilities, TomographySetting};
use crate::error::{Error, Result};
use crate::state::{c, hermitian_map, kron, pauli_x, pauli_y, pauli_z, CMat2, CMat4, CVec4, TwoQubitState};

pub type CholeskyParams = SVector<f64, 16>;

const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// Weight of `I/4` mixed into the warm start so that it has full rank.
pub const START_MIX: f64 = 1e-3;

/// Per-setting outcome weights. Integer counts from a dataset, or exact
/// probabilities scaled by a nominal shot number.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub weights: [[f64; 4]; 9],
}

impl CountTable {
    pub fn from_dataset(ds: &TomographyDataset) -> Self {
        Self { weights: ds.counts.map(|row| row.map(|n| n as f64)) }
    }

    /// Infinite-statistics table: `shots * p_k` for every setting.
    pub fn exact(rho: &TwoQubitState, shots: f64) -> Self {
        Self { weights: TomographySetting::all().map(|s| outcome_probabilities(rho, s).map(|p| p * shots)) }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }
}

fn identity2() -> CMat2 {
    CMat2::identity()
}

fn pauli(i: usize) -> CMat2 {
    match i {
        0 => identity2(),
        1 => pauli_x(),
        2 => pauli_y(),
        _ => pauli_z(),
    }
}

/// Pauli-expansion estimate `1/4 sum_ij <s_i s_j> s_i x s_j`. Single-qubit
/// expectations are averaged over the three settings that contain them.
pub fn linear_inversion_table(t: &CountTable) -> Result<CMat4> {
    let mut corr = [[0.0f64; 4]; 4];
    corr[0][0] = 1.0;
    for s in TomographySetting::all() {
        let w = t.weights[s.index()];
        let n: f64 = w.iter().sum();
        if n.is_nan() || n <= 0.0 {
            return Err(Error::InvalidParams(format!("setting {s} has no counts")));
        }
        let f = w.map(|x| x / n);
        let (a, b) = (s.pauli_a as usize + 1, s.pauli_b as usize + 1);
        corr[a][b] = f[0] - f[1] - f[2] + f[3];
        corr[a][0] += (f[0] + f[1] - f[2] - f[3]) / 3.0;
        corr[0][b] += (f[0] - f[1] + f[2] - f[3]) / 3.0;
    }
    let mut m = CMat4::zeros();
    for (i, row) in corr.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m += kron(&pauli(i), &pauli(j)) * c(e / 4.0, 0.0);
        }
    }
    Ok(m)
}

pub fn linear_inversion(ds: &TomographyDataset) -> Result<CMat4> {
    linear_inversion_table(&CountTable::from_dataset(ds))
}

/// Clamp negative eigenvalues to zero and renormalize.
pub fn psd_projection(m: &CMat4) -> Result<TwoQubitState> {
    TwoQubitState::from_unnormalized(hermitian_map(m, |x| x.max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    /// Fixed shots per setting.
    #[default]
    Multinomial,
    /// Free intensity, Poisson counts.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub likelihood: Likelihood,
    pub method: Method,
    pub max_iterations: usize,
    /// Stop once an accepted step changes the log-likelihood by less than this.
    pub tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { likelihood: Likelihood::Multinomial, method: Method::Lbfgs, max_iterations: 100_000, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleDiagnostics {
    /// Multinomial log-likelihood `sum n_k log p_k` of the estimate.
    pub loglik: f64,
    /// Same quantity at the PSD-projected linear inversion.
    pub start_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The projected start beat the final iterate and was returned instead.
    pub kept_start: bool,
    /// Objective after each accepted step, starting value first.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Vector form of a lower-triangular `T`.
pub fn params_from_t(t: &CMat4) -> CholeskyParams {
    let mut x = CholeskyParams::zeros();
    for i in 0..4 {
        x[i] = t[(i, i)].re;
    }
    for (k, &(i, j)) in LOWER.iter().enumerate() {
        x[4 + 2 * k] = t[(i, j)].re;
        x[5 + 2 * k] = t[(i, j)].im;
    }
    x
}

pub fn t_from_params(x: &CholeskyParams) -> CMat4 {
    let mut t = CMat4::zeros();
    for i in 0..4 {
        t[(i, i)] = c(x[i], 0.0);
    }
    for (k, &(i, j)) in LOWER.iter().enumerate() {
        t[(i, j)] = c(x[4 + 2 * k], x[5 + 2 * k]);
    }
    t
}

pub fn rho_from_params(x: &CholeskyParams) -> CMat4 {
    let t = t_from_params(x);
    let m = t.adjoint() * t;
    m / m.trace()
}

/// Lower-triangular `T` with `T^dagger T = rho`; `rho` must be positive definite.
pub fn params_from_rho(rho: &CMat4) -> Result<CholeskyParams> {
    // With P the exchange matrix, P rho P = L L^dagger gives T = P L^dagger P.
    let rev = |m: &CMat4| CMat4::from_fn(|i, j| m[(3 - i, 3 - j)]);
    let l = nalgebra::Cholesky::new(rev(rho))
        .ok_or_else(|| Error::Numerical("warm start is not positive definite".into()))?
        .unpack();
    Ok(params_from_t(&rev(&l.adjoint())))
}

/// Log-likelihood objective and its gradient over [`CholeskyParams`].
pub struct Objective {
    vectors: Vec<(CVec4, f64)>,
    total: f64,
    likelihood: Likelihood,
}

impl Objective {
    pub fn new(table: &CountTable, likelihood: Likelihood) -> Self {
        let vectors = TomographySetting::all()
            .iter()
            .flat_map(|s| s.vectors().into_iter().zip(table.weights[s.index()]))
            .collect();
        Self { vectors, total: table.total(), likelihood }
    }

    fn norm_term(&self, tr: f64) -> f64 {
        match self.likelihood {
            Likelihood::Multinomial => self.total * tr.ln(),
            Likelihood::Poisson => 9.0 * tr,
        }
    }

    pub fn value(&self, x: &CholeskyParams) -> f64 {
        let t = t_from_params(x);
        let tr = t.norm_squared();
        let mut l = 0.0;
        for (v, n) in &self.vectors {
            if *n > 0.0 {
                l += n * (t * v).norm_squared().ln();
            }
        }
        l - self.norm_term(tr)
    }

    pub fn gradient(&self, x: &CholeskyParams) -> CholeskyParams {
        let t = t_from_params(x);
        let tr = t.norm_squared();
        let mut m = CMat4::zeros();
        for (v, n) in &self.vectors {
            if *n > 0.0 {
                m += v * v.adjoint() * c(n / (t * v).norm_squared(), 0.0);
            }
        }
        let diag = match self.likelihood {
            Likelihood::Multinomial => self.total / tr,
            Likelihood::Poisson => 9.0,
        };
        m -= CMat4::identity() * c(diag, 0.0);
        // d/dT* of the objective; real parameters pick up 2 Re / 2 Im.
        params_from_t(&(t * m)) * 2.0
    }
}

/// Multinomial log-likelihood `sum n_k log Tr[rho Pi_k]` of a normalized state.
pub fn multinomial_loglik(table: &CountTable, rho: &TwoQubitState) -> f64 {
    let mut l = 0.0;
    for s in TomographySetting::all() {
        let p = outcome_probabilities(rho, s);
        for (k, n) in table.weights[s.index()].iter().enumerate() {
            if *n > 0.0 {
                l += n * p[k].ln();
            }
        }
    }
    l
}

pub fn mle_reconstruct(ds: &TomographyDataset, opts: &MleOptions) -> Result<(TwoQubitState, MleDiagnostics)> {
    mle_reconstruct_table(&CountTable::from_dataset(ds), opts)
}

/// Search direction for the line-search ascent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Limited-memory BFGS direction, falling back to the gradient whenever
    /// it is not an ascent direction.
    #[default]
    Lbfgs,
    /// Plain gradient; step length carried over and doubled after each accept.
    Gradient,
}

const LBFGS_MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;

/// Two-loop recursion: approximate inverse negative Hessian applied to `g`.
fn lbfgs_direction(g: &CholeskyParams, hist: &[(CholeskyParams, CholeskyParams)]) -> CholeskyParams {
    let Some((s_last, y_last)) = hist.last() else { return *g };
    let mut q = *g;
    let mut alpha = Vec::with_capacity(hist.len());
    for (s, y) in hist.iter().rev() {
        let a = s.dot(&q) / y.dot(s);
        q -= y * a;
        alpha.push(a);
    }
    q *= s_last.dot(y_last) / y_last.norm_squared();
    for ((s, y), a) in hist.iter().zip(alpha.into_iter().rev()) {
        let b = y.dot(&q) / y.dot(s);
        q += s * (a - b);
    }
    q
}

/// Backtracking along `d` from `x`; `None` once the step underflows.
fn backtrack(obj: &Objective, x: &CholeskyParams, f: f64, d: &CholeskyParams, slope: f64, step: &mut f64) -> Option<(CholeskyParams, f64)> {
    while *step * slope > 0.0 {
        let trial = x + d * *step;
        let ft = obj.value(&trial);
        if ft.is_finite() && ft >= f + ARMIJO * *step * slope {
            return Some((trial, ft));
        }
        *step *= 0.5;
    }
    None
}

/// Line-search ascent from the PSD-projected linear inversion, mixed with
/// [`START_MIX`] of `I/4`. Returns the better of the final iterate and the
/// projected start; `converged` is false if the iteration cap hit.
pub fn mle_reconstruct_table(table: &CountTable, opts: &MleOptions) -> Result<(TwoQubitState, MleDiagnostics)> {
    if table.total().is_nan() || table.total() <= 0.0 {
        return Err(Error::InvalidParams("dataset has no counts".into()));
    }
    let projected = psd_projection(&linear_inversion_table(table)?)?;
    let start_loglik = multinomial_loglik(table, &projected);
    let start = projected.matrix() * c(1.0 - START_MIX, 0.0) + CMat4::identity() * c(START_MIX / 4.0, 0.0);

    let obj = Objective::new(table, opts.likelihood);
    let mut x = params_from_rho(&start)?;
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut trace = vec![f];
    let mut hist: Vec<(CholeskyParams, CholeskyParams)> = Vec::new();
    let mut gradient_step = 1.0 / table.total();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        if g.norm_squared() == 0.0 {
            converged = true;
            break;
        }
        let accepted = match opts.method {
            Method::Gradient => backtrack(&obj, &x, f, &g, g.norm_squared(), &mut gradient_step),
            Method::Lbfgs => {
                let d = lbfgs_direction(&g, &hist);
                let slope = d.dot(&g);
                let mut step = if hist.is_empty() { 0.1 / g.norm() } else { 1.0 };
                let found = if slope > 0.0 { backtrack(&obj, &x, f, &d, slope, &mut step) } else { None };
                found.or_else(|| {
                    hist.clear();
                    let mut step = 0.1 / g.norm();
                    backtrack(&obj, &x, f, &g, g.norm_squared(), &mut step)
                })
            }
        };
        let Some((mut xn, fnew)) = accepted else {
            // No ascent left at working precision.
            converged = true;
            break;
        };
        if opts.likelihood == Likelihood::Multinomial {
            // Scale invariance: keep Tr[T^dagger T] = 1.
            xn /= t_from_params(&xn).norm();
        }
        let gn = obj.gradient(&xn);
        let (s, y) = (xn - x, g - gn);
        if s.dot(&y) > 1e-300 {
            if hist.len() == LBFGS_MEMORY {
                hist.remove(0);
            }
            hist.push((s, y));
        }
        let delta = fnew - f;
        x = xn;
        f = fnew;
        g = gn;
        trace.push(f);
        gradient_step *= 2.0;
        if delta.abs() < opts.tolerance {
            converged = true;
            break;
        }
    }

    let mut rho = TwoQubitState::new(rho_from_params(&x))?;
    let mut loglik = multinomial_loglik(table, &rho);
    // The rank-deficient start can sit on the boundary optimum itself.
    let kept_start = start_loglik > loglik;
    if kept_start {
        rho = projected;
        loglik = start_loglik;
    }
    Ok((rho, MleDiagnostics { loglik, start_loglik, iterations, converged, kept_start, trace }))
}
