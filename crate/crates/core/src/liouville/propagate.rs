use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::expm::expm;
use super::operator::{DensityMatrix, OperatorMatrix};
use super::rk::{self, RkOptions};
use super::superop::{unvectorize, vectorize, Superoperator};
use crate::error::{Error, Result};

/// Largest basis dimension for which `Auto` picks the dense exponential.
pub const AUTO_EXPM_MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PropagationMethod {
    /// Dense exponential for N ≤ 8, Runge-Kutta otherwise.
    Auto,
    MatrixExponential,
    RungeKutta(RkOptions),
}

/// A density-matrix trajectory sampled at increasing times.
#[derive(Clone, Debug)]
pub struct Propagation {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Propagation {
    pub(crate) fn new(times: Vec<f64>, states: Vec<DensityMatrix>) -> Self {
        debug_assert_eq!(times.len(), states.len());
        Self { times, states }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn traces(&self) -> Vec<f64> {
        self.states.iter().map(DensityMatrix::trace).collect()
    }

    /// Time series of one matrix element.
    pub fn element(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s.get(i, j)).collect()
    }
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("start time {t0} must be >= 0")));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time grid"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    Ok(())
}

/// `ρ(t) = exp(𝓛t)ρ₀` with the default method.
pub fn propagate(gen: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Propagation> {
    propagate_with(gen, rho0, times, PropagationMethod::Auto)
}

pub fn propagate_with(
    gen: &Superoperator,
    rho0: &DensityMatrix,
    times: &[f64],
    method: PropagationMethod,
) -> Result<Propagation> {
    let raw = evolve_operator(gen, rho0.as_operator(), times, method)?;
    let states = raw.into_iter().map(DensityMatrix::from_evolved).collect();
    Ok(Propagation::new(times.to_vec(), states))
}

/// Propagates an arbitrary operator (no density-matrix constraints).
pub fn evolve_operator(
    gen: &Superoperator,
    x0: &OperatorMatrix,
    times: &[f64],
    method: PropagationMethod,
) -> Result<Vec<OperatorMatrix>> {
    if x0.basis() != gen.basis() {
        return Err(Error::BasisMismatch);
    }
    if !gen.is_finite() {
        return Err(Error::NonFinite("generator"));
    }
    if !x0.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    validate_times(times)?;
    let v0 = vectorize(x0.entries());
    let method = match method {
        PropagationMethod::Auto if gen.dim() <= AUTO_EXPM_MAX_DIM => PropagationMethod::MatrixExponential,
        PropagationMethod::Auto => PropagationMethod::RungeKutta(RkOptions::default()),
        m => m,
    };
    let vecs = match method {
        PropagationMethod::RungeKutta(opts) => rk::integrate(gen.matrix(), &v0, times, &opts)?,
        _ => expm_series(gen.matrix(), &v0, times)?,
    };
    let n = gen.dim();
    Ok(vecs
        .iter()
        .map(|v| OperatorMatrix::from_parts_unchecked(gen.basis().clone(), unvectorize(v, n)))
        .collect())
}

/// Steps between output times with `exp(𝓛Δt)`, reusing the propagator while
/// the spacing stays uniform.
fn expm_series(
    gen: &DMatrix<Complex64>,
    v0: &DVector<Complex64>,
    times: &[f64],
) -> Result<Vec<DVector<Complex64>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut cached: Option<(f64, DMatrix<Complex64>)> = None;
    let mut t_prev = 0.0;
    let mut v = v0.clone();
    for &t in times {
        let dt = t - t_prev;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
            if !reuse {
                cached = Some((dt, expm(&(gen * Complex64::new(dt, 0.0)))?));
            }
            v = &cached.as_ref().unwrap().1 * &v;
        }
        if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("propagated state"));
        }
        out.push(v.clone());
        t_prev = t;
    }
    Ok(out)
}

/// `X = ∫₀^∞ exp(𝓛t)ρ₀ dt`, obtained from `(−𝓛)X = ρ₀`.
///
/// Every eigenvalue of 𝓛 must satisfy `Re λ < −1e-12·‖𝓛‖`; otherwise the
/// integral diverges and `NonDecaying` is returned.
pub fn infinite_time_integral(gen: &Superoperator, rho0: &DensityMatrix) -> Result<OperatorMatrix> {
    if rho0.basis() != gen.basis() {
        return Err(Error::BasisMismatch);
    }
    if !gen.is_finite() {
        return Err(Error::NonFinite("generator"));
    }
    let norm = gen.spectral_norm();
    let max_real = gen.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_real < -1e-12 * norm) {
        return Err(Error::NonDecaying { max_real });
    }
    let neg = -gen.matrix();
    let x = neg
        .lu()
        .solve(&vectorize(rho0.as_operator().entries()))
        .ok_or(Error::Singular("generator"))?;
    Ok(OperatorMatrix::from_parts_unchecked(gen.basis().clone(), unvectorize(&x, gen.dim())))
}
