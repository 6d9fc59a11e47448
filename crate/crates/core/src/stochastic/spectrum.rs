use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::noise::{check_duration, NoiseProcess};
use crate::bloch_redfield::SpectralDensity;
use crate::error::{Error, Result};

pub const MIN_SPECTRUM_PATHS: usize = 1000;
/// Lag cutoff of [`estimate_spectrum`] in units of `τ_c`. The dropped tail
/// weighs `e^{-10}` of the correlation.
pub const LAG_CUTOFF_TAU: f64 = 10.0;
const CHUNK: usize = 64;

/// Truncation applied to the correlation function before the cosine
/// transform.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Window {
    /// Always `"rectangular"`: lags beyond `t_max` are dropped, nothing is
    /// tapered.
    pub kind: &'static str,
    pub t_max: f64,
}

/// Ensemble- and time-averaged `K(t) = ⟨v(t)v(0)⟩` at lags `k·dt`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CorrelationEstimate {
    pub dt: f64,
    pub n_paths: usize,
    pub correlation: Vec<f64>,
    pub window: Window,
}

impl CorrelationEstimate {
    pub fn lag_times(&self) -> Vec<f64> {
        (0..self.correlation.len()).map(|k| k as f64 * self.dt).collect()
    }

    /// `J(ω) = 2∫₀^{t_max} K(t)cos(ωt) dt` (trapezoid rule).
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let n = self.correlation.len();
        let mut acc = 0.0;
        for (k, c) in self.correlation.iter().enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * c * (omega * k as f64 * self.dt).cos();
        }
        2.0 * acc * self.dt
    }

    /// Samples `J` on `n_points` equally spaced frequencies in
    /// `[0, omega_max]`. Negative estimates (pure noise in the far tail)
    /// are clipped to zero.
    pub fn tabulate(&self, omega_max: f64, n_points: usize) -> Result<SpectralDensity> {
        if !(omega_max > 0.0) || n_points < 2 {
            return Err(Error::InvalidParameter("spectrum grid needs omega_max > 0 and >= 2 points".into()));
        }
        let omega: Vec<f64> = (0..n_points).map(|i| omega_max * i as f64 / (n_points - 1) as f64).collect();
        let values = omega.iter().map(|&w| self.spectral_density(w).max(0.0)).collect();
        SpectralDensity::tabulated(omega, values)
    }
}

struct Autocorrelator {
    len: usize,
    max_lag: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Autocorrelator {
    fn new(len: usize, max_lag: usize) -> Self {
        let size = (2 * len).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            len,
            max_lag: max_lag.min(len / 2),
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    /// Adds `Σ_k v_k v_{k+lag}` for lags `0..=max_lag` into `acc`.
    fn accumulate(&self, path: &[f64], acc: &mut [f64]) {
        let size = self.forward.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (b, v) in buf.iter_mut().zip(path) {
            b.re = *v;
        }
        self.forward.process(&mut buf);
        for b in buf.iter_mut() {
            *b = Complex64::new(b.norm_sqr(), 0.0);
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / size as f64;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.re * scale;
        }
    }

    fn finish(&self, sums: Vec<f64>, n_paths: usize, dt: f64) -> CorrelationEstimate {
        let correlation = sums
            .iter()
            .enumerate()
            .map(|(lag, s)| s / (n_paths as f64 * (self.len - lag) as f64))
            .collect();
        CorrelationEstimate {
            dt,
            n_paths,
            correlation,
            window: Window { kind: "rectangular", t_max: self.max_lag as f64 * dt },
        }
    }
}

fn reduce_chunks(chunks: Vec<Vec<f64>>, width: usize) -> Vec<f64> {
    let mut total = vec![0.0; width];
    for c in chunks {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    total
}

/// Estimates `K(t)` from equally sampled paths (unbiased lag normalization)
/// and exposes its cosine transform. Lags stop at `t_max` or half the path
/// length, whichever is shorter; `None` keeps the half length.
pub fn correlation_and_spectrum(paths: &[Vec<f64>], dt: f64, t_max: Option<f64>) -> Result<CorrelationEstimate> {
    if paths.len() < MIN_SPECTRUM_PATHS {
        return Err(Error::InsufficientEnsemble { found: paths.len(), required: MIN_SPECTRUM_PATHS });
    }
    let len = paths[0].len();
    if len < 4 || paths.iter().any(|p| p.len() != len) {
        return Err(Error::InvalidParameter("paths must share a length of at least 4 samples".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt {dt} must be > 0")));
    }
    if t_max.is_some_and(|t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("lag cutoff must be > 0".into()));
    }
    let ac = Autocorrelator::new(len, t_max.map_or(len, |t| (t / dt).round() as usize));
    let width = ac.max_lag + 1;
    let chunks: Vec<Vec<f64>> = paths
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; width];
            for p in chunk {
                ac.accumulate(p, &mut acc);
            }
            acc
        })
        .collect();
    Ok(ac.finish(reduce_chunks(chunks, width), paths.len(), dt))
}

/// Same estimate as [`correlation_and_spectrum`] on paths `0..n_paths`,
/// generated on the fly without storing them, with lags cut at
/// `LAG_CUTOFF_TAU·τ_c`.
pub fn estimate_spectrum(p: &NoiseProcess, t_total: f64, n_paths: usize) -> Result<CorrelationEstimate> {
    if n_paths < MIN_SPECTRUM_PATHS {
        return Err(Error::InsufficientEnsemble { found: n_paths, required: MIN_SPECTRUM_PATHS });
    }
    check_duration(p, t_total)?;
    let len = p.steps_for(t_total) + 1;
    let ac = Autocorrelator::new(len, (LAG_CUTOFF_TAU * p.tau_c() / p.dt()).round() as usize);
    let width = ac.max_lag + 1;
    let starts: Vec<usize> = (0..n_paths).step_by(CHUNK).collect();
    let chunks: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut acc = vec![0.0; width];
            let mut path = Vec::with_capacity(len);
            for i in start..(start + CHUNK).min(n_paths) {
                path.clear();
                path.extend(p.stream(i as u64).take(len));
                ac.accumulate(&path, &mut acc);
            }
            acc
        })
        .collect();
    Ok(ac.finish(reduce_chunks(chunks, width), n_paths, p.dt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::noise::{simulate_paths, NoiseKind};

    #[test]
    fn direct_lag_sums_match_fft() {
        let path: Vec<f64> = (0..37).map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.3).collect();
        let ac = Autocorrelator::new(path.len(), path.len());
        let mut acc = vec![0.0; ac.max_lag + 1];
        ac.accumulate(&path, &mut acc);
        for (lag, got) in acc.iter().enumerate() {
            let want: f64 = (0..path.len() - lag).map(|k| path[k] * path[k + lag]).sum();
            assert!((got - want).abs() < 1e-12, "lag {lag}");
        }
    }

    #[test]
    fn rejects_small_ensembles() {
        let paths = vec![vec![0.0; 16]; 10];
        assert!(matches!(
            correlation_and_spectrum(&paths, 0.1, None),
            Err(Error::InsufficientEnsemble { found: 10, required: 1000 })
        ));
    }

    #[test]
    fn lorentzian_spectrum_recovered() {
        let tau = 1e-13;
        let var = 1e18;
        for kind in [NoiseKind::OrnsteinUhlenbeck, NoiseKind::Dichotomous] {
            let p = NoiseProcess::with_default_step(kind, var, tau, 21).unwrap();
            let est = estimate_spectrum(&p, 100.0 * tau, 2000).unwrap();
            assert_eq!(est.window.kind, "rectangular");
            assert!((est.window.t_max - 10.0 * tau).abs() < 1e-3 * tau);
            for w in [0.0, 1.0 / tau, 5.0 / tau] {
                let got = est.spectral_density(w);
                let want = p.analytic_spectrum(w);
                assert!((got / want - 1.0).abs() < 0.05, "{kind:?} omega={w}: {got} vs {want}");
                assert_eq!(got, est.spectral_density(-w));
            }
        }
    }

    #[test]
    fn stored_and_streamed_estimates_agree() {
        let p = NoiseProcess::with_default_step(NoiseKind::OrnsteinUhlenbeck, 1.0, 1.0, 4).unwrap();
        let paths = simulate_paths(&p, 12.0, 1000).unwrap();
        let a = correlation_and_spectrum(&paths, p.dt(), Some(10.0)).unwrap();
        let b = estimate_spectrum(&p, 12.0, 1000).unwrap();
        assert_eq!(a, b);
    }
}
