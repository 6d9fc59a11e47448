use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::noise::NoiseProcess;
use super::spectrum::{estimate_spectrum, MIN_SPECTRUM_PATHS};
use super::trajectories::{perturbative_amplitudes, AmplitudeAverages, EnsembleConfig, EnsembleMeans};
use crate::bloch_redfield::{
    assemble_r, validity_check, BathSpec, Beta, CouplingOperator, SpectralDensity, ValidityReport,
};
use crate::error::{Error, Result};
use crate::liouville::{BasisLabel, OperatorMatrix, Superoperator};
use crate::radical_pair::linear_fit;

pub const MIN_BOOTSTRAP: usize = 200;
pub const DEFAULT_BOOTSTRAP: usize = 400;
/// Minimum number of recorded times inside the fit window.
pub const MIN_WINDOW_POINTS: usize = 3;
/// The fit window ends at `min(T, WINDOW_REACH/ŵ₁₁)`.
pub const WINDOW_REACH: f64 = 0.2;
/// Relative agreement required between assembled and sampled `w₁₁`.
pub const CLOSED_LOOP_TOL: f64 = 0.1;

/// Slopes from the ensemble averages with bootstrap standard errors.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RateEstimate {
    /// Slope of `⟨|a₂|²⟩`, s⁻¹.
    pub w11: f64,
    pub w11_err: f64,
    /// Slope of `2Re⟨Δa⟩`, s⁻¹.
    pub w11_perturbative: f64,
    pub w11_perturbative_err: f64,
    /// Slope of `−ln|⟨a₀*a₁⟩|`, s⁻¹.
    pub w01: f64,
    pub w01_err: f64,
    pub ratio: f64,
    pub ratio_err: f64,
    /// 2.5% and 97.5% bootstrap percentiles of the ratio.
    pub ratio_ci: [f64; 2],
    /// Slope of `arg⟨a₀*a₁⟩`, rad/s.
    pub phase_rate: f64,
    pub window: [f64; 2],
    pub n_traj: usize,
    pub n_boot: usize,
}

struct Slopes {
    w11: f64,
    w11_pert: f64,
    w01: f64,
    phase: f64,
}

fn unwrap_phase(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (k, c) in z.iter().enumerate() {
        let a = c.arg();
        if k > 0 {
            let d = a - prev;
            if d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
            } else if d < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
            }
        }
        prev = a;
        out.push(a + offset);
    }
    out
}

fn slopes(m: &EnsembleMeans, window: [f64; 2]) -> Slopes {
    let idx: Vec<usize> = (0..m.times.len()).filter(|&k| m.times[k] >= window[0] && m.times[k] <= window[1]).collect();
    let t: Vec<f64> = idx.iter().map(|&k| m.times[k]).collect();
    let pick = |v: Vec<f64>| -> f64 { linear_fit(&t, &idx.iter().map(|&k| v[k]).collect::<Vec<_>>()).0 };
    let phase = unwrap_phase(&m.coherence);
    Slopes {
        w11: pick(m.pop_two.clone()),
        w11_pert: pick(m.delta_a.iter().map(|z| 2.0 * z.re).collect()),
        w01: pick(m.coherence.iter().map(|z| -z.norm().ln()).collect()),
        phase: pick(phase),
    }
}

fn points_in(times: &[f64], window: [f64; 2]) -> usize {
    times.iter().filter(|&&t| t >= window[0] && t <= window[1]).count()
}

fn select_window(m: &EnsembleMeans, tau_c: f64, t_total: f64) -> Result<[f64; 2]> {
    let mut window = [2.0 * tau_c, t_total];
    for _ in 0..20 {
        if points_in(&m.times, window) < MIN_WINDOW_POINTS {
            return Err(Error::NoLinearWindow { required: MIN_WINDOW_POINTS });
        }
        let w11 = slopes(m, window).w11;
        let hi = if w11 > 0.0 { t_total.min(WINDOW_REACH / w11) } else { t_total };
        if hi == window[1] {
            return Ok(window);
        }
        window[1] = hi;
    }
    if points_in(&m.times, window) < MIN_WINDOW_POINTS {
        return Err(Error::NoLinearWindow { required: MIN_WINDOW_POINTS });
    }
    Ok(window)
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fits the linear growth of the averaged curves over the automatically
/// chosen window `[2τ_c, min(T, 0.2/ŵ₁₁)]` and bootstraps the batches
/// `n_boot` times for error bars.
pub fn extract_rates(avg: &AmplitudeAverages, n_boot: usize, seed: u64) -> Result<RateEstimate> {
    if n_boot < MIN_BOOTSTRAP {
        return Err(Error::InvalidParameter(format!("need at least {MIN_BOOTSTRAP} bootstrap resamples")));
    }
    let nb = avg.batches.len();
    if nb < 2 {
        return Err(Error::InsufficientEnsemble { found: nb, required: 2 });
    }
    let means = avg.means();
    let window = select_window(&means, avg.tau_c, avg.t_total)?;
    let central = slopes(&means, window);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut w11s = Vec::with_capacity(n_boot);
    let mut perts = Vec::with_capacity(n_boot);
    let mut w01s = Vec::with_capacity(n_boot);
    let mut ratios = Vec::with_capacity(n_boot);
    let mut picks = vec![0usize; nb];
    for _ in 0..n_boot {
        for p in picks.iter_mut() {
            *p = rng.gen_range(0..nb);
        }
        let s = slopes(&avg.means_over(&picks), window);
        w11s.push(s.w11);
        perts.push(s.w11_pert);
        w01s.push(s.w01);
        ratios.push(s.w01 / s.w11);
    }
    let ratio_err = std_dev(&ratios);
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(RateEstimate {
        w11: central.w11,
        w11_err: std_dev(&w11s),
        w11_perturbative: central.w11_pert,
        w11_perturbative_err: std_dev(&perts),
        w01: central.w01,
        w01_err: std_dev(&w01s),
        ratio: central.w01 / central.w11,
        ratio_err,
        ratio_ci: [percentile(&ratios, 0.025), percentile(&ratios, 0.975)],
        phase_rate: central.phase,
        window,
        n_traj: means.n_traj,
        n_boot,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ClosedLoopReport {
    pub omega_s: f64,
    /// Sampled spectrum at `ωₛ`, rad²/s.
    pub spectrum_at_omega_s: f64,
    /// `w₁₁` from the relaxation matrix assembled with the sampled spectrum.
    pub w11_assembled: f64,
    pub w11_sampled: f64,
    pub w11_sampled_err: f64,
    pub relative_gap: f64,
    pub agree: bool,
    pub validity: ValidityReport,
    pub rates: RateEstimate,
}

/// Relaxation matrix of the three-state system driven through
/// `|1⟩⟨2| + |2⟩⟨1|` by classical noise (β = 0) with spectrum `j`.
pub fn oracle_relaxation(j: &SpectralDensity, omega0: f64, omega_s: f64) -> Result<Superoperator> {
    let b = BasisLabel::numbered(3)?;
    let h = OperatorMatrix::from_real_diagonal(&b, &[omega0, 0.5 * omega_s, -0.5 * omega_s])?;
    let mut x = DMatrix::zeros(3, 3);
    x[(1, 2)] = Complex64::new(1.0, 0.0);
    x[(2, 1)] = Complex64::new(1.0, 0.0);
    let coupling = CouplingOperator::new("v", OperatorMatrix::new(b, x)?, j.clone())?;
    assemble_r(&BathSpec::new(vec![coupling], Beta::Finite(0.0))?, &h)
}

/// Feeds the sampled spectrum of `p` into a three-state relaxation matrix
/// (single coupling `|1⟩⟨2| + |2⟩⟨1|`, classical noise so β = 0) and
/// compares its `w₁₁` with the trajectory slope.
pub fn closed_loop_check(
    p: &NoiseProcess,
    omega0: f64,
    omega_s: f64,
    cfg: &EnsembleConfig,
    n_boot: usize,
) -> Result<ClosedLoopReport> {
    let avg = perturbative_amplitudes(p, omega0, omega_s, cfg)?;
    closed_loop_from(p, &avg, n_boot)
}

/// [`closed_loop_check`] on averages already produced from `p`.
pub fn closed_loop_from(p: &NoiseProcess, avg: &AmplitudeAverages, n_boot: usize) -> Result<ClosedLoopReport> {
    let (omega0, omega_s) = (avg.omega0, avg.omega_s);
    let rates = extract_rates(avg, n_boot, p.seed())?;

    let n_spec = avg.n_traj().clamp(MIN_SPECTRUM_PATHS, 4 * MIN_SPECTRUM_PATHS);
    let est = estimate_spectrum(p, avg.t_total, n_spec)?;
    let omega_max = (1.5 * omega_s).max(20.0 / p.tau_c());
    let spectrum = est.tabulate(omega_max, 801)?;

    let r = oracle_relaxation(&spectrum, omega0, omega_s)?;
    let w11_assembled = -r.element((1, 1), (1, 1)).re;
    let relative_gap = (w11_assembled - rates.w11).abs() / rates.w11.abs();
    Ok(ClosedLoopReport {
        omega_s,
        spectrum_at_omega_s: spectrum.value(omega_s)?,
        w11_assembled,
        w11_sampled: rates.w11,
        w11_sampled_err: rates.w11_err,
        relative_gap,
        agree: relative_gap <= CLOSED_LOOP_TOL,
        validity: validity_check(&r, p.tau_c())?,
        rates,
    })
}
