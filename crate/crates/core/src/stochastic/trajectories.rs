//! Schrödinger trajectories of the three-state model driven by the
//! transverse noise `v(t)(|1⟩⟨2| + |2⟩⟨1|)`, started in `(|0⟩ + |1⟩)/√2`.
//!
//! For each path two things are accumulated: the exact amplitudes
//! `a_j(t)` for piecewise-constant `v`, and the second-order integral
//!
//! ```text
//! Δa(t) = ∫₀ᵗdt₁ ∫₀^{t₁}dt₂ v(t₁)v(t₂) e^{iωₛ(t₁−t₂)}
//! ```
//!
//! in terms of which, relative to their initial values, `|a₁|² ≈ 1 − 2Re Δa`
//! and `a₀*a₁ ≈ (1 − Δa)e^{i(ω₀−ωₛ/2)t}`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::noise::{check_duration, NoiseProcess};
use crate::error::{Error, Result};

/// Largest `T·√variance` accepted as perturbative.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    /// Total duration, s.
    pub t_total: f64,
    /// Number of recorded times, spread evenly over `(0, T]`.
    pub n_samples: usize,
    /// Paths are summed in this many contiguous batches, the units of the
    /// bootstrap.
    pub n_batches: usize,
}

impl EnsembleConfig {
    /// `10⁴` paths over `100τ_c`, 64 samples, 100 batches.
    pub fn for_process(p: &NoiseProcess) -> Self {
        Self { n_traj: 10_000, t_total: 100.0 * p.tau_c(), n_samples: 64, n_batches: 100 }
    }
}

/// One path's amplitudes at the recorded times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(a₀, a₁, a₂)`.
    pub amplitudes: Vec<[Complex64; 3]>,
    pub delta_a: Vec<Complex64>,
}

/// Per-batch sums over paths at each recorded time. Populations and the
/// coherence are relative to their initial values `|a₁(0)|²` and
/// `a₀*(0)a₁(0)`, both ½.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchSums {
    pub count: usize,
    pub delta_a: Vec<Complex64>,
    /// `|a₁|²/|a₁(0)|²`.
    pub pop_one: Vec<f64>,
    /// `|a₂|²/|a₁(0)|²`.
    pub pop_two: Vec<f64>,
    /// `a₀*a₁ / a₀*(0)a₁(0)`.
    pub coherence: Vec<Complex64>,
    /// `Σ|a_j|²`.
    pub norm: Vec<f64>,
}

impl BatchSums {
    fn zeros(n: usize) -> Self {
        let zc = vec![Complex64::new(0.0, 0.0); n];
        Self {
            count: 0,
            delta_a: zc.clone(),
            pop_one: vec![0.0; n],
            pop_two: vec![0.0; n],
            coherence: zc,
            norm: vec![0.0; n],
        }
    }

    fn add(&mut self, t: &Trajectory) {
        self.count += 1;
        for (k, a) in t.amplitudes.iter().enumerate() {
            self.delta_a[k] += t.delta_a[k];
            self.pop_one[k] += 2.0 * a[1].norm_sqr();
            self.pop_two[k] += 2.0 * a[2].norm_sqr();
            self.coherence[k] += 2.0 * a[0].conj() * a[1];
            self.norm[k] += a.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Ensemble means at each recorded time.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleMeans {
    pub times: Vec<f64>,
    pub n_traj: usize,
    pub delta_a: Vec<Complex64>,
    pub pop_one: Vec<f64>,
    pub pop_two: Vec<f64>,
    pub coherence: Vec<Complex64>,
    pub norm: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeAverages {
    pub omega0: f64,
    pub omega_s: f64,
    pub tau_c: f64,
    pub t_total: f64,
    pub times: Vec<f64>,
    pub batches: Vec<BatchSums>,
}

impl AmplitudeAverages {
    pub fn n_traj(&self) -> usize {
        self.batches.iter().map(|b| b.count).sum()
    }

    pub fn means(&self) -> EnsembleMeans {
        self.means_over(&(0..self.batches.len()).collect::<Vec<_>>())
    }

    /// Means over a multiset of batches (repeats allowed), combined in the
    /// order given.
    pub fn means_over(&self, picks: &[usize]) -> EnsembleMeans {
        let n = self.times.len();
        let count: usize = picks.iter().map(|&i| self.batches[i].count).sum();
        let inv = 1.0 / count as f64;
        let real = |get: &dyn Fn(&BatchSums) -> &Vec<f64>| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let mut c = Compensated::default();
                    for &i in picks {
                        c.add(get(&self.batches[i])[k]);
                    }
                    c.value() * inv
                })
                .collect()
        };
        let complex = |get: &dyn Fn(&BatchSums) -> &Vec<Complex64>| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    let (mut re, mut im) = (Compensated::default(), Compensated::default());
                    for &i in picks {
                        let z = get(&self.batches[i])[k];
                        re.add(z.re);
                        im.add(z.im);
                    }
                    Complex64::new(re.value(), im.value()) * inv
                })
                .collect()
        };
        EnsembleMeans {
            times: self.times.clone(),
            n_traj: count,
            delta_a: complex(&|b| &b.delta_a),
            pop_one: real(&|b| &b.pop_one),
            pop_two: real(&|b| &b.pop_two),
            coherence: complex(&|b| &b.coherence),
            norm: real(&|b| &b.norm),
        }
    }
}

/// `(e^z − 1)/z`.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(e^z − 1 − z)/z²`.
fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(0.5, 0.0) + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0))
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

fn sample_steps(n_steps: usize, n_samples: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=n_samples)
        .map(|m| ((m as f64 * n_steps as f64) / n_samples as f64).round() as usize)
        .filter(|&s| s > 0)
        .collect();
    out.dedup();
    out
}

fn validate(p: &NoiseProcess, omega0: f64, omega_s: f64, cfg: &EnsembleConfig) -> Result<()> {
    check_duration(p, cfg.t_total)?;
    if !omega0.is_finite() || !omega_s.is_finite() || omega_s < 0.0 {
        return Err(Error::InvalidParameter("omega0 must be finite and omega_s >= 0".into()));
    }
    let strength = cfg.t_total * p.variance().sqrt();
    if strength > PERTURBATIVE_LIMIT {
        return Err(Error::PerturbativeWindow(format!(
            "T*sqrt(variance) = {strength:.3e} exceeds {PERTURBATIVE_LIMIT}"
        )));
    }
    if cfg.n_traj == 0 || cfg.n_samples < 3 || cfg.n_batches == 0 {
        return Err(Error::InvalidParameter("need n_traj >= 1, n_samples >= 3, n_batches >= 1".into()));
    }
    Ok(())
}

/// Integrates path `index` and records amplitudes and `Δa` at `n_samples`
/// evenly spread times.
pub fn simulate_trajectory(
    p: &NoiseProcess,
    omega0: f64,
    omega_s: f64,
    cfg: &EnsembleConfig,
    index: u64,
) -> Result<Trajectory> {
    validate(p, omega0, omega_s, cfg)?;
    let n_steps = p.steps_for(cfg.t_total);
    Ok(run_path(p, omega0, omega_s, n_steps, &sample_steps(n_steps, cfg.n_samples), index))
}

fn run_path(p: &NoiseProcess, omega0: f64, omega_s: f64, n_steps: usize, samples: &[usize], index: u64) -> Trajectory {
    let h = p.dt();
    let i = Complex64::new(0.0, 1.0);
    let c_plus = h * phi1(i * omega_s * h);
    let c_minus = h * phi1(-i * omega_s * h);
    let c_two = h * h * phi2(i * omega_s * h);
    let half = 0.5 * omega_s;

    let mut f = Complex64::new(0.0, 0.0);
    let mut da = Complex64::new(0.0, 0.0);
    let mut a1 = Complex64::new(1.0, 0.0);
    let mut a2 = Complex64::new(0.0, 0.0);
    let mut out = Trajectory {
        times: Vec::with_capacity(samples.len()),
        amplitudes: Vec::with_capacity(samples.len()),
        delta_a: Vec::with_capacity(samples.len()),
    };
    let mut next = 0;
    let mut noise = p.stream(index);
    for k in 0..n_steps {
        let v = noise.next().expect("endless stream");
        let phase = Complex64::cis(omega_s * k as f64 * h);
        da += v * phase * f * c_plus + v * v * c_two;
        f += v * phase.conj() * c_minus;

        // exp(−ih[[ωₛ/2, v], [v, −ωₛ/2]]) = cos(Ωh) − i·sin(Ωh)/Ω·H
        let big = (half * half + v * v).sqrt();
        let cos = (big * h).cos();
        let sinc = if big * h < 1e-8 { h } else { (big * h).sin() / big };
        let n1 = cos * a1 - i * sinc * (half * a1 + v * a2);
        let n2 = cos * a2 - i * sinc * (v * a1 - half * a2);
        a1 = n1;
        a2 = n2;

        if next < samples.len() && samples[next] == k + 1 {
            let t = (k + 1) as f64 * h;
            let a0 = Complex64::cis(-omega0 * t);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            out.times.push(t);
            out.amplitudes.push([a0 * r, a1 * r, a2 * r]);
            out.delta_a.push(da);
            next += 1;
        }
    }
    out
}

/// Runs `n_traj` paths, summing them batch by batch. Each batch covers a
/// fixed contiguous range of path indices, so the result does not depend
/// on how batches are scheduled across threads.
pub fn perturbative_amplitudes(
    p: &NoiseProcess,
    omega0: f64,
    omega_s: f64,
    cfg: &EnsembleConfig,
) -> Result<AmplitudeAverages> {
    validate(p, omega0, omega_s, cfg)?;
    let n_steps = p.steps_for(cfg.t_total);
    let samples = sample_steps(n_steps, cfg.n_samples);
    let n_batches = cfg.n_batches.min(cfg.n_traj);
    let bounds: Vec<(usize, usize)> = (0..n_batches)
        .map(|b| (b * cfg.n_traj / n_batches, (b + 1) * cfg.n_traj / n_batches))
        .collect();
    let batches: Vec<BatchSums> = bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let mut sums = BatchSums::zeros(samples.len());
            for idx in lo..hi {
                sums.add(&run_path(p, omega0, omega_s, n_steps, &samples, idx as u64));
            }
            sums
        })
        .collect();
    Ok(AmplitudeAverages {
        omega0,
        omega_s,
        tau_c: p.tau_c(),
        t_total: cfg.t_total,
        times: samples.iter().map(|&s| s as f64 * p.dt()).collect(),
        batches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::noise::NoiseKind;

    fn process(seed: u64) -> NoiseProcess {
        NoiseProcess::with_default_step(NoiseKind::OrnsteinUhlenbeck, 1e18, 1e-13, seed).unwrap()
    }

    #[test]
    fn phi_series_and_closed_forms_join() {
        for z in [Complex64::new(0.0, 9.9e-4), Complex64::new(0.0, 1.01e-3)] {
            let e1 = (z.exp() - 1.0) / z;
            let e2 = (z.exp() - 1.0 - z) / (z * z);
            assert!((phi1(z) - e1).norm() < 1e-12);
            assert!((phi2(z) - e2).norm() < 1e-9);
        }
    }

    #[test]
    fn window_violation_rejected() {
        let p = process(0);
        let mut cfg = EnsembleConfig::for_process(&p);
        cfg.t_total = 2e-9;
        assert!(matches!(perturbative_amplitudes(&p, 0.0, 0.0, &cfg), Err(Error::PerturbativeWindow(_))));
        cfg.t_total = 5e-13;
        assert!(perturbative_amplitudes(&p, 0.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn single_path_matches_second_order_and_stays_normalized() {
        let p = process(1);
        let cfg = EnsembleConfig::for_process(&p);
        for ws in [0.0, 1e13, 3e13] {
            let t = simulate_trajectory(&p, 2e13, ws, &cfg, 0).unwrap();
            for (k, a) in t.amplitudes.iter().enumerate() {
                let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12);
                let leak = 1.0 - 2.0 * a[1].norm_sqr();
                let pert = 2.0 * t.delta_a[k].re;
                assert!((leak - pert).abs() < 1e-3 * pert.abs() + 1e-12, "ws={ws} k={k}: {leak} vs {pert}");
            }
        }
    }

    #[test]
    fn batched_sums_are_deterministic() {
        let p = process(9);
        let mut cfg = EnsembleConfig::for_process(&p);
        cfg.n_traj = 200;
        cfg.n_batches = 7;
        let a = perturbative_amplitudes(&p, 0.0, 1e13, &cfg).unwrap();
        let b = perturbative_amplitudes(&p, 0.0, 1e13, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_traj(), 200);
        assert_eq!(a.times.len(), 64);
        assert!((a.times.last().unwrap() - cfg.t_total).abs() < 1e-24);
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut c = Compensated::default();
        for x in [1.0, 1e-17, -1.0, 1e-17] {
            c.add(x);
        }
        assert!((c.value() - 2e-17).abs() < 1e-30);
    }
}
