use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest admissible `dt/τ_c`.
pub const MAX_DT_FRACTION: f64 = 1.0 / 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Gaussian Ornstein-Uhlenbeck process.
    OrnsteinUhlenbeck,
    /// Telegraph process jumping between `±√variance`.
    Dichotomous,
}

/// Stationary zero-mean noise with `⟨v(t)v(0)⟩ = variance·e^{−|t|/τ_c}`,
/// sampled every `dt`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct NoiseProcess {
    kind: NoiseKind,
    variance: f64,
    tau_c: f64,
    seed: u64,
    dt: f64,
}

impl NoiseProcess {
    pub fn new(kind: NoiseKind, variance: f64, tau_c: f64, seed: u64, dt: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter(format!("variance {variance} must be > 0")));
        }
        if !(tau_c > 0.0 && tau_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau_c {tau_c} must be > 0")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt {dt} must be > 0")));
        }
        let limit = tau_c * MAX_DT_FRACTION;
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::TimeStepTooCoarse { dt, limit });
        }
        Ok(Self { kind, variance, tau_c, seed, dt })
    }

    /// Uses the coarsest admissible step, `τ_c/20`.
    pub fn with_default_step(kind: NoiseKind, variance: f64, tau_c: f64, seed: u64) -> Result<Self> {
        Self::new(kind, variance, tau_c, seed, tau_c * MAX_DT_FRACTION)
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Lorentzian spectrum `2·variance·τ_c/(1 + ω²τ_c²)` of the process.
    pub fn analytic_spectrum(&self, omega: f64) -> f64 {
        2.0 * self.variance * self.tau_c / (1.0 + (omega * self.tau_c).powi(2))
    }

    pub(crate) fn steps_for(&self, t_total: f64) -> usize {
        (t_total / self.dt).round() as usize
    }

    /// Sample stream for path `index`; independent of every other index.
    pub(crate) fn stream(&self, index: u64) -> NoiseStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let sigma = self.variance.sqrt();
        match self.kind {
            NoiseKind::OrnsteinUhlenbeck => {
                let value = sigma * rng.sample::<f64, _>(StandardNormal);
                let decay = (-self.dt / self.tau_c).exp();
                NoiseStream {
                    state: StreamState::Ou { decay, kick: sigma * (1.0 - decay * decay).sqrt() },
                    rng,
                    value,
                }
            }
            NoiseKind::Dichotomous => {
                let value = if rng.gen::<bool>() { sigma } else { -sigma };
                // Flip rate 1/(2τ_c) gives correlation e^{−t/τ_c}.
                let waits = Exp::new(0.5 / self.tau_c).expect("positive rate");
                let next_flip = rng.sample(waits);
                NoiseStream { state: StreamState::Telegraph { waits, next_flip, step: 0, dt: self.dt }, rng, value }
            }
        }
    }
}

enum StreamState {
    Ou { decay: f64, kick: f64 },
    Telegraph { waits: Exp<f64>, next_flip: f64, step: u64, dt: f64 },
}

/// Yields `v(0), v(dt), v(2dt), …`.
pub(crate) struct NoiseStream {
    state: StreamState,
    rng: ChaCha8Rng,
    value: f64,
}

impl Iterator for NoiseStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.value;
        match &mut self.state {
            StreamState::Ou { decay, kick } => {
                let xi: f64 = self.rng.sample(StandardNormal);
                self.value = *decay * self.value + *kick * xi;
            }
            StreamState::Telegraph { waits, next_flip, step, dt } => {
                *step += 1;
                let t = *step as f64 * *dt;
                while *next_flip <= t {
                    self.value = -self.value;
                    *next_flip += self.rng.sample(*waits);
                }
            }
        }
        Some(out)
    }
}

pub(crate) fn check_duration(p: &NoiseProcess, t_total: f64) -> Result<()> {
    if !(t_total > 10.0 * p.tau_c) || !t_total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration {t_total} s must exceed 10 tau_c = {} s",
            10.0 * p.tau_c
        )));
    }
    Ok(())
}

/// Path `index` sampled at `0, dt, …, T`.
pub fn simulate_noise(p: &NoiseProcess, t_total: f64, index: u64) -> Result<Vec<f64>> {
    check_duration(p, t_total)?;
    Ok(p.stream(index).take(p.steps_for(t_total) + 1).collect())
}

/// Paths `0..n_paths`, generated in parallel.
pub fn simulate_paths(p: &NoiseProcess, t_total: f64, n_paths: usize) -> Result<Vec<Vec<f64>>> {
    check_duration(p, t_total)?;
    let len = p.steps_for(t_total) + 1;
    Ok((0..n_paths as u64).into_par_iter().map(|i| p.stream(i).take(len).collect()).collect())
}
