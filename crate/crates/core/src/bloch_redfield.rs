//! Bloch-Redfield relaxation supermatrix `R̂ = ½(R̂₁ + R̂₂)` from a system
//! Hamiltonian, Hermitian coupling operators and symmetrized bath spectra.
//!
//! With `Λₙʳ` the component of coupling `n` at Bohr frequency `ωʳ`:
//!
//! ```text
//! R̂₁ρ = Σ J_{n'n}(ωʳ) [[Λ_{n'}ʳ, ρ], Λₙ]
//! R̂₂ρ = Σ J_{n'n}(ωʳ) tanh(½βωʳ) [Λₙ, [Λ_{n'}ʳ, ρ]₊]
//! ```
//!
//! Frequency (Lamb) shifts are not produced.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::{two_sided_super, left_super, right_super, OperatorMatrix, Superoperator};

/// Default relative tolerance for merging Bohr frequencies.
pub const DEFAULT_BIN_TOL: f64 = 1e-9;

/// Inverse temperature in frequency units (ħ = 1), in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    /// Irreversible limit: `tanh(½βω) → sign(ω)`.
    Infinite,
}

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
        Ok(if beta.is_infinite() { Beta::Infinite } else { Beta::Finite(beta) })
    }

    pub fn tanh_half(&self, omega: f64) -> f64 {
        match *self {
            Beta::Finite(b) => (0.5 * b * omega).tanh(),
            Beta::Infinite => {
                if omega > 0.0 {
                    1.0
                } else if omega < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Upward-to-downward thermal weight `1/(1 + e^{−βω})`.
    pub fn forward_fraction(&self, omega: f64) -> f64 {
        match *self {
            Beta::Finite(b) => 1.0 / (1.0 + (-b * omega).exp()),
            Beta::Infinite => {
                if omega > 0.0 {
                    1.0
                } else if omega < 0.0 {
                    0.0
                } else {
                    0.5
                }
            }
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }
}

/// Symmetrized bath spectrum `J(ω) = J(−ω) ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralDensity {
    /// `J(ω) = 2λ_c τ_c / (1 + ω²τ_c²)`; `amplitude` in rad²/s², `tau_c` in s.
    Lorentzian { amplitude: f64, tau_c: f64 },
    /// Linear interpolation on a non-negative, strictly increasing grid,
    /// evaluated at `|ω|`. Frequencies beyond the last node are rejected.
    Tabulated { omega: Vec<f64>, values: Vec<f64> },
    /// Frequency-independent `J(ω) = level` (rad²/s).
    WhiteNoise { level: f64 },
}

impl SpectralDensity {
    pub fn lorentzian(amplitude: f64, tau_c: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("Lorentzian amplitude {amplitude} must be >= 0")));
        }
        if !(tau_c > 0.0 && tau_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau_c {tau_c} must be > 0")));
        }
        Ok(Self::Lorentzian { amplitude, tau_c })
    }

    pub fn tabulated(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() || omega.len() < 2 {
            return Err(Error::InvalidParameter("tabulated spectrum needs >= 2 matching nodes".into()));
        }
        if omega[0] < 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "tabulated grid must be non-negative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated values must be finite and >= 0".into()));
        }
        Ok(Self::Tabulated { omega, values })
    }

    pub fn white_noise(level: f64) -> Result<Self> {
        if !(level >= 0.0 && level.is_finite()) {
            return Err(Error::InvalidParameter(format!("white-noise level {level} must be >= 0")));
        }
        Ok(Self::WhiteNoise { level })
    }

    pub fn value(&self, omega: f64) -> Result<f64> {
        let w = omega.abs();
        match self {
            Self::Lorentzian { amplitude, tau_c } => Ok(2.0 * amplitude * tau_c / (1.0 + (w * tau_c).powi(2))),
            Self::WhiteNoise { level } => Ok(*level),
            Self::Tabulated { omega: grid, values } => {
                let last = *grid.last().unwrap();
                if w > last * (1.0 + 1e-12) || w < grid[0] * (1.0 - 1e-12) {
                    return Err(Error::OutOfBand { omega });
                }
                let idx = grid.partition_point(|&g| g < w);
                if idx == 0 {
                    return Ok(values[0]);
                }
                if idx >= grid.len() {
                    return Ok(*values.last().unwrap());
                }
                let (w0, w1) = (grid[idx - 1], grid[idx]);
                let frac = (w - w0) / (w1 - w0);
                Ok(values[idx - 1] + frac * (values[idx] - values[idx - 1]))
            }
        }
    }
}

/// A Hermitian system operator `Λₙ` coupled to bath amplitude `Φₙ`.
#[derive(Clone, Debug)]
pub struct CouplingOperator {
    pub label: String,
    pub matrix: OperatorMatrix,
    /// Auto-spectrum `J_{nn}` of `Φₙ`.
    pub density: SpectralDensity,
}

impl CouplingOperator {
    pub fn new(label: impl Into<String>, matrix: OperatorMatrix, density: SpectralDensity) -> Result<Self> {
        let dev = matrix.hermiticity_deviation();
        if dev > crate::liouville::HERMITIAN_TOL * matrix.entries().norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self { label: label.into(), matrix, density })
    }
}

/// Real, symmetric cross-spectrum `J_{nn'} = J_{n'n}` between two couplings.
#[derive(Clone, Debug)]
pub struct CrossSpectrum {
    pub a: usize,
    pub b: usize,
    pub density: SpectralDensity,
}

/// Couplings, their spectra and the shared inverse temperature. Pairs
/// without a registered cross-spectrum are uncorrelated.
#[derive(Clone, Debug)]
pub struct BathSpec {
    couplings: Vec<CouplingOperator>,
    cross: Vec<CrossSpectrum>,
    beta: Beta,
}

impl BathSpec {
    pub fn new(couplings: Vec<CouplingOperator>, beta: Beta) -> Result<Self> {
        if let Some(first) = couplings.first() {
            if couplings.iter().any(|c| c.matrix.basis() != first.matrix.basis()) {
                return Err(Error::BasisMismatch);
            }
        }
        Ok(Self { couplings, cross: Vec::new(), beta })
    }

    pub fn with_cross(mut self, a: usize, b: usize, density: SpectralDensity) -> Result<Self> {
        let n = self.couplings.len();
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidParameter(format!(
                "cross-spectrum ({a}, {b}) does not name two distinct couplings of {n}"
            )));
        }
        self.cross.push(CrossSpectrum { a, b, density });
        Ok(self)
    }

    pub fn couplings(&self) -> &[CouplingOperator] {
        &self.couplings
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    /// `J_{nn'}`, or `None` for an uncorrelated pair.
    pub fn density(&self, n: usize, n_prime: usize) -> Option<&SpectralDensity> {
        if n == n_prime {
            return self.couplings.get(n).map(|c| &c.density);
        }
        self.cross
            .iter()
            .rev()
            .find(|c| (c.a == n && c.b == n_prime) || (c.a == n_prime && c.b == n))
            .map(|c| &c.density)
    }
}

/// Slice `Λʳ` of a coupling operator oscillating at Bohr frequency `ωʳ`.
#[derive(Clone, Debug)]
pub struct FrequencyComponent {
    pub omega: f64,
    pub matrix: OperatorMatrix,
}

struct Eigenbasis {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

fn eigenbasis(h: &OperatorMatrix) -> Result<Eigenbasis> {
    let dev = h.hermiticity_deviation();
    if dev > crate::liouville::HERMITIAN_TOL * h.entries().norm().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let herm = (h.entries() + h.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    Ok(Eigenbasis { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
}

/// Bohr frequency of every ordered eigenpair, snapped onto shared bins.
///
/// Binning works on |ω| so that the bins for `ω` and `−ω` are exact
/// negatives of each other.
fn bohr_bins(energies: &[f64], tol: f64) -> DMatrix<f64> {
    let n = energies.len();
    let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let width = tol * scale;
    let mut mags: Vec<f64> = Vec::with_capacity(n * n);
    for &a in energies {
        for &b in energies {
            mags.push((a - b).abs());
        }
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut reps: Vec<(f64, f64, f64)> = Vec::new(); // (lo, hi, representative)
    let mut start = 0;
    for i in 1..=mags.len() {
        if i == mags.len() || mags[i] - mags[i - 1] > width {
            let cluster = &mags[start..i];
            let rep = if cluster[0] <= width {
                0.0
            } else {
                cluster.iter().sum::<f64>() / cluster.len() as f64
            };
            reps.push((cluster[0], cluster[cluster.len() - 1], rep));
            start = i;
        }
    }
    DMatrix::from_fn(n, n, |j, k| {
        let w = energies[j] - energies[k];
        let m = w.abs();
        let rep = reps.iter().find(|(lo, hi, _)| m >= *lo && m <= *hi).map(|r| r.2).unwrap_or(m);
        if rep == 0.0 {
            0.0
        } else {
            rep.copysign(w)
        }
    })
}

fn decompose_in(
    eb: &Eigenbasis,
    bins: &DMatrix<f64>,
    lambda: &OperatorMatrix,
) -> Vec<FrequencyComponent> {
    let u = &eb.vectors;
    let in_eig = u.adjoint() * lambda.entries() * u;
    let n = eb.energies.len();
    let mut comps: Vec<(f64, DMatrix<Complex64>)> = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let w = bins[(j, k)];
            let slot = match comps.iter().position(|(cw, _)| *cw == w) {
                Some(p) => p,
                None => {
                    comps.push((w, DMatrix::zeros(n, n)));
                    comps.len() - 1
                }
            };
            comps[slot].1[(j, k)] += in_eig[(j, k)];
        }
    }
    let cutoff = 1e-14 * lambda.entries().norm();
    comps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    comps
        .into_iter()
        .filter(|(_, m)| m.norm() > cutoff)
        .map(|(omega, m)| FrequencyComponent {
            omega,
            matrix: OperatorMatrix::new(lambda.basis().clone(), u * m * u.adjoint()).expect("same dimension"),
        })
        .collect()
}

/// Splits `Λ` into Bohr-frequency components of `H_s`.
///
/// Pairs whose frequencies agree within `tol·max|ν|` are merged. The
/// returned components sum to `Λ`; components with negligible weight are
/// dropped.
pub fn frequency_decompose(
    h_s: &OperatorMatrix,
    lambda: &CouplingOperator,
    tol: f64,
) -> Result<Vec<FrequencyComponent>> {
    if h_s.basis() != lambda.matrix.basis() {
        return Err(Error::BasisMismatch);
    }
    let eb = eigenbasis(h_s)?;
    let bins = bohr_bins(&eb.energies, tol);
    Ok(decompose_in(&eb, &bins, &lambda.matrix))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    DoubleCommutator,
    ThermalAnticommutator,
}

fn assemble_part(bath: &BathSpec, h_s: &OperatorMatrix, part: Part) -> Result<Superoperator> {
    let basis = h_s.basis();
    for c in bath.couplings() {
        if c.matrix.basis() != basis {
            return Err(Error::BasisMismatch);
        }
    }
    let eb = eigenbasis(h_s)?;
    let bins = bohr_bins(&eb.energies, DEFAULT_BIN_TOL);
    let parts: Vec<Vec<FrequencyComponent>> =
        bath.couplings().iter().map(|c| decompose_in(&eb, &bins, &c.matrix)).collect();
    let beta = bath.beta();
    let mut acc = Superoperator::zeros(basis);
    let n = bath.couplings().len();
    for outer in 0..n {
        let big = &bath.couplings()[outer].matrix;
        for inner in 0..n {
            let Some(density) = bath.density(inner, outer) else { continue };
            for comp in &parts[inner] {
                let j = density.value(comp.omega)?;
                let weight = match part {
                    Part::DoubleCommutator => j,
                    Part::ThermalAnticommutator => j * beta.tanh_half(comp.omega),
                };
                if weight == 0.0 {
                    continue;
                }
                let a = &comp.matrix;
                let ab = a.try_mul(big)?;
                let ba = big.try_mul(a)?;
                let term = match part {
                    // [[A, ρ], B] = AρB − ρAB − BAρ + BρA
                    Part::DoubleCommutator => two_sided_super(a, big)?
                        .try_sub(&right_super(&ab))?
                        .try_sub(&left_super(&ba))?
                        .try_add(&two_sided_super(big, a)?)?,
                    // [B, [A, ρ]₊] = BAρ + BρA − AρB − ρAB
                    Part::ThermalAnticommutator => left_super(&ba)
                        .try_add(&two_sided_super(big, a)?)?
                        .try_sub(&two_sided_super(a, big)?)?
                        .try_sub(&right_super(&ab))?,
                };
                acc.add_scaled_in_place(&term, Complex64::new(weight, 0.0))?;
            }
        }
    }
    Ok(acc)
}

/// Double-commutator part `R̂₁`.
pub fn assemble_r1(bath: &BathSpec, h_s: &OperatorMatrix) -> Result<Superoperator> {
    assemble_part(bath, h_s, Part::DoubleCommutator)
}

/// Thermal part `R̂₂`; vanishes at β = 0.
pub fn assemble_r2(bath: &BathSpec, h_s: &OperatorMatrix) -> Result<Superoperator> {
    assemble_part(bath, h_s, Part::ThermalAnticommutator)
}

/// `R̂ = ½(R̂₁ + R̂₂)`.
pub fn assemble_r(bath: &BathSpec, h_s: &OperatorMatrix) -> Result<Superoperator> {
    let r1 = assemble_r1(bath, h_s)?;
    let r2 = assemble_r2(bath, h_s)?;
    Ok(r1.try_add(&r2)?.scaled(0.5))
}

pub const VALIDITY_WARN: f64 = 1e-1;
pub const VALIDITY_STRONG: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityStatus {
    StrongPass,
    Pass,
    Fail,
}

/// Second-order validity figure `‖𝓛‖·τ_c`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ValidityReport {
    pub ratio: f64,
    pub status: ValidityStatus,
}

impl ValidityReport {
    pub fn from_ratio(ratio: f64) -> Self {
        let status = if ratio <= VALIDITY_STRONG {
            ValidityStatus::StrongPass
        } else if ratio <= VALIDITY_WARN {
            ValidityStatus::Pass
        } else {
            ValidityStatus::Fail
        };
        Self { ratio, status }
    }

    pub fn passes(&self) -> bool {
        self.status != ValidityStatus::Fail
    }
}

pub fn validity_check(op: &Superoperator, tau_c: f64) -> Result<ValidityReport> {
    if !(tau_c > 0.0 && tau_c.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau_c {tau_c} must be > 0")));
    }
    Ok(ValidityReport::from_ratio(op.spectral_norm() * tau_c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::BasisLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x(b: &BasisLabel) -> OperatorMatrix {
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 2)] = c(1.0, 0.0);
        m[(2, 1)] = c(1.0, 0.0);
        OperatorMatrix::new(b.clone(), m).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, b: &BasisLabel) -> OperatorMatrix {
        let n = b.dim();
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        OperatorMatrix::new(b.clone(), &m + m.adjoint()).unwrap()
    }

    #[test]
    fn thss_sigma_x_components() {
        let b = BasisLabel::numbered(3).unwrap();
        let ws = 2.0;
        let h = OperatorMatrix::from_real_diagonal(&b, &[5.0, ws / 2.0, -ws / 2.0]).unwrap();
        let half_x = sigma_x(&b).scaled(c(0.5, 0.0));
        let coupling = CouplingOperator::new("x", half_x, SpectralDensity::white_noise(1.0).unwrap()).unwrap();
        let comps = frequency_decompose(&h, &coupling, DEFAULT_BIN_TOL).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].omega, -ws);
        assert_eq!(comps[1].omega, ws);
        let up = OperatorMatrix::ket_bra(&b, 1, 2).unwrap().scaled(c(0.5, 0.0));
        let down = OperatorMatrix::ket_bra(&b, 2, 1).unwrap().scaled(c(0.5, 0.0));
        assert!(comps[1].matrix.max_abs_diff(&up).unwrap() < 1e-15);
        assert!(comps[0].matrix.max_abs_diff(&down).unwrap() < 1e-15);
    }

    #[test]
    fn diagonal_coupling_is_single_zero_frequency_component() {
        let b = BasisLabel::numbered(3).unwrap();
        let h = OperatorMatrix::from_real_diagonal(&b, &[0.0, 1.0, 1.0]).unwrap();
        let lam = OperatorMatrix::from_real_diagonal(&b, &[0.5, -0.5, 0.0]).unwrap();
        let coupling = CouplingOperator::new("z", lam.clone(), SpectralDensity::white_noise(1.0).unwrap()).unwrap();
        let comps = frequency_decompose(&h, &coupling, DEFAULT_BIN_TOL).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].omega, 0.0);
        assert!(comps[0].matrix.max_abs_diff(&lam).unwrap() < 1e-15);
    }

    #[test]
    fn random_components_reconstruct_and_pair_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b = BasisLabel::numbered(4).unwrap();
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, &b);
            let lam = random_hermitian(&mut rng, &b);
            let coupling = CouplingOperator::new("n", lam.clone(), SpectralDensity::white_noise(1.0).unwrap()).unwrap();
            let comps = frequency_decompose(&h, &coupling, DEFAULT_BIN_TOL).unwrap();
            let mut sum = OperatorMatrix::zeros(&b);
            for comp in &comps {
                sum = sum.try_add(&comp.matrix).unwrap();
                let partner = comps.iter().find(|o| o.omega == -comp.omega).expect("partner at -omega");
                assert!(partner.matrix.max_abs_diff(&comp.matrix.adjoint()).unwrap() < 1e-12);
            }
            assert!(sum.max_abs_diff(&lam).unwrap() < 1e-12);

            // Oracle: Λʳ oscillates as e^{iωʳt} in the Heisenberg picture.
            let t = 0.37;
            let u = crate::liouville::expm(&(h.entries() * c(0.0, t))).unwrap();
            let heis = &u * lam.entries() * u.adjoint();
            let mut from_comps = DMatrix::zeros(4, 4);
            for comp in &comps {
                from_comps += comp.matrix.entries() * c(0.0, comp.omega * t).exp();
            }
            assert!((heis - from_comps).norm() < 1e-11);
        }
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let b = BasisLabel::numbered(2).unwrap();
        let h = OperatorMatrix::ket_bra(&b, 0, 1).unwrap();
        let lam = OperatorMatrix::identity(&b);
        let coupling = CouplingOperator::new("n", lam, SpectralDensity::white_noise(1.0).unwrap()).unwrap();
        assert!(matches!(frequency_decompose(&h, &coupling, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn spectral_density_forms() {
        let l = SpectralDensity::lorentzian(3.0, 0.5).unwrap();
        assert_eq!(l.value(0.0).unwrap(), 3.0);
        assert!((l.value(2.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(l.value(-2.0).unwrap(), l.value(2.0).unwrap());
        let t = SpectralDensity::tabulated(vec![0.0, 1.0, 2.0], vec![4.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.value(-0.5).unwrap(), 3.0);
        assert!(matches!(t.value(3.0), Err(Error::OutOfBand { .. })));
        assert!(SpectralDensity::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SpectralDensity::lorentzian(1.0, 0.0).is_err());
        assert!(SpectralDensity::white_noise(-1.0).is_err());
    }

    fn thss_bath(beta: Beta, j: SpectralDensity) -> (OperatorMatrix, BathSpec) {
        let b = BasisLabel::numbered(3).unwrap();
        let ws = 1.3;
        let h = OperatorMatrix::from_real_diagonal(&b, &[4.0, ws / 2.0, -ws / 2.0]).unwrap();
        let half_x = sigma_x(&b).scaled(c(0.5, 0.0));
        let mut y = DMatrix::zeros(3, 3);
        y[(1, 2)] = c(0.0, -0.5);
        y[(2, 1)] = c(0.0, 0.5);
        let half_y = OperatorMatrix::new(b.clone(), y).unwrap();
        let bath = BathSpec::new(
            vec![
                CouplingOperator::new("x", half_x, j.clone()).unwrap(),
                CouplingOperator::new("y", half_y, j).unwrap(),
            ],
            beta,
        )
        .unwrap();
        (h, bath)
    }

    #[test]
    fn thss_zero_one_coherence_elements() {
        let jw = 0.8;
        let beta = Beta::Finite(0.9);
        let (h, bath) = thss_bath(beta, SpectralDensity::white_noise(jw).unwrap());
        let r1 = assemble_r1(&bath, &h).unwrap();
        let r2 = assemble_r2(&bath, &h).unwrap();
        let t = beta.tanh_half(1.3);
        assert!((r1.element((0, 1), (0, 1)) - c(-0.5 * jw, 0.0)).norm() < 1e-14);
        assert!((r2.element((0, 1), (0, 1)) - c(-0.5 * jw * t, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_spectrum_and_zero_beta() {
        let (h, bath) = thss_bath(Beta::Finite(0.0), SpectralDensity::white_noise(0.0).unwrap());
        assert_eq!(assemble_r1(&bath, &h).unwrap().max_abs(), 0.0);
        let (h, bath) = thss_bath(Beta::Finite(0.0), SpectralDensity::white_noise(2.0).unwrap());
        assert_eq!(assemble_r2(&bath, &h).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn detailed_balance_and_bloch_block() {
        let ws = 1.3;
        for scale in [0.1, 1.0, 10.0] {
            let beta = Beta::Finite(scale / ws);
            let (h, bath) = thss_bath(beta, SpectralDensity::lorentzian(0.7, 0.4).unwrap());
            let r = assemble_r(&bath, &h).unwrap();
            let w11 = -r.element((1, 1), (1, 1)).re;
            let w22 = -r.element((2, 2), (2, 2)).re;
            assert!(((w11 / w22) / (scale).exp() - 1.0).abs() < 1e-9);
            // population exchange
            assert!((r.element((2, 2), (1, 1)).re - w11).abs() < 1e-14);
            assert!((r.element((1, 1), (2, 2)).re - w22).abs() < 1e-14);
            let wn = -r.element((1, 2), (1, 2)).re;
            assert!((wn - 0.5 * (w11 + w22)).abs() < 1e-14);
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let b = BasisLabel::numbered(4).unwrap();
        let h = random_hermitian(&mut rng, &b);
        let couplings = (0..2)
            .map(|k| {
                CouplingOperator::new(format!("c{k}"), random_hermitian(&mut rng, &b), SpectralDensity::lorentzian(0.3, 0.8).unwrap())
                    .unwrap()
            })
            .collect();
        let bath = BathSpec::new(couplings, Beta::Finite(1.7))
            .unwrap()
            .with_cross(0, 1, SpectralDensity::lorentzian(0.1, 0.8).unwrap())
            .unwrap();
        let r1 = assemble_r1(&bath, &h).unwrap();
        let r2 = assemble_r2(&bath, &h).unwrap();
        let r = assemble_r(&bath, &h).unwrap();
        for _ in 0..5 {
            let rho = random_hermitian(&mut rng, &b);
            for s in [&r1, &r2, &r] {
                let out = s.apply(&rho).unwrap();
                assert!(out.trace().norm() < 1e-12);
                assert!(out.hermiticity_deviation() < 1e-12);
            }
        }
    }

    #[test]
    fn cross_spectrum_must_name_distinct_couplings() {
        let (_, bath) = thss_bath(Beta::Infinite, SpectralDensity::white_noise(1.0).unwrap());
        assert!(bath.clone().with_cross(0, 0, SpectralDensity::white_noise(1.0).unwrap()).is_err());
        assert!(bath.with_cross(0, 5, SpectralDensity::white_noise(1.0).unwrap()).is_err());
    }

    #[test]
    fn validity_thresholds() {
        let b = BasisLabel::numbered(2).unwrap();
        let z = Superoperator::zeros(&b);
        let rep = validity_check(&z, 1e-13).unwrap();
        assert_eq!(rep.ratio, 0.0);
        assert_eq!(rep.status, ValidityStatus::StrongPass);
        let k = Superoperator::identity(&b).scaled(5.0);
        assert_eq!(validity_check(&k, 0.1).unwrap().status, ValidityStatus::Fail);
        assert_eq!(ValidityReport::from_ratio(0.05).status, ValidityStatus::Pass);
        assert!(validity_check(&z, 0.0).is_err());
    }
}
