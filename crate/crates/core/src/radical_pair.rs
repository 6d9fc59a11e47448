//! Spin-selective recombination of a radical pair on the basis
//! `S, T+, T0, T−`.
//!
//! The reaction superoperator is
//!
//! ```text
//! K̂ρ = ½κ_S[P_S,ρ]₊ + ½κ_T[P_T,ρ]₊ + κ_ST 𝒫̂_S(ρ),   𝒫̂_S(ρ) = ½[P_S,ρ]₊ − P_SρP_S
//! ```
//!
//! and enters the generator as `ρ̇ = −i[H,ρ] − K̂ρ`. Products are not
//! represented; the trace leaks as the pair reacts.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::{
    anticommutator_super, assemble_generator, expm, infinite_time_integral, propagate, validate_times,
    BasisLabel, DensityMatrix, OperatorMatrix, Propagation, Superoperator,
};
use crate::three_state::lindblad_dephasing;

pub const S: usize = 0;
pub const T_PLUS: usize = 1;
pub const T_ZERO: usize = 2;
pub const T_MINUS: usize = 3;

/// Relative residual (RMS of `ln|ρ_ST0|` about the fit) above which the
/// coherence decay is reported as non-exponential.
pub const FIT_RESIDUAL_TOL: f64 = 1e-3;
const FIT_POINTS: usize = 61;

pub fn rp_basis() -> BasisLabel {
    BasisLabel::new(["S", "T+", "T0", "T-"]).expect("four labels")
}

/// Minimal pair Hamiltonian (rad/s): Zeeman term splitting `T±` by
/// `±omega_mean`, S–T0 mixing `½Δω` and an exchange term
/// `−J(½ + 2S_a·S_b)` placing S at `+J` and the triplets at `−J`.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RpHamiltonian {
    pub omega_mean: f64,
    pub delta_omega: f64,
    pub j_exchange: f64,
}

impl RpHamiltonian {
    pub fn matrix(&self) -> Result<OperatorMatrix> {
        for v in [self.omega_mean, self.delta_omega, self.j_exchange] {
            if !v.is_finite() {
                return Err(Error::NonFinite("radical-pair Hamiltonian"));
            }
        }
        let j = self.j_exchange;
        let mut m = DMatrix::zeros(4, 4);
        m[(S, S)] = Complex64::new(j, 0.0);
        m[(T_PLUS, T_PLUS)] = Complex64::new(self.omega_mean - j, 0.0);
        m[(T_ZERO, T_ZERO)] = Complex64::new(-j, 0.0);
        m[(T_MINUS, T_MINUS)] = Complex64::new(-self.omega_mean - j, 0.0);
        m[(S, T_ZERO)] = Complex64::new(0.5 * self.delta_omega, 0.0);
        m[(T_ZERO, S)] = Complex64::new(0.5 * self.delta_omega, 0.0);
        OperatorMatrix::new(rp_basis(), m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Anticommutator decay only (`κ_ST = 0`).
    Haberkorn,
    Generalized,
    /// ST dephasing at `κ_S + κ_T`.
    JonesHore,
    /// ST dephasing without reaction.
    DephasingOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ReactionModel {
    kappa_s: f64,
    kappa_t: f64,
    kappa_st: f64,
    variant: Variant,
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")))
    }
}

impl ReactionModel {
    pub fn haberkorn(kappa_s: f64, kappa_t: f64) -> Result<Self> {
        Self::generic(kappa_s, kappa_t, 0.0, Variant::Haberkorn)
    }

    pub fn generalized(kappa_s: f64, kappa_t: f64, kappa_st: f64) -> Result<Self> {
        Self::generic(kappa_s, kappa_t, kappa_st, Variant::Generalized)
    }

    pub fn jones_hore(kappa_s: f64, kappa_t: f64) -> Result<Self> {
        Self::generic(kappa_s, kappa_t, kappa_s + kappa_t, Variant::JonesHore)
    }

    /// `K̂ρ = κ_d 𝒫̂_S(ρ)`.
    pub fn dephasing_only(kappa_d: f64) -> Result<Self> {
        Self::generic(0.0, 0.0, kappa_d, Variant::DephasingOnly)
    }

    /// Builds the model whose diagonal elements equal the given rates,
    /// with `κ_ST = 2k_ST − k_SS − k_TT`.
    pub fn from_rate_elements(k: &RateElements) -> Result<Self> {
        let kappa_st = 2.0 * k.k_st - k.k_ss - k.k_tt;
        let floor = 1e-12 * (k.k_st.abs() + k.k_ss.abs() + k.k_tt.abs());
        if kappa_st < -floor {
            return Err(Error::InvalidParameter(format!(
                "k_ST = {} is below ½(k_SS + k_TT); implied dephasing rate {kappa_st} is negative",
                k.k_st
            )));
        }
        Self::generalized(k.k_ss, k.k_tt, kappa_st.max(0.0))
    }

    fn generic(kappa_s: f64, kappa_t: f64, kappa_st: f64, variant: Variant) -> Result<Self> {
        check_rate("kappa_S", kappa_s)?;
        check_rate("kappa_T", kappa_t)?;
        check_rate("kappa_ST", kappa_st)?;
        Ok(Self { kappa_s, kappa_t, kappa_st, variant })
    }

    /// Builds a model from a variant tag and the rates that variant uses.
    /// `kappa_st` is read only for `Generalized`; `DephasingOnly` takes its
    /// rate from `kappa_st`.
    pub fn from_variant(variant: Variant, kappa_s: f64, kappa_t: f64, kappa_st: f64) -> Result<Self> {
        match variant {
            Variant::Haberkorn => Self::haberkorn(kappa_s, kappa_t),
            Variant::Generalized => Self::generalized(kappa_s, kappa_t, kappa_st),
            Variant::JonesHore => Self::jones_hore(kappa_s, kappa_t),
            Variant::DephasingOnly => Self::dephasing_only(kappa_st),
        }
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    pub fn kappa_t(&self) -> f64 {
        self.kappa_t
    }

    pub fn kappa_st(&self) -> f64 {
        self.kappa_st
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
}

/// Diagonal Liouville-space elements `⟨νν'|K̂|νν'⟩`, s⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RateElements {
    pub k_ss: f64,
    pub k_tt: f64,
    pub k_st: f64,
}

/// `(P_S, P_T)`.
pub fn projectors() -> (OperatorMatrix, OperatorMatrix) {
    let b = rp_basis();
    let ps = OperatorMatrix::projector(&b, S).expect("in range");
    let pt = OperatorMatrix::identity(&b).try_sub(&ps).expect("same basis");
    (ps, pt)
}

pub fn build_k(m: &ReactionModel) -> Superoperator {
    let (ps, pt) = projectors();
    anticommutator_super(&ps)
        .scaled(0.5 * m.kappa_s)
        .try_add(&anticommutator_super(&pt).scaled(0.5 * m.kappa_t))
        .and_then(|k| k.try_add(&lindblad_dephasing(&ps).scaled(m.kappa_st)))
        .expect("same basis")
}

/// `−i[H,·] − K̂`.
pub fn generator(m: &ReactionModel, h: &RpHamiltonian) -> Result<Superoperator> {
    assemble_generator(&h.matrix()?, &[], &[build_k(m)])
}

pub fn rate_elements(m: &ReactionModel) -> Result<RateElements> {
    let k = build_k(m);
    let diag = |a: usize, b: usize| k.element((a, b), (a, b)).re;
    let k_ss = diag(S, S);
    let tt: Vec<f64> = [T_PLUS, T_ZERO, T_MINUS].iter().map(|&t| diag(t, t)).collect();
    let st: Vec<f64> = [T_PLUS, T_ZERO, T_MINUS]
        .iter()
        .flat_map(|&t| [diag(S, t), diag(t, S)])
        .collect();
    let spread = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max((x - v[0]).abs()));
    let scale = 1e-12 * (m.kappa_s + m.kappa_t + m.kappa_st).max(f64::MIN_POSITIVE);
    if spread(&tt) > scale || spread(&st) > scale {
        return Err(Error::Singular("rate elements depend on triplet projection"));
    }
    Ok(RateElements { k_ss, k_tt: tt[0], k_st: st[0] })
}

/// ρ₀ = ½(|S⟩ + |T0⟩)(⟨S| + ⟨T0|).
pub fn coherent_st0_state() -> DensityMatrix {
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    DensityMatrix::pure(&rp_basis(), &[a, z, a, z]).expect("normalized")
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CoherenceFit {
    /// Fitted decay rate of `|ρ_ST0|`, s⁻¹.
    pub rate: f64,
    /// RMS residual of `ln|ρ_ST0|` about the fitted line.
    pub residual: f64,
    /// `false` when the residual exceeds [`FIT_RESIDUAL_TOL`].
    pub exponential: bool,
}

/// Propagates the S–T0 superposition over three predicted decay times
/// `3/k_ST` and fits `|ρ_ST0(t)|` to a single exponential by log-linear
/// least squares.
pub fn coherence_decay_rate(m: &ReactionModel, h: &RpHamiltonian) -> Result<CoherenceFit> {
    let k_st = rate_elements(m)?.k_st;
    if !(k_st > 0.0) {
        return Err(Error::InvalidParameter("no S-T dephasing: k_ST = 0".into()));
    }
    let gen = generator(m, h)?;
    let t_end = 3.0 / k_st;
    let times: Vec<f64> = (0..FIT_POINTS).map(|i| t_end * i as f64 / (FIT_POINTS - 1) as f64).collect();
    let traj = propagate(&gen, &coherent_st0_state(), &times)?;
    let logs: Vec<f64> = traj.element(S, T_ZERO).iter().map(|z| z.norm().ln()).collect();
    if logs.iter().any(|v| !v.is_finite()) {
        return Ok(CoherenceFit { rate: f64::NAN, residual: f64::INFINITY, exponential: false });
    }
    let (slope, intercept) = linear_fit(&times, &logs);
    let residual = (times
        .iter()
        .zip(&logs)
        .map(|(t, y)| (y - (intercept + slope * t)).powi(2))
        .sum::<f64>()
        / times.len() as f64)
        .sqrt();
    Ok(CoherenceFit { rate: -slope, residual, exponential: residual <= FIT_RESIDUAL_TOL })
}

/// Ordinary least-squares `(slope, intercept)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Yields {
    pub phi_s: f64,
    pub phi_t: f64,
}

/// `Φ_ν = κ_ν Tr(P_ν ∫₀^∞ ρ dt)`.
pub fn recombination_yields(m: &ReactionModel, h: &RpHamiltonian, rho0: &DensityMatrix) -> Result<Yields> {
    if rho0.basis() != &rp_basis() {
        return Err(Error::BasisMismatch);
    }
    let x = infinite_time_integral(&generator(m, h)?, rho0)?;
    let (ps, pt) = projectors();
    Ok(Yields {
        phi_s: m.kappa_s * ps.try_mul(&x)?.trace().re,
        phi_t: m.kappa_t * pt.try_mul(&x)?.trace().re,
    })
}

/// Evolves `|ψ⟩` under `H − (i/2)(κ_S P_S + κ_T P_T)` and returns
/// `|ψ(t)⟩⟨ψ(t)|`. Only valid without ST dephasing.
pub fn pure_state_propagate(
    m: &ReactionModel,
    h: &RpHamiltonian,
    psi0: &[Complex64],
    times: &[f64],
) -> Result<Propagation> {
    if m.kappa_st != 0.0 {
        return Err(Error::FactorizationUnavailable { kappa_st: m.kappa_st });
    }
    validate_times(times)?;
    let start = DensityMatrix::pure(&rp_basis(), psi0)?;
    let (ps, pt) = projectors();
    let decay = ps
        .scaled(Complex64::new(m.kappa_s, 0.0))
        .try_add(&pt.scaled(Complex64::new(m.kappa_t, 0.0)))?;
    let h_eff = h.matrix()?.try_sub(&decay.scaled(Complex64::new(0.0, 0.5)))?;
    let psi = nalgebra::DVector::from_column_slice(psi0);
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let u = expm(&(h_eff.entries() * Complex64::new(0.0, -t)))?;
        let v = &u * &psi;
        let rho = &v * v.adjoint();
        if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("pure-state amplitude"));
        }
        states.push(DensityMatrix::from_evolved(OperatorMatrix::new(start.basis().clone(), rho)?));
    }
    Ok(Propagation::new(times.to_vec(), states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{propagate_with, PropagationMethod};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_op(rng: &mut ChaCha8Rng) -> OperatorMatrix {
        OperatorMatrix::new(
            rp_basis(),
            DMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        )
        .unwrap()
    }

    #[test]
    fn projector_algebra() {
        let (ps, pt) = projectors();
        let b = rp_basis();
        assert_eq!(ps.try_add(&pt).unwrap().max_abs_diff(&OperatorMatrix::identity(&b)).unwrap(), 0.0);
        assert_eq!(ps.try_mul(&ps).unwrap().max_abs_diff(&ps).unwrap(), 0.0);
        assert_eq!(pt.try_mul(&pt).unwrap().max_abs_diff(&pt).unwrap(), 0.0);
        assert_eq!(ps.try_mul(&pt).unwrap().entries().norm(), 0.0);
        assert_eq!(pt.trace().re, 3.0);
    }

    #[test]
    fn equal_rates_give_uniform_decay() {
        let k = build_k(&ReactionModel::haberkorn(2.5, 2.5).unwrap());
        let want = Superoperator::identity(&rp_basis()).scaled(2.5);
        assert!(k.try_sub(&want).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn dephasing_is_symmetric_in_singlet_and_triplet() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (ps, pt) = projectors();
        let ds = lindblad_dephasing(&ps);
        let dt = lindblad_dephasing(&pt);
        let k = build_k(&ReactionModel::dephasing_only(3.0).unwrap());
        for _ in 0..5 {
            let rho = random_op(&mut rng);
            let a = ds.apply(&rho).unwrap();
            assert!(a.max_abs_diff(&dt.apply(&rho).unwrap()).unwrap() < 1e-15);
            let split = ps
                .try_mul(&rho)
                .unwrap()
                .try_mul(&pt)
                .unwrap()
                .try_add(&pt.try_mul(&rho).unwrap().try_mul(&ps).unwrap())
                .unwrap()
                .scaled(c(0.5));
            assert!(a.max_abs_diff(&split).unwrap() < 1e-15);
            assert!(k.apply(&rho).unwrap().trace().norm() < 1e-15);
        }
    }

    #[test]
    fn haberkorn_matches_anticommutator_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (ps, pt) = projectors();
        let k = build_k(&ReactionModel::haberkorn(1.3, 0.4).unwrap());
        let rho = random_op(&mut rng);
        let anti = |p: &OperatorMatrix| p.try_mul(&rho).unwrap().try_add(&rho.try_mul(p).unwrap()).unwrap();
        let want = anti(&ps).scaled(c(0.65)).try_add(&anti(&pt).scaled(c(0.2))).unwrap();
        assert!(k.apply(&rho).unwrap().max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn rate_elements_by_variant() {
        let r = rate_elements(&ReactionModel::haberkorn(2.0, 0.0).unwrap()).unwrap();
        assert_eq!((r.k_ss, r.k_tt, r.k_st), (2.0, 0.0, 1.0));
        let r = rate_elements(&ReactionModel::jones_hore(2.0, 0.0).unwrap()).unwrap();
        assert_eq!(r.k_st, 2.0);
        assert_eq!(r.k_st, r.k_ss);
        let r = rate_elements(&ReactionModel::generalized(1.0, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(r.k_st, 2.0);
        let r = rate_elements(&ReactionModel::dephasing_only(3.0).unwrap()).unwrap();
        assert_eq!((r.k_ss, r.k_tt, r.k_st), (0.0, 0.0, 1.5));
    }

    #[test]
    fn rate_element_inversion_round_trips() {
        let want = RateElements { k_ss: 3e9, k_tt: 1e9, k_st: 7e9 };
        let m = ReactionModel::from_rate_elements(&want).unwrap();
        let got = rate_elements(&m).unwrap();
        assert!((got.k_st - want.k_st).abs() <= 1e-12 * want.k_st);
        assert!(ReactionModel::from_rate_elements(&RateElements { k_ss: 2.0, k_tt: 2.0, k_st: 1.0 }).is_err());
    }

    #[test]
    fn rejects_negative_rates() {
        assert!(ReactionModel::haberkorn(-1.0, 0.0).is_err());
        assert!(ReactionModel::generalized(1.0, 1.0, -0.1).is_err());
        assert!(ReactionModel::dephasing_only(f64::NAN).is_err());
    }

    #[test]
    fn coherence_rates_by_variant() {
        let h = RpHamiltonian { omega_mean: 5.0, delta_omega: 0.0, j_exchange: 0.7 };
        let fit = coherence_decay_rate(&ReactionModel::haberkorn(2.0, 0.0).unwrap(), &h).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-6 && fit.exponential);
        let fit = coherence_decay_rate(&ReactionModel::jones_hore(2.0, 0.0).unwrap(), &h).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-6);
        let fit = coherence_decay_rate(&ReactionModel::dephasing_only(3.0).unwrap(), &h).unwrap();
        assert!((fit.rate - 1.5).abs() < 1e-6);
        assert!(coherence_decay_rate(&ReactionModel::haberkorn(0.0, 0.0).unwrap(), &h).is_err());
    }

    #[test]
    fn mixing_makes_decay_non_exponential() {
        let h = RpHamiltonian { omega_mean: 0.0, delta_omega: 5.0, j_exchange: 0.0 };
        let fit = coherence_decay_rate(&ReactionModel::haberkorn(2.0, 0.1).unwrap(), &h).unwrap();
        assert!(!fit.exponential);
        assert!(fit.residual > FIT_RESIDUAL_TOL);
    }

    #[test]
    fn dephasing_only_keeps_populations() {
        let h = RpHamiltonian { omega_mean: 1.0, delta_omega: 0.0, j_exchange: 0.3 };
        let gen = generator(&ReactionModel::dephasing_only(3.0).unwrap(), &h).unwrap();
        let traj = propagate(&gen, &coherent_st0_state(), &[0.5, 1.0, 2.0]).unwrap();
        for (t, s) in traj.iter() {
            assert!((s.population(S) - 0.5).abs() < 1e-12);
            assert!((s.population(T_ZERO) - 0.5).abs() < 1e-12);
            assert!((s.get(S, T_ZERO).norm() - 0.5 * (-1.5 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_yields() {
        let b = rp_basis();
        let m = ReactionModel::haberkorn(2.0, 1.0).unwrap();
        let y = recombination_yields(&m, &RpHamiltonian::default(), &DensityMatrix::basis_state(&b, S).unwrap()).unwrap();
        assert!((y.phi_s - 1.0).abs() < 1e-14 && y.phi_t.abs() < 1e-14);
        let h = RpHamiltonian { omega_mean: 1.0, delta_omega: 2.0, j_exchange: 0.5 };
        let m = ReactionModel::haberkorn(1.5, 1.5).unwrap();
        let y = recombination_yields(&m, &h, &DensityMatrix::maximally_mixed(&b)).unwrap();
        assert!((y.phi_s - 0.25).abs() < 1e-12 && (y.phi_t - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unreactive_triplet_makes_yield_undefined() {
        let m = ReactionModel::haberkorn(1.0, 0.0).unwrap();
        let rho0 = DensityMatrix::basis_state(&rp_basis(), T_PLUS).unwrap();
        assert!(matches!(
            recombination_yields(&m, &RpHamiltonian::default(), &rho0),
            Err(Error::NonDecaying { .. })
        ));
    }

    #[test]
    fn pure_state_singlet_decay() {
        let m = ReactionModel::haberkorn(2.0, 0.0).unwrap();
        let psi = [c(1.0), c(0.0), c(0.0), c(0.0)];
        let p = pure_state_propagate(&m, &RpHamiltonian::default(), &psi, &[0.0, 0.3, 1.0]).unwrap();
        for (t, s) in p.iter() {
            assert!((s.population(S) - (-2.0 * t).exp()).abs() < 1e-14);
        }
        let g = ReactionModel::generalized(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            pure_state_propagate(&g, &RpHamiltonian::default(), &psi, &[1.0]),
            Err(Error::FactorizationUnavailable { .. })
        ));
    }

    #[test]
    fn pure_state_matches_liouville() {
        let h = RpHamiltonian { omega_mean: 0.8, delta_omega: 1.7, j_exchange: -0.4 };
        let m = ReactionModel::haberkorn(1.1, 0.3).unwrap();
        let psi = [c(0.6), Complex64::new(0.0, 0.48), c(0.64), c(0.0)];
        let times = [0.5, 1.5, 3.0];
        let pure = pure_state_propagate(&m, &h, &psi, &times).unwrap();
        let rho0 = DensityMatrix::pure(&rp_basis(), &psi).unwrap();
        let full = propagate_with(&generator(&m, &h).unwrap(), &rho0, &times, PropagationMethod::MatrixExponential)
            .unwrap();
        for (a, b) in pure.states().iter().zip(full.states()) {
            assert!(a.as_operator().max_abs_diff(b.as_operator()).unwrap() < 1e-12);
        }
    }
}
