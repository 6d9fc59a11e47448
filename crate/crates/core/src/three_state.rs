//! Three-state model: a reference state `|0⟩` plus a two-level pair
//! `|1⟩, |2⟩` split by `ωₛ` and relaxed by transverse bath fluctuations.
//!
//! Closed-form rates, the matching coupling set for the Bloch-Redfield
//! assembly and the irreversible (βωₛ → ∞) projection-limit generator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bloch_redfield::{assemble_r, BathSpec, Beta, CouplingOperator, SpectralDensity};
use crate::error::{Error, Result};
use crate::liouville::{anticommutator_super, sandwich_super, BasisLabel, OperatorMatrix, Superoperator};

#[derive(Clone, Debug)]
pub struct ThssParams {
    /// Energy of `|0⟩`, rad/s.
    pub omega0: f64,
    /// 1–2 splitting, rad/s.
    pub omega_s: f64,
    pub beta: Beta,
    /// Spectrum of the two transverse fluctuations (shared, uncorrelated).
    pub transverse: SpectralDensity,
    /// Spectrum of fluctuations of the 0–1 splitting, if any.
    pub splitting: Option<SpectralDensity>,
    /// Adds a longitudinal `σ_z/2` coupling with the transverse spectrum.
    pub isotropic: bool,
}

impl ThssParams {
    pub fn new(omega0: f64, omega_s: f64, beta: Beta, transverse: SpectralDensity) -> Result<Self> {
        let p = Self { omega0, omega_s, beta, transverse, splitting: None, isotropic: false };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_s > 0.0 && self.omega_s.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_s {} must be > 0", self.omega_s)));
        }
        if !self.omega0.is_finite() {
            return Err(Error::NonFinite("omega0"));
        }
        Ok(())
    }
}

/// Population and dephasing rates, all in s⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ThssRates {
    /// Downward population rate out of `|1⟩`.
    pub w11: f64,
    /// Upward population rate out of `|2⟩`.
    pub w22: f64,
    /// 1–2 coherence decay.
    pub wn: f64,
    pub w01: f64,
    pub w02: f64,
    /// `J₀₁(0)`, zero without splitting fluctuations.
    pub wbar01: f64,
    /// `J(0)` of the longitudinal coupling, zero unless isotropic.
    pub wbarn: f64,
}

pub fn closed_form_rates(p: &ThssParams) -> Result<ThssRates> {
    p.validate()?;
    let j = p.transverse.value(p.omega_s)?;
    let w11 = j * p.beta.forward_fraction(p.omega_s);
    let w22 = j * p.beta.forward_fraction(-p.omega_s);
    let wbarn = if p.isotropic { p.transverse.value(0.0)? } else { 0.0 };
    let wbar01 = match &p.splitting {
        Some(d) => d.value(0.0)?,
        None => 0.0,
    };
    // The longitudinal and 0–1 couplers each dephase every coherence they
    // touch; (λᵢ − λⱼ)² is 1 or ¼ for the pairs listed.
    Ok(ThssRates {
        w11,
        w22,
        wn: 0.5 * (w11 + w22) + 0.5 * wbarn + 0.125 * wbar01,
        w01: 0.5 * w11 + 0.5 * wbar01 + 0.125 * wbarn,
        w02: 0.5 * w22 + 0.125 * wbarn + 0.125 * wbar01,
        wbar01,
        wbarn,
    })
}

pub fn thss_basis() -> BasisLabel {
    BasisLabel::numbered(3).expect("three labels")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `H_s` and the coupling set: `σ_x/2`, `σ_y/2` on the (1,2) block, plus
/// `σ_z/2` when isotropic and `½(|0⟩⟨0| − |1⟩⟨1|)` with splitting noise.
pub fn build_thss_bath(p: &ThssParams) -> Result<(OperatorMatrix, BathSpec)> {
    p.validate()?;
    let b = thss_basis();
    let h = OperatorMatrix::from_real_diagonal(&b, &[p.omega0, 0.5 * p.omega_s, -0.5 * p.omega_s])?;

    let mut x = DMatrix::zeros(3, 3);
    x[(1, 2)] = c(0.5, 0.0);
    x[(2, 1)] = c(0.5, 0.0);
    let mut y = DMatrix::zeros(3, 3);
    y[(1, 2)] = c(0.0, -0.5);
    y[(2, 1)] = c(0.0, 0.5);
    let mut couplings = vec![
        CouplingOperator::new("x", OperatorMatrix::new(b.clone(), x)?, p.transverse.clone())?,
        CouplingOperator::new("y", OperatorMatrix::new(b.clone(), y)?, p.transverse.clone())?,
    ];
    if p.isotropic {
        let z = OperatorMatrix::from_real_diagonal(&b, &[0.0, 0.5, -0.5])?;
        couplings.push(CouplingOperator::new("z", z, p.transverse.clone())?);
    }
    if let Some(d) = &p.splitting {
        let s = OperatorMatrix::from_real_diagonal(&b, &[0.5, -0.5, 0.0])?;
        couplings.push(CouplingOperator::new("01", s, d.clone())?);
    }
    Ok((h, BathSpec::new(couplings, p.beta)?))
}

/// Reads the rate constants back out of an assembled three-state `R̂`.
pub fn rates_from_relaxation(r: &Superoperator, p: &ThssParams) -> Result<ThssRates> {
    if r.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: r.dim() });
    }
    let neg = |a: (usize, usize)| -r.element(a, a).re;
    let closed = closed_form_rates(p)?;
    Ok(ThssRates {
        w11: neg((1, 1)),
        w22: neg((2, 2)),
        wn: neg((1, 2)),
        w01: neg((0, 1)),
        w02: neg((0, 2)),
        wbar01: closed.wbar01,
        wbarn: closed.wbarn,
    })
}

/// Lindblad-form dephasing `𝒫̂(ρ) = ½[P,ρ]₊ − PρP` for a projector `P`.
pub fn lindblad_dephasing(p: &OperatorMatrix) -> Superoperator {
    anticommutator_super(p)
        .scaled(0.5)
        .try_sub(&sandwich_super(p))
        .expect("same basis")
}

/// Irreversible-limit relaxation generator
/// `−½w₁₁[P₁,ρ]₊ − w̄₀₁𝒫̂₁(ρ) − ½w₀₀[P₀,ρ]₊`.
pub fn projection_limit_super(w11_inf: f64, wbar01: f64, w00_inf: Option<f64>) -> Result<Superoperator> {
    let w00 = w00_inf.unwrap_or(0.0);
    for (name, v) in [("w11_inf", w11_inf), ("wbar01", wbar01), ("w00_inf", w00)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be >= 0")));
        }
    }
    let b = thss_basis();
    let p0 = OperatorMatrix::projector(&b, 0)?;
    let p1 = OperatorMatrix::projector(&b, 1)?;
    let mut out = anticommutator_super(&p1).scaled(-0.5 * w11_inf);
    out = out.try_sub(&lindblad_dephasing(&p1).scaled(wbar01))?;
    out = out.try_sub(&anticommutator_super(&p0).scaled(0.5 * w00))?;
    Ok(out)
}

/// Largest entrywise gap between the assembled `R̂` at `βωₛ` and the
/// projection-limit generator built from `J(ωₛ)` and `J₀₁(0)`.
///
/// Rows the projection form does not describe are skipped: the feed into
/// `ρ₂₂` always, and the 0–2 and 1–2 coherences when splitting noise is
/// present.
pub fn verify_limit_consistency(p: &ThssParams, beta_omega_s: f64) -> Result<f64> {
    if p.isotropic {
        return Err(Error::InvalidParameter(
            "projection limit has no longitudinal dephasing term".into(),
        ));
    }
    let mut q = p.clone();
    q.beta = Beta::new(beta_omega_s / p.omega_s)?;
    let (h, bath) = build_thss_bath(&q)?;
    let r = assemble_r(&bath, &h)?;
    let w11_inf = q.transverse.value(q.omega_s)?;
    let wbar01 = match &q.splitting {
        Some(d) => d.value(0.0)?,
        None => 0.0,
    };
    let lim = projection_limit_super(w11_inf, wbar01, None)?;
    let mut skip = vec![(2, 2)];
    if q.splitting.is_some() {
        skip.extend([(0, 2), (2, 0), (1, 2), (2, 1)]);
    }
    let mut dev = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if skip.contains(&(i, j)) {
                continue;
            }
            let row = r.index(i, j);
            for col in 0..9 {
                dev = dev.max((r.matrix()[(row, col)] - lim.matrix()[(row, col)]).norm());
            }
        }
    }
    Ok(dev)
}
