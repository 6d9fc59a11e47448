//! Closed-form diffusion-assisted quantities for a radical pair: contact
//! reaction radii, the exchange dephasing radius, cage rates, the κ_ST
//! estimate from exchange fluctuations, and the ξ sensitivity parameter.
//!
//! Lengths in cm, times in s.

use crate::error::{Error, Result};
use crate::radical_pair::RateElements;

/// Constant in the strong-exchange dephasing radius.
pub const DEPHASING_RADIUS_CONST: f64 = 1.14;
/// Below this ξ the recombination probability does not resolve `l_ST − l_SS`.
pub const XI_INSENSITIVE: f64 = 0.1;
pub const DEFAULT_RADIUS_TOL: f64 = 0.2;

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct DiffusionParams {
    /// Contact distance, cm.
    pub d: f64,
    /// Width of the reactive zone, cm.
    pub lambda0: f64,
    /// Relative diffusion coefficient, cm²/s.
    pub diffusion: f64,
    /// Exchange decay constant in `J(r) = J₀e^{−α(r−d)}`, cm⁻¹.
    pub alpha: f64,
    /// Contact exchange, s⁻¹.
    pub j0: f64,
    /// Cage partition function, cm³.
    pub z: f64,
    pub kappa0_s: f64,
    pub kappa0_t: f64,
    /// Characteristic spin-dependent interaction, s⁻¹.
    pub q: f64,
    /// Correlation time of short-range motion, s.
    pub tau_c: f64,
    /// Amplitude of short-range stochastic motion, cm.
    pub lambda_amp: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be finite and > 0")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")))
    }
}

/// `l = d·q/(1 + q)` with `q = κ⁰dλ₀/D`. Infinite reactivity gives `d`.
pub fn reaction_radius(kappa0: f64, p: &DiffusionParams) -> Result<f64> {
    positive("d", p.d)?;
    positive("lambda0", p.lambda0)?;
    positive("D", p.diffusion)?;
    if !(kappa0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa0 = {kappa0} must be >= 0")));
    }
    if kappa0.is_infinite() {
        return Ok(p.d);
    }
    let q = kappa0 * p.d * p.lambda0 / p.diffusion;
    Ok(p.d * q / (1.0 + q))
}

fn dephasing_radius_unchecked(p: &DiffusionParams) -> f64 {
    let ratio = 2.0 * p.j0.abs() / (p.diffusion * p.alpha * p.alpha);
    p.d + (DEPHASING_RADIUS_CONST + ratio.ln()) / p.alpha
}

/// `l_ST = d + α⁻¹[1.14 + ln(2|J₀|/Dα²)]`, defined only for `|J₀| > Dα²`.
pub fn dephasing_radius(p: &DiffusionParams) -> Result<f64> {
    positive("d", p.d)?;
    positive("D", p.diffusion)?;
    positive("alpha", p.alpha)?;
    if !p.j0.is_finite() {
        return Err(Error::NonFinite("J0"));
    }
    let bound = p.diffusion * p.alpha * p.alpha;
    if !(p.j0.abs() > bound) {
        return Err(Error::OutOfRegime(format!(
            "dephasing radius needs |J0| > D*alpha^2 = {bound:e} s^-1, got |J0| = {:e}",
            p.j0.abs()
        )));
    }
    Ok(dephasing_radius_unchecked(p))
}

/// Cage rates `k = D·l/Z`.
pub fn cage_rates(l_ss: f64, l_tt: f64, l_st: f64, p: &DiffusionParams) -> Result<RateElements> {
    positive("D", p.diffusion)?;
    positive("Z", p.z)?;
    non_negative("l_SS", l_ss)?;
    non_negative("l_TT", l_tt)?;
    non_negative("l_ST", l_st)?;
    let k = |l: f64| p.diffusion * l / p.z;
    Ok(RateElements { k_ss: k(l_ss), k_tt: k(l_tt), k_st: k(l_st) })
}

/// `κ_ST ≈ (J₀αλ)²τ_c`.
pub fn kappa_st_estimate(p: &DiffusionParams) -> Result<f64> {
    non_negative("alpha", p.alpha)?;
    non_negative("lambda", p.lambda_amp)?;
    non_negative("tau_c", p.tau_c)?;
    if !p.j0.is_finite() {
        return Err(Error::NonFinite("J0"));
    }
    Ok((p.j0 * p.alpha * p.lambda_amp).powi(2) * p.tau_c)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct XiReport {
    pub xi: f64,
    /// `ξ < 0.1`.
    pub insensitive: bool,
}

/// `ξ = Q·Δl²/D` for a radius gap `Δl ≥ 0`.
pub fn xi_from_gap(q: f64, delta_l: f64, diffusion: f64) -> Result<XiReport> {
    non_negative("Q", q)?;
    non_negative("delta_l", delta_l)?;
    positive("D", diffusion)?;
    let xi = q * delta_l * delta_l / diffusion;
    Ok(XiReport { xi, insensitive: xi < XI_INSENSITIVE })
}

pub fn xi_sensitivity(p: &DiffusionParams, l_ss: f64, l_st: f64) -> Result<XiReport> {
    if !(l_st >= l_ss) {
        return Err(Error::InvalidParameter(format!("l_ST = {l_st} must be >= l_SS = {l_ss}")));
    }
    xi_from_gap(p.q, l_st - l_ss, p.diffusion)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RegimeReport {
    /// `κ_S⁰dλ₀/D`.
    pub q_s: f64,
    /// `|J₀|/(Dα²)`.
    pub exchange_ratio: f64,
    pub l_ss: f64,
    /// Dephasing-radius formula evaluated directly, also at the regime edge.
    pub l_st: f64,
    /// `|l_ST − l_SS| / d`.
    pub relative_gap: f64,
    /// High reactivity (`q_S ≥ 10`) and moderate exchange (`1 ≤ |J₀|/Dα² ≤ 10`).
    pub in_regime: bool,
    /// In regime and radii within tolerance of each other.
    pub radii_equal: bool,
}

/// Checks whether high singlet reactivity and moderate exchange make the
/// singlet reaction radius and the dephasing radius coincide (both of
/// order `d`) within `tol` relative to `d`.
pub fn equal_radius_regime_check(p: &DiffusionParams, tol: f64) -> Result<RegimeReport> {
    positive("alpha", p.alpha)?;
    positive("tol", tol)?;
    let l_ss = reaction_radius(p.kappa0_s, p)?;
    let q_s = p.kappa0_s * p.d * p.lambda0 / p.diffusion;
    let exchange_ratio = p.j0.abs() / (p.diffusion * p.alpha * p.alpha);
    let l_st = dephasing_radius_unchecked(p);
    let relative_gap = (l_st - l_ss).abs() / p.d;
    let in_regime = q_s >= 10.0 && (1.0..=10.0).contains(&exchange_ratio);
    Ok(RegimeReport {
        q_s,
        exchange_ratio,
        l_ss,
        l_st,
        relative_gap,
        in_regime,
        radii_equal: in_regime && relative_gap <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radical_pair::{rate_elements, ReactionModel};

    fn base() -> DiffusionParams {
        DiffusionParams {
            d: 4e-8,
            lambda0: 1e-8,
            diffusion: 1e-5,
            alpha: 1e8,
            j0: 1e12,
            z: 1e-21,
            kappa0_s: 1e11,
            kappa0_t: 1e10,
            q: 1e9,
            tau_c: 1e-13,
            lambda_amp: 1e-10,
        }
    }

    #[test]
    fn reaction_radius_limits() {
        let p = base();
        assert_eq!(reaction_radius(0.0, &p).unwrap(), 0.0);
        assert_eq!(reaction_radius(f64::INFINITY, &p).unwrap(), p.d);
        let unit_q = p.diffusion / (p.d * p.lambda0);
        assert!((reaction_radius(unit_q, &p).unwrap() - 0.5 * p.d).abs() < 1e-22);
        let mut lo = 0.0;
        for k in [1e6, 1e8, 1e10, 1e12, 1e14] {
            let l = reaction_radius(k, &p).unwrap();
            assert!(l > lo && l < p.d);
            lo = l;
        }
        assert!(reaction_radius(1.0, &DiffusionParams { diffusion: 0.0, ..p }).is_err());
    }

    #[test]
    fn dephasing_radius_anchor() {
        let p = base();
        let gap = dephasing_radius(&p).unwrap() - p.d;
        assert!((gap / 4.14e-8 - 1.0).abs() < 5e-3, "{gap}");
        let halved = DiffusionParams { diffusion: 0.5e-5, ..p };
        let gap2 = dephasing_radius(&halved).unwrap() - p.d;
        assert!((gap2 - gap - 2f64.ln() / p.alpha).abs() < 1e-20);
    }

    #[test]
    fn dephasing_radius_regime_bound() {
        let p = base();
        let bound = p.diffusion * p.alpha * p.alpha;
        let edge = DiffusionParams { j0: bound * (-DEPHASING_RADIUS_CONST).exp() / 2.0, ..p };
        assert!(matches!(dephasing_radius(&edge), Err(Error::OutOfRegime(_))));
        assert!(matches!(dephasing_radius(&DiffusionParams { j0: bound, ..p }), Err(Error::OutOfRegime(_))));
        let l = dephasing_radius(&DiffusionParams { j0: bound * 1.0001, ..p }).unwrap();
        assert!(l > p.d);
    }

    #[test]
    fn cage_rate_scaling() {
        let p = base();
        let k = cage_rates(0.0, 1e-8, 3e-8, &p).unwrap();
        assert_eq!(k.k_ss, 0.0);
        assert!(k.k_st > k.k_tt);
        let k2 = cage_rates(0.0, 1e-8, 3e-8, &DiffusionParams { diffusion: 2e-5, ..p }).unwrap();
        assert!((k2.k_st - 2.0 * k.k_st).abs() < 1e-12 * k2.k_st);
        assert!(cage_rates(1e-8, 1e-8, 1e-8, &DiffusionParams { z: 0.0, ..p }).is_err());
    }

    #[test]
    fn kappa_st_anchor() {
        let p = DiffusionParams { j0: 1e14, ..base() };
        let k = kappa_st_estimate(&p).unwrap();
        assert!((k / 1e11 - 1.0).abs() < 1e-12);
        assert_eq!(kappa_st_estimate(&DiffusionParams { lambda_amp: 0.0, ..p }).unwrap(), 0.0);
        let k2 = kappa_st_estimate(&DiffusionParams { tau_c: 2e-13, ..p }).unwrap();
        assert!((k2 / k - 2.0).abs() < 1e-12);
        for kappa in [1e9, 1e10, 1e11] {
            assert!(k >= kappa * (1.0 - 1e-12));
        }
    }

    #[test]
    fn xi_anchor_and_scaling() {
        let r = xi_from_gap(1e9, 3e-8, 1e-5).unwrap();
        assert_eq!(format!("{:.2}", r.xi), "0.09");
        assert!((r.xi - 0.09).abs() < 1e-15);
        assert!(r.insensitive);
        assert_eq!(xi_sensitivity(&base(), 2e-8, 2e-8).unwrap().xi, 0.0);
        let r10 = xi_from_gap(1e9, 3e-8, 1e-4).unwrap();
        assert!((r10.xi / r.xi - 0.1).abs() < 1e-12);
        assert!(xi_sensitivity(&base(), 3e-8, 2e-8).is_err());
    }

    #[test]
    fn regime_check() {
        let mut p = base();
        p.d = 4e-7; // αd = 40
        p.kappa0_s = 1e3 * p.diffusion / (p.d * p.lambda0);
        p.j0 = p.diffusion * p.alpha * p.alpha;
        let r = equal_radius_regime_check(&p, DEFAULT_RADIUS_TOL).unwrap();
        assert!((r.q_s - 1e3).abs() < 1e-9);
        assert!(r.in_regime && r.radii_equal);
        let want_l_st = p.d + (DEPHASING_RADIUS_CONST + 2f64.ln()) / p.alpha;
        assert!((r.l_st - want_l_st).abs() < 1e-20);
        p.kappa0_s = 1e-2 * p.diffusion / (p.d * p.lambda0);
        let r = equal_radius_regime_check(&p, DEFAULT_RADIUS_TOL).unwrap();
        assert!(!r.in_regime && !r.radii_equal);
    }

    #[test]
    fn cage_rates_feed_reaction_model() {
        let p = base();
        let l_ss = reaction_radius(p.kappa0_s, &p).unwrap();
        let l_tt = reaction_radius(p.kappa0_t, &p).unwrap();
        let l_st = dephasing_radius(&p).unwrap();
        let k = cage_rates(l_ss, l_tt, l_st, &p).unwrap();
        let m = ReactionModel::from_rate_elements(&k).unwrap();
        let back = rate_elements(&m).unwrap();
        assert!((back.k_st - k.k_st).abs() <= 1e-12 * k.k_st);
        assert!((back.k_ss - k.k_ss).abs() <= 1e-12 * k.k_ss);
    }
}
