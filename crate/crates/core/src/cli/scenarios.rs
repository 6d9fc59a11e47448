use num_complex::Complex64;
use relaxkin::bloch_redfield::{assemble_r, validity_check, SpectralDensity, ValidityReport};
use relaxkin::diffusion::{
    cage_rates, dephasing_radius, equal_radius_regime_check, kappa_st_estimate, reaction_radius, xi_from_gap,
    DiffusionParams, XiReport, DEFAULT_RADIUS_TOL,
};
use relaxkin::liouville::{assemble_generator, propagate, DensityMatrix, Propagation, Superoperator};
use relaxkin::radical_pair::{
    build_k, coherence_decay_rate, generator, rate_elements, recombination_yields, rp_basis, CoherenceFit,
    RateElements, ReactionModel, RpHamiltonian, Yields, S, T_MINUS, T_PLUS, T_ZERO,
};
use relaxkin::stochastic::{
    closed_loop_from, extract_rates, oracle_relaxation, perturbative_amplitudes, EnsembleConfig, NoiseProcess,
    MAX_DT_FRACTION,
};
use relaxkin::three_state::{build_thss_bath, closed_form_rates, rates_from_relaxation, thss_basis, ThssParams};

use super::config::{
    OracleParams, PairInitial, RadicalPairParams, RadiiParams, ThreeStateInitial, ThreeStateParams,
};
use super::report::{Cell, Quantity, ScenarioOutput, Table, Validity};
use super::CliError;

/// Largest `|ratio − ½| + 2σ` accepted for the half-rate law.
const HALF_RATE_TOL: f64 = 0.05;

fn time_grid(t_end: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(CliError::validation(format!("t_end_s = {t_end} must be finite and > 0")));
    }
    if n < 2 {
        return Err(CliError::validation(format!("n_times = {n} must be >= 2")));
    }
    Ok((0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect())
}

fn column_label(name: &str) -> String {
    name.replace('+', "p").replace('-', "m")
}

/// `t_s`, every population, every `|ρ_ij|` with `i < j`, then the trace.
pub fn density_table(prop: &Propagation) -> Table {
    let Some(first) = prop.states().first() else { return Table::default() };
    let names: Vec<String> = first.basis().names().iter().map(|n| column_label(n)).collect();
    let short = names.iter().all(|n| n.chars().count() == 1);
    let pair = |i: usize, j: usize| {
        if short {
            format!("{}{}", names[i], names[j])
        } else {
            format!("{}_{}", names[i], names[j])
        }
    };
    let n = names.len();
    let mut columns = vec!["t_s".to_string()];
    columns.extend((0..n).map(|i| format!("rho_{}", pair(i, i))));
    for i in 0..n {
        for j in i + 1..n {
            columns.push(format!("abs_rho_{}", pair(i, j)));
        }
    }
    columns.push("trace".into());
    let rows = prop
        .iter()
        .map(|(t, rho)| {
            let mut row = vec![Cell::Num(t)];
            row.extend((0..n).map(|i| Cell::Num(rho.population(i))));
            for i in 0..n {
                for j in i + 1..n {
                    row.push(Cell::Num(rho.get(i, j).norm()));
                }
            }
            row.push(Cell::Num(rho.trace()));
            row
        })
        .collect();
    Table { columns, rows }
}

fn validity_of(op: &Superoperator, tau_c: f64) -> Result<Validity, CliError> {
    let report = if tau_c == 0.0 { ValidityReport::from_ratio(0.0) } else { validity_check(op, tau_c)? };
    Ok(Validity::new(report, tau_c))
}

pub fn three_state(p: &ThreeStateParams) -> Result<ScenarioOutput, CliError> {
    let mut tp = ThssParams::new(p.omega0_rad_per_s, p.omega_s_rad_per_s, p.beta_s.resolve()?, p.spectrum.build()?)?;
    tp.splitting = p.splitting_spectrum.as_ref().map(|s| s.build()).transpose()?;
    tp.isotropic = p.isotropic;
    let tau_c = p
        .tau_c_s
        .or_else(|| p.spectrum.tau_c())
        .ok_or_else(|| CliError::validation("tau_c_s is required with a tabulated spectrum"))?;
    if !(tau_c >= 0.0 && tau_c.is_finite()) {
        return Err(CliError::validation(format!("tau_c_s = {tau_c} must be finite and >= 0")));
    }
    let times = time_grid(p.t_end_s, p.n_times)?;

    let closed = closed_form_rates(&tp)?;
    let (h, bath) = build_thss_bath(&tp)?;
    let r = assemble_r(&bath, &h)?;
    let assembled = rates_from_relaxation(&r, &tp)?;
    let pairs = [
        (closed.w11, assembled.w11),
        (closed.w22, assembled.w22),
        (closed.wn, assembled.wn),
        (closed.w01, assembled.w01),
        (closed.w02, assembled.w02),
    ];
    let deviation = pairs
        .iter()
        .map(|(c, a)| (a - c).abs() / c.abs().max(f64::MIN_POSITIVE))
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);

    let b = thss_basis();
    let rho0 = match p.initial_state {
        ThreeStateInitial::Zero => DensityMatrix::basis_state(&b, 0)?,
        ThreeStateInitial::One => DensityMatrix::basis_state(&b, 1)?,
        ThreeStateInitial::Two => DensityMatrix::basis_state(&b, 2)?,
        ThreeStateInitial::ZeroPlusOne => {
            let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            DensityMatrix::pure(&b, &[a, a, Complex64::new(0.0, 0.0)])?
        }
    };
    let gen = assemble_generator(&h, std::slice::from_ref(&r), &[])?;
    let prop = propagate(&gen, &rho0, &times)?;

    let mut out = ScenarioOutput::default();
    out.put("w11_per_s", Quantity::new(closed.w11, "s^-1"));
    out.put("w22_per_s", Quantity::new(closed.w22, "s^-1"));
    out.put("wn_per_s", Quantity::new(closed.wn, "s^-1"));
    out.put("w01_per_s", Quantity::new(closed.w01, "s^-1"));
    out.put("w02_per_s", Quantity::new(closed.w02, "s^-1"));
    out.put("assembly_max_rel_deviation", Quantity::new(deviation, "1"));
    out.validity = Some(validity_of(&r, tau_c)?);
    out.table = Some(density_table(&prop));
    Ok(out)
}

/// Everything a radical-pair run or a sweep point reports, minus the
/// time series.
pub struct PairResult {
    pub model: ReactionModel,
    pub hamiltonian: RpHamiltonian,
    pub rates: RateElements,
    pub yields: Yields,
    pub coherence: Option<CoherenceFit>,
    pub xi: Option<XiReport>,
    pub validity: Validity,
    pub rho0: DensityMatrix,
}

fn pair_initial(which: PairInitial) -> Result<DensityMatrix, CliError> {
    let b = rp_basis();
    let z = Complex64::new(0.0, 0.0);
    Ok(match which {
        PairInitial::Singlet => DensityMatrix::basis_state(&b, S)?,
        PairInitial::TripletZero => DensityMatrix::basis_state(&b, T_ZERO)?,
        PairInitial::SingletTripletZero => {
            let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            DensityMatrix::pure(&b, &[a, z, a, z])?
        }
        PairInitial::TripletMixed => {
            let mut m = nalgebra::DMatrix::zeros(4, 4);
            for i in [T_PLUS, T_ZERO, T_MINUS] {
                m[(i, i)] = Complex64::new(1.0 / 3.0, 0.0);
            }
            DensityMatrix::new(relaxkin::liouville::OperatorMatrix::new(b, m)?)?
        }
    })
}

pub fn pair_point(p: &RadicalPairParams) -> Result<PairResult, CliError> {
    if !(p.tau_c_s > 0.0) {
        return Err(CliError::validation(format!("tau_c_s = {} must be > 0", p.tau_c_s)));
    }
    let model = ReactionModel::from_variant(p.variant, p.kappa_S_per_s, p.kappa_T_per_s, p.kappa_ST_per_s)?;
    let hamiltonian = RpHamiltonian {
        omega_mean: p.omega_mean_rad_per_s,
        delta_omega: p.delta_omega_rad_per_s,
        j_exchange: p.exchange_rad_per_s,
    };
    let rates = rate_elements(&model)?;
    let rho0 = pair_initial(p.initial_state)?;
    let yields = recombination_yields(&model, &hamiltonian, &rho0)?;
    let coherence = if rates.k_st > 0.0 { Some(coherence_decay_rate(&model, &hamiltonian)?) } else { None };
    let xi = match (p.Q_per_s, p.delta_l_cm, p.D_cm2_per_s) {
        (Some(q), Some(dl), Some(d)) => Some(xi_from_gap(q, dl, d)?),
        (None, None, None) => None,
        _ => return Err(CliError::validation("xi needs all of Q_per_s, delta_l_cm and D_cm2_per_s")),
    };
    let validity = validity_of(&build_k(&model), p.tau_c_s)?;
    Ok(PairResult { model, hamiltonian, rates, yields, coherence, xi, validity, rho0 })
}

pub fn radical_pair(p: &RadicalPairParams) -> Result<ScenarioOutput, CliError> {
    let res = pair_point(p)?;
    let t_end = match p.t_end_s {
        Some(t) => t,
        None => {
            let slowest = [res.rates.k_ss, res.rates.k_tt, res.rates.k_st]
                .into_iter()
                .filter(|k| *k > 0.0)
                .fold(f64::INFINITY, f64::min);
            if !slowest.is_finite() {
                return Err(CliError::validation("all rates vanish; give t_end_s explicitly"));
            }
            5.0 / slowest
        }
    };
    let times = time_grid(t_end, p.n_times)?;
    let prop = propagate(&generator(&res.model, &res.hamiltonian)?, &res.rho0, &times)?;

    let mut out = ScenarioOutput::default();
    out.put("Phi_S", Quantity::new(res.yields.phi_s, "1"));
    out.put("Phi_T", Quantity::new(res.yields.phi_t, "1"));
    out.put("k_SS_per_s", Quantity::new(res.rates.k_ss, "s^-1"));
    out.put("k_TT_per_s", Quantity::new(res.rates.k_tt, "s^-1"));
    out.put("k_ST_per_s", Quantity::new(res.rates.k_st, "s^-1"));
    out.put("kappa_ST_per_s", Quantity::new(res.model.kappa_st(), "s^-1"));
    if let Some(fit) = res.coherence {
        out.put("coherence_rate_per_s", Quantity::new(fit.rate, "s^-1"));
        out.put("coherence_fit_residual", Quantity::new(fit.residual, "1"));
        out.flag("coherence_exponential", fit.exponential);
    }
    if let Some(xi) = res.xi {
        out.put("xi", Quantity::new(xi.xi, "1"));
        out.flag("xi_insensitive", xi.insensitive);
    }
    out.validity = Some(res.validity);
    out.table = Some(density_table(&prop));
    Ok(out)
}

pub fn radii(p: &RadiiParams) -> Result<ScenarioOutput, CliError> {
    let dp = DiffusionParams {
        d: p.d_cm,
        lambda0: p.lambda0_cm.unwrap_or(0.0),
        diffusion: p.D_cm2_per_s,
        alpha: p.alpha_per_cm,
        j0: p.J0_per_s,
        z: p.Z_cm3.unwrap_or(0.0),
        kappa0_s: p.kappa0_S_per_s.unwrap_or(0.0),
        kappa0_t: p.kappa0_T_per_s.unwrap_or(0.0),
        q: p.Q_per_s.unwrap_or(0.0),
        tau_c: p.tau_c_s,
        lambda_amp: p.lambda_cm,
    };
    let mut out = ScenarioOutput::default();
    let l_st = dephasing_radius(&dp)?;
    out.put("l_ST_cm", Quantity::new(l_st, "cm"));
    out.put("l_ST_minus_d_cm", Quantity::new(l_st - dp.d, "cm"));
    let kst = kappa_st_estimate(&dp)?;
    out.put("kappa_ST_estimate_per_s", Quantity::new(kst, "s^-1"));
    let mut k_hat = build_k(&ReactionModel::dephasing_only(kst)?);

    let radii_inputs = (p.lambda0_cm, p.kappa0_S_per_s, p.kappa0_T_per_s);
    if let (Some(_), Some(k0s), Some(k0t)) = radii_inputs {
        let l_ss = reaction_radius(k0s, &dp)?;
        let l_tt = reaction_radius(k0t, &dp)?;
        out.put("l_SS_cm", Quantity::new(l_ss, "cm"));
        out.put("l_TT_cm", Quantity::new(l_tt, "cm"));
        out.put("delta_l_cm", Quantity::new((l_st - l_ss).abs(), "cm"));
        if let Some(q) = p.Q_per_s {
            let xi = xi_from_gap(q, (l_st - l_ss).abs(), dp.diffusion)?;
            out.put("xi", Quantity::new(xi.xi, "1"));
            out.flag("xi_insensitive", xi.insensitive);
        }
        let regime = equal_radius_regime_check(&dp, p.regime_tolerance.unwrap_or(DEFAULT_RADIUS_TOL))?;
        out.put("q_S", Quantity::new(regime.q_s, "1"));
        out.put("exchange_ratio", Quantity::new(regime.exchange_ratio, "1"));
        out.put("radius_relative_gap", Quantity::new(regime.relative_gap, "1"));
        out.flag("equal_radius_regime", regime.in_regime);
        out.flag("radii_equal", regime.radii_equal);
        if p.Z_cm3.is_some() {
            let cage = cage_rates(l_ss, l_tt, l_st, &dp)?;
            out.put("k_SS_per_s", Quantity::new(cage.k_ss, "s^-1"));
            out.put("k_TT_per_s", Quantity::new(cage.k_tt, "s^-1"));
            out.put("k_ST_per_s", Quantity::new(cage.k_st, "s^-1"));
            match ReactionModel::from_rate_elements(&cage) {
                Ok(m) => {
                    k_hat = build_k(&m);
                    out.flag("cage_rates_consistent", true);
                }
                Err(_) => out.flag("cage_rates_consistent", false),
            }
        }
    } else if radii_inputs != (None, None, None) {
        return Err(CliError::validation("reaction radii need lambda0_cm, kappa0_S_per_s and kappa0_T_per_s"));
    }
    if p.Z_cm3.is_some() && radii_inputs.0.is_none() {
        return Err(CliError::validation("Z_cm3 needs the reaction-radius inputs"));
    }
    out.validity = Some(validity_of(&k_hat, p.tau_c_s)?);
    Ok(out)
}

pub fn oracle(p: &OracleParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let tau = p.tau_c_s;
    let process = NoiseProcess::new(
        p.noise_kind,
        p.variance_rad2_per_s2,
        tau,
        seed,
        p.dt_s.unwrap_or(tau * MAX_DT_FRACTION),
    )?;
    let cfg = EnsembleConfig {
        n_traj: p.n_traj,
        t_total: p.t_total_s.unwrap_or(100.0 * tau),
        n_samples: p.n_samples,
        n_batches: p.n_batches,
    };
    let avg = perturbative_amplitudes(&process, p.omega0_rad_per_s, p.omega_s_rad_per_s, &cfg)?;
    let mut out = ScenarioOutput::default();
    let rates = if p.closed_loop {
        let report = closed_loop_from(&process, &avg, p.n_bootstrap)?;
        out.put("spectrum_at_omega_s_per_s", Quantity::new(report.spectrum_at_omega_s, "s^-1"));
        out.put("w11_assembled_per_s", Quantity::new(report.w11_assembled, "s^-1"));
        out.put("closed_loop_relative_gap", Quantity::new(report.relative_gap, "1"));
        out.flag("closed_loop_agree", report.agree);
        out.validity = Some(Validity::new(report.validity, tau));
        report.rates
    } else {
        let analytic = SpectralDensity::lorentzian(p.variance_rad2_per_s2, tau)?;
        let r = oracle_relaxation(&analytic, p.omega0_rad_per_s, p.omega_s_rad_per_s)?;
        out.validity = Some(validity_of(&r, tau)?);
        extract_rates(&avg, p.n_bootstrap, seed)?
    };
    out.put("w11_per_s", Quantity::with_error(rates.w11, rates.w11_err, "s^-1"));
    out.put(
        "w11_perturbative_per_s",
        Quantity::with_error(rates.w11_perturbative, rates.w11_perturbative_err, "s^-1"),
    );
    out.put("w01_per_s", Quantity::with_error(rates.w01, rates.w01_err, "s^-1"));
    out.put("ratio_w01_w11", Quantity::with_error(rates.ratio, rates.ratio_err, "1"));
    out.put("ratio_ci_low", Quantity::new(rates.ratio_ci[0], "1"));
    out.put("ratio_ci_high", Quantity::new(rates.ratio_ci[1], "1"));
    out.put("phase_rate_rad_per_s", Quantity::new(rates.phase_rate, "rad/s"));
    out.put(
        "expected_phase_rate_rad_per_s",
        Quantity::new(p.omega0_rad_per_s - 0.5 * p.omega_s_rad_per_s, "rad/s"),
    );
    out.put("analytic_w11_per_s", Quantity::new(process.analytic_spectrum(p.omega_s_rad_per_s), "s^-1"));
    out.put("window_start_s", Quantity::new(rates.window[0], "s"));
    out.put("window_end_s", Quantity::new(rates.window[1], "s"));
    out.put("n_traj", Quantity::new(rates.n_traj as f64, "count"));
    out.flag("half_rate_law", (rates.ratio - 0.5).abs() + 2.0 * rates.ratio_err <= HALF_RATE_TOL);

    let m = avg.means();
    let columns = ["t_s", "rho_11_rel", "rho_22_rel", "abs_rho_01_rel", "two_re_delta_a", "norm"];
    let rows = (0..m.times.len())
        .map(|k| {
            [m.times[k], m.pop_one[k], m.pop_two[k], m.coherence[k].norm(), 2.0 * m.delta_a[k].re, m.norm[k]]
                .into_iter()
                .map(Cell::Num)
                .collect()
        })
        .collect();
    out.table = Some(Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows });
    Ok(out)
}
