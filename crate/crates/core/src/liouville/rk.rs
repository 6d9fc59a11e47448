//! Adaptive Dormand–Prince 5(4) integration of `ẋ = 𝓛x`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, max_steps: 5_000_000 }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type CVec = DVector<Complex64>;

fn axpy(x: &CVec, terms: &[(f64, &CVec)], h: f64) -> CVec {
    let mut out = x.clone();
    for &(c, k) in terms {
        if c != 0.0 {
            out.axpy(Complex64::new(h * c, 0.0), k, Complex64::new(1.0, 0.0));
        }
    }
    out
}

/// Integrates from `t = 0` and records the state at each requested time.
/// Times must be non-negative and strictly increasing.
pub fn integrate(
    gen: &DMatrix<Complex64>,
    x0: &CVec,
    times: &[f64],
    opts: &RkOptions,
) -> Result<Vec<CVec>> {
    let scale = gen.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut x = x0.clone();
    let mut h = if scale > 0.0 { 0.01 / scale } else { times.last().copied().unwrap_or(1.0) };
    let mut k1 = gen * &x;
    let mut steps = 0usize;

    for &target in times {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.max(target).max(f64::MIN_POSITIVE) && !last {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }

            let k2 = gen * axpy(&x, &[(A21, &k1)], step);
            let k3 = gen * axpy(&x, &[(A31, &k1), (A32, &k2)], step);
            let k4 = gen * axpy(&x, &[(A41, &k1), (A42, &k2), (A43, &k3)], step);
            let k5 = gen * axpy(&x, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step);
            let k6 = gen * axpy(&x, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], step);
            let x_new = axpy(&x, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
            let k7 = gen * &x_new;
            let err = axpy(
                &CVec::zeros(x.len()),
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                step,
            );

            let err_norm = err
                .iter()
                .zip(x.iter().zip(x_new.iter()))
                .map(|(e, (a, b))| {
                    let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
                    (e.norm() / sc).powi(2)
                })
                .sum::<f64>()
                .sqrt()
                / (x.len() as f64).sqrt();
            if !err_norm.is_finite() {
                return Err(Error::NonFinite("Runge-Kutta state"));
            }
            steps += 1;

            if err_norm <= 1.0 {
                t = if last { target } else { t + step };
                x = x_new;
                k1 = k7;
            }
            let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            h = if last && err_norm <= 1.0 { h.max(proposed) } else { proposed };
            if h < 1e-300 {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay() {
        let gen = DMatrix::from_element(1, 1, Complex64::new(-2.0, 3.0));
        let x0 = CVec::from_element(1, Complex64::new(1.0, 0.0));
        let times = [0.0, 0.1, 1.0, 2.5];
        let xs = integrate(&gen, &x0, &times, &RkOptions::default()).unwrap();
        for (t, x) in times.iter().zip(&xs) {
            let exact = (Complex64::new(-2.0, 3.0) * t).exp();
            assert!((x[0] - exact).norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn zero_generator_is_constant() {
        let gen = DMatrix::zeros(2, 2);
        let x0 = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let xs = integrate(&gen, &x0, &[0.0, 5.0], &RkOptions::default()).unwrap();
        assert_eq!(xs[1], x0);
    }

    #[test]
    fn step_budget_exhaustion_reports_underflow() {
        let gen = DMatrix::from_element(1, 1, Complex64::new(0.0, 1e6));
        let x0 = CVec::from_element(1, Complex64::new(1.0, 0.0));
        let opts = RkOptions { max_steps: 10, ..RkOptions::default() };
        assert!(matches!(integrate(&gen, &x0, &[100.0], &opts), Err(Error::StepSizeUnderflow { .. })));
    }
}
