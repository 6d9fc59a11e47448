//! Dense complex matrix exponential by scaling and squaring with diagonal
//! Padé approximants of order 3, 5, 7, 9 or 13, chosen from the 1-norm
//! (Higham 2005 backward-error thresholds).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

type CMat = DMatrix<Complex64>;

fn one_norm(a: &CMat) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let norm = one_norm(a);
    let ident = CMat::identity(n, n);
    if norm == 0.0 {
        return Ok(ident);
    }

    for &(order, theta) in &THETA {
        if norm <= theta {
            let (u, v) = low_order_uv(a, order, &ident);
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a * real(2f64.powi(-s));
    let (u, v) = order13_uv(&scaled, &ident);
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn low_order_uv(a: &CMat, order: usize, ident: &CMat) -> (CMat, CMat) {
    let b: &[f64] = match order {
        3 => &PADE_3,
        5 => &PADE_5,
        7 => &PADE_7,
        _ => &PADE_9,
    };
    let a2 = a * a;
    let mut powers = vec![ident.clone(), a2.clone()];
    for _ in 2..=order / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = CMat::zeros(a.nrows(), a.ncols());
    let mut v = CMat::zeros(a.nrows(), a.ncols());
    for (k, p) in powers.iter().enumerate() {
        u_inner += p * real(b[2 * k + 1]);
        v += p * real(b[2 * k]);
    }
    (a * u_inner, v)
}

fn order13_uv(a: &CMat, ident: &CMat) -> (CMat, CMat) {
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_high = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]));
    let u = a * (u_high + &a6 * real(b[7]) + &a4 * real(b[5]) + &a2 * real(b[3]) + ident * real(b[1]));
    let v_high = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]));
    let v = v_high + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + ident * real(b[0]);
    (u, v)
}

fn solve_pade(u: &CMat, v: &CMat) -> Result<CMat> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::Singular("Padé denominator"))
}
