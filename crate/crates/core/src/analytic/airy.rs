//! Airy function of the first kind and its derivative on the real line.
//!
//! Maclaurin series for `|x| <= 6` and the standard asymptotic expansions
//! (DLMF 9.7.5, 9.7.6, 9.7.9, 9.7.10) beyond, truncated at their smallest
//! term. At the switchover the series loses about 1e-13 to cancellation and
//! the oscillatory expansion is good to about 3e-11, so the absolute error
//! stays below 1e-10 everywhere.

use std::f64::consts::{FRAC_PI_4, PI};

/// Ai(0) = 3^(-2/3) / Gamma(2/3).
pub const AI_ZERO: f64 = 0.355_028_053_887_817_2;
/// -Ai'(0) = 3^(-1/3) / Gamma(1/3).
const AIP_ZERO: f64 = 0.258_819_403_792_806_8;

/// Arguments with `|x|` above this use the asymptotic expansions.
pub const SERIES_LIMIT: f64 = 6.0;

const MAX_TERMS: usize = 200;

/// A sampled value of `Ai`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryEval {
    pub argument: f64,
    pub value: f64,
}

impl AiryEval {
    pub fn at(argument: f64) -> Self {
        AiryEval {
            argument,
            value: airy_ai(argument),
        }
    }
}

pub fn airy_ai(x: f64) -> f64 {
    if x.is_nan() {
        f64::NAN
    } else if x > SERIES_LIMIT {
        asymptotic_positive(x).0
    } else if x < -SERIES_LIMIT {
        asymptotic_negative(-x).0
    } else {
        series(x).0
    }
}

/// Derivative `Ai'(x)`.
pub fn airy_ai_prime(x: f64) -> f64 {
    if x.is_nan() {
        f64::NAN
    } else if x > SERIES_LIMIT {
        asymptotic_positive(x).1
    } else if x < -SERIES_LIMIT {
        asymptotic_negative(-x).1
    } else {
        series(x).1
    }
}

/// `(Ai(x), Ai'(x))` in one call.
pub fn airy_ai_pair(x: f64) -> (f64, f64) {
    if x > SERIES_LIMIT {
        asymptotic_positive(x)
    } else if x < -SERIES_LIMIT {
        asymptotic_negative(-x)
    } else {
        series(x)
    }
}

/// Ai = c1 f - c2 g with
/// f = sum x^{3k} / prod_{j<=k} (3j-1)(3j),
/// g = sum x^{3k+1} / prod_{j<=k} (3j)(3j+1).
fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut ft) = (1.0, 1.0);
    let (mut g, mut gt) = (x, x);
    let (mut fp, mut fpt) = (0.0, 0.0);
    let (mut gp, mut gpt) = (1.0, 1.0);
    for k in 1..MAX_TERMS {
        let k3 = (3 * k) as f64;
        ft *= x3 / ((k3 - 1.0) * k3);
        gt *= x3 / (k3 * (k3 + 1.0));
        fpt = if k == 1 { 0.5 * x * x } else { fpt * x3 / ((k3 - 1.0) * (k3 - 3.0)) };
        gpt *= x3 / (k3 * (k3 - 2.0));
        f += ft;
        g += gt;
        fp += fpt;
        gp += gpt;
        let small = |t: f64, s: f64| t.abs() <= 1e-17 * s.abs().max(1e-300);
        if small(ft, f) && small(gt, g) && small(fpt, fp) && small(gpt, gp) {
            break;
        }
    }
    (AI_ZERO * f - AIP_ZERO * g, AI_ZERO * fp - AIP_ZERO * gp)
}

/// Coefficients u_k (DLMF 9.7.2) and v_k = -(6k+1)/(6k-1) u_k.
fn coefficients() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(40);
        let mut u = 1.0;
        out.push((1.0, 1.0));
        for k in 1..40 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            out.push((u, -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u));
        }
        out
    })
}

/// Sums `sum_k (-1)^k c_k / zeta^k` with `c` selected by `pick`, stopping at
/// the smallest term.
fn alternating(zeta: f64, pick: impl Fn(&(f64, f64)) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut power = 1.0;
    for (k, c) in coefficients().iter().enumerate() {
        let term = pick(c) / power;
        if term.abs() >= prev {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
        prev = term.abs();
        if prev < 1e-17 * sum.abs() {
            break;
        }
        power *= zeta;
    }
    sum
}

/// Even/odd split `(sum_k (-1)^k c_{2k} / zeta^{2k}, sum_k (-1)^k c_{2k+1} / zeta^{2k+1})`.
fn split(zeta: f64, pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let table = coefficients();
    let (mut even, mut odd) = (0.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut power = 1.0;
    for (k, c) in table.iter().enumerate() {
        let term = pick(c) / power;
        if term.abs() >= prev {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        prev = term.abs();
        if prev < 1e-17 {
            break;
        }
        power *= zeta;
    }
    (even, odd)
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    let ai = e / q * alternating(zeta, |c| c.0);
    let aip = -e * q * alternating(zeta, |c| c.1);
    (ai, aip)
}

fn asymptotic_negative(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let q = z.powf(0.25);
    let (ue, uo) = split(zeta, |c| c.0);
    let (ve, vo) = split(zeta, |c| c.1);
    let ai = (c * ue + s * uo) / (PI.sqrt() * q);
    let aip = q / PI.sqrt() * (s * ve - c * vo);
    (ai, aip)
}
