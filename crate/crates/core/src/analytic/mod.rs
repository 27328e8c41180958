//! Closed-form packets of the damped transversal wave.
//!
//! The y factor is the breathing oscillator packet carrying the global decay
//! `exp(-4 lambda t)`; the x factor is either the spreading Gaussian or the
//! non-spreading Airy wave train. The oscillator density carries the
//! `1/(sigma sqrt 2)` prefactor, so its y-integral is
//! `sqrt(pi) exp(-4 lambda t)`.
//!
//! Wavefunctions come with analytic time derivatives (`*_rate`) so that the
//! state-equation residual can be formed without finite differencing in time.

pub mod airy;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{AiryAperture, AiryPacketSpec, AiryPhase, GaussianPacketSpec, Grid1D, MediumParams, OscillatorPacketSpec};

pub use airy::{airy_ai, airy_ai_pair, airy_ai_prime, AiryEval};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `sigma_y^2(t) = hbar / (2 gamma m omega) [cos^2(omega t) + gamma^2 sin^2(omega t)]`.
pub fn oscillator_sigma2(t: f64, p: &MediumParams, s: &OscillatorPacketSpec) -> f64 {
    let (sn, cs) = (p.omega * t).sin_cos();
    p.hbar / (2.0 * s.gamma * p.m * p.omega) * (cs * cs + s.gamma * s.gamma * sn * sn)
}

/// Damped oscillator packet density, including the decay `exp(-4 lambda t)`.
pub fn oscillator_density(y: f64, t: f64, p: &MediumParams, s: &OscillatorPacketSpec) -> f64 {
    let sigma2 = oscillator_sigma2(t, p, s);
    let d = y - s.y0 * (p.omega * t).cos();
    (-d * d / (2.0 * sigma2)).exp() / (sigma2.sqrt() * 2f64.sqrt()) * (-4.0 * p.lambda * t).exp()
}

/// Undamped coherent state (gamma = 1) whose modulus squared reproduces the
/// oscillator density with `lambda = 0`. Centre `y0 cos(omega t)`, momentum
/// `-m omega y0 sin(omega t)`, width `sigma^2 = hbar / (2 m omega)`.
pub fn coherent_oscillator_wavefunction(y: f64, t: f64, p: &MediumParams, s: &OscillatorPacketSpec) -> Result<Complex64> {
    Ok(coherent_rate(y, t, p, s)?.0)
}

/// `(phi, d phi / dt)` for the coherent oscillator state.
pub fn coherent_rate(y: f64, t: f64, p: &MediumParams, s: &OscillatorPacketSpec) -> Result<(Complex64, Complex64)> {
    if s.gamma != 1.0 {
        return Err(Error::CoherentGamma(s.gamma));
    }
    let (w, m, hbar) = (p.omega, p.m, p.hbar);
    let sigma2 = hbar / (2.0 * m * w);
    let (sn, cs) = (w * t).sin_cos();
    let yc = s.y0 * cs;
    let pc = -m * w * s.y0 * sn;
    let yc_dot = pc / m;
    let pc_dot = -m * w * w * yc;
    let d = y - yc;
    let amp = (1.0 / (sigma2.sqrt() * 2f64.sqrt())).sqrt();
    let log_phi = Complex64::new(-d * d / (4.0 * sigma2), pc * (y - 0.5 * yc) / hbar - 0.5 * w * t);
    let phi = amp * log_phi.exp();
    let rate = Complex64::new(d * yc_dot / (2.0 * sigma2), (pc_dot * (y - 0.5 * yc) - 0.5 * pc * yc_dot) / hbar - 0.5 * w);
    Ok((phi, rate * phi))
}

/// Free Gaussian packet. With `phase_completed` the Galilean drift phase
/// `exp[i m vx (x - vx t / 2) / hbar]` is included; without it the packet
/// only solves the free equation for `vx = 0`.
pub fn gaussian_wavefunction(x: f64, t: f64, p: &MediumParams, s: &GaussianPacketSpec) -> Complex64 {
    gaussian_rate(x, t, p, s).0
}

/// `(psi, d psi / dt)` for the free Gaussian packet.
pub fn gaussian_rate(x: f64, t: f64, p: &MediumParams, s: &GaussianPacketSpec) -> (Complex64, Complex64) {
    let (m, hbar, a, v) = (p.m, p.hbar, s.a, s.vx);
    let c1 = 4.0 * hbar / (m * a);
    let c2 = 4.0 * hbar / m;
    let u = x - v * t;
    let width = Complex64::new(a, c1 * t);
    let denom = Complex64::new(a * a, c2 * t);
    let mut log_psi = -2.0 * u * u / denom;
    let mut rate = -0.5 * I * c1 / width + 4.0 * v * u / denom + 2.0 * u * u * I * c2 / (denom * denom);
    if s.phase_completed {
        log_psi += I * (m * v * (x - 0.5 * v * t) / hbar);
        rate -= I * (m * v * v / (2.0 * hbar));
    }
    let psi = (4.0 / PI).powf(0.25) / width.sqrt() * log_psi.exp();
    (psi, rate * psi)
}

/// `s^2(t) = a^2 + 16 hbar^2 t^2 / (m^2 a^2)`; the density variance is `s^2 / 8`.
pub fn gaussian_width2(t: f64, p: &MediumParams, s: &GaussianPacketSpec) -> f64 {
    s.a * s.a + 16.0 * p.hbar * p.hbar * t * t / (p.m * p.m * s.a * s.a)
}

pub fn gaussian_density(x: f64, t: f64, p: &MediumParams, s: &GaussianPacketSpec) -> f64 {
    let s2 = gaussian_width2(t, p, s);
    let u = x - s.vx * t;
    (4.0 / PI).sqrt() / s2.sqrt() * (-4.0 * u * u / s2).exp()
}

/// Scale `B / hbar^(2/3)` of the Airy argument.
pub fn airy_scale(p: &MediumParams, s: &AiryPacketSpec) -> f64 {
    s.b / p.hbar.powf(2.0 / 3.0)
}

/// Ballistic offset `B^3 t^2 / (4 m^2)` of the Airy profile.
pub fn airy_deflection(t: f64, p: &MediumParams, s: &AiryPacketSpec) -> f64 {
    s.b.powi(3) * t * t / (4.0 * p.m * p.m)
}

/// Argument of Ai at (x, t).
pub fn airy_argument(x: f64, t: f64, p: &MediumParams, s: &AiryPacketSpec) -> f64 {
    airy_scale(p, s) * (x - airy_deflection(t, p, s))
}

pub fn airy_wavefunction(x: f64, t: f64, p: &MediumParams, s: &AiryPacketSpec) -> Complex64 {
    let phase = s.b.powi(3) * t / (2.0 * p.m * p.hbar) * (x - airy_phase_offset(t, p, s).0);
    airy_ai(airy_argument(x, t, p, s)) * Complex64::from_polar(1.0, phase)
}

/// `(C(t), dC/dt)` for the offset inside the Airy phase.
fn airy_phase_offset(t: f64, p: &MediumParams, s: &AiryPacketSpec) -> (f64, f64) {
    let (b, m2) = (s.b, p.m * p.m);
    match s.phase_variant {
        AiryPhase::AsPrinted => (b * b * t.powi(3) / (6.0 * m2), b * b * t * t / (2.0 * m2)),
        AiryPhase::BerryBalazs => (b.powi(3) * t * t / (6.0 * m2), b.powi(3) * t / (3.0 * m2)),
    }
}

/// `(psi, d psi / dt)` for the Airy wave train.
pub fn airy_rate(x: f64, t: f64, p: &MediumParams, s: &AiryPacketSpec) -> (Complex64, Complex64) {
    let b3 = s.b.powi(3);
    let (c, c_dot) = airy_phase_offset(t, p, s);
    let k = b3 / (2.0 * p.m * p.hbar);
    let phase = Complex64::from_polar(1.0, k * t * (x - c));
    let (ai, aip) = airy_ai_pair(airy_argument(x, t, p, s));
    let xi_dot = -airy_scale(p, s) * b3 * t / (2.0 * p.m * p.m);
    let theta_dot = k * (x - c) - k * t * c_dot;
    let psi = ai * phase;
    (psi, (aip * xi_dot + I * theta_dot * ai) * phase)
}

/// Aperture weight for the Airy profile: 1 on the decaying side and the
/// first `(1 - taper_fraction) * length` argument units of the oscillatory
/// side, a half-cosine roll-off over the remaining `taper_fraction * length`,
/// and 0 beyond.
pub fn airy_aperture_weight(xi: f64, aperture: &AiryAperture) -> f64 {
    let start = -aperture.length * (1.0 - aperture.taper_fraction);
    let end = -aperture.length;
    if xi >= start {
        1.0
    } else if xi <= end {
        0.0
    } else {
        0.5 * (1.0 + (PI * (start - xi) / (start - end)).cos())
    }
}

/// Apertured Airy state at t = 0, the finite-energy stand-in for the
/// non-normalizable wave train.
pub fn windowed_airy(x: f64, p: &MediumParams, s: &AiryPacketSpec, aperture: &AiryAperture) -> Complex64 {
    let xi = airy_argument(x, 0.0, p, s);
    Complex64::new(airy_ai(xi) * airy_aperture_weight(xi, aperture), 0.0)
}

/// Spreading-branch product density `rho(y, t) * varrho(x, t)`.
pub fn full_density_gaussian(
    y: f64,
    x: f64,
    t: f64,
    p: &MediumParams,
    osc: &OscillatorPacketSpec,
    gauss: &GaussianPacketSpec,
) -> f64 {
    oscillator_density(y, t, p, osc) * gaussian_density(x, t, p, gauss)
}

/// Non-spreading-branch product density `rho(y, t) * Ai^2`.
pub fn full_density_airy(y: f64, x: f64, t: f64, p: &MediumParams, osc: &OscillatorPacketSpec, airy: &AiryPacketSpec) -> f64 {
    let a = airy_ai(airy_argument(x, t, p, airy));
    oscillator_density(y, t, p, osc) * a * a
}

/// Exact solution of the full damped state equation:
/// coherent oscillator x phase-completed Gaussian x `exp(-2 lambda t)`.
pub fn product_rate(
    y: f64,
    x: f64,
    t: f64,
    p: &MediumParams,
    osc: &OscillatorPacketSpec,
    gauss: &GaussianPacketSpec,
) -> Result<(Complex64, Complex64)> {
    let (phi, phi_t) = coherent_rate(y, t, p, osc)?;
    let g = GaussianPacketSpec {
        phase_completed: true,
        ..*gauss
    };
    let (psi, psi_t) = gaussian_rate(x, t, p, &g);
    let decay = (-2.0 * p.lambda * t).exp();
    let value = phi * psi * decay;
    Ok((value, (phi_t * psi + phi * psi_t) * decay - 2.0 * p.lambda * value))
}

pub fn sample(grid: &Grid1D, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    grid.points().into_iter().map(f).collect()
}
