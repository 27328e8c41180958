//! Spectral grid operators for the damped state equation
//!
//! ```text
//! -(hbar^2/2m) psi_yy + (m omega^2 y^2 / 2) psi + (hbar/i) psi_t
//!     - (hbar^2/2m) psi_xx + 2 lambda (hbar/i) psi = 0
//! ```
//!
//! on a periodic lattice. The time-derivative term appears once.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{airy_argument, airy_rate, gaussian_rate, product_rate};
use crate::error::{Error, Result};
use crate::model::{AiryPacketSpec, AiryPhase, Axis, ComplexField, GaussianPacketSpec, Grid1D, Grid2D, MediumParams, ScenarioConfig};
use crate::spectral::{Spectral1D, Spectral2D};

/// Boundary amplitude (relative to the peak) above which a field is not
/// treated as periodic-representable.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Default relative residual budget for the certified families.
pub const RESIDUAL_BUDGET: f64 = 1e-5;

/// Residual above which an as-printed form is flagged.
pub const FLAG_THRESHOLD: f64 = 1e-2;

const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

fn warn_leakage(f: &ComplexField, what: &str) {
    let ratio = f.boundary_ratio();
    if ratio >= LEAKAGE_THRESHOLD {
        log::warn!("{what}: boundary amplitude ratio {ratio:.3e} exceeds {LEAKAGE_THRESHOLD:.0e}; periodic derivatives are unreliable");
    }
}

/// `d^order f / d axis^order` by the Fourier multiplier `(i k)^order`.
pub fn spectral_derivative(f: &ComplexField, axis: Axis, order: u32) -> ComplexField {
    warn_leakage(f, "spectral_derivative");
    let spectral = Spectral2D::new(*f.grid());
    let values = spectral.derivative(f.values(), axis, order);
    ComplexField::new(*f.grid(), values, f.t()).expect("derivative keeps the grid")
}

/// Maximum of `|[P2, Q2] f - (hbar/i) f| / (hbar max|f|)` over the fields,
/// with `P2 = (hbar/i) d/d axis` and `Q2` multiplication by the coordinate.
///
/// On the x axis the canonical coordinate `Q2x` is the zero operator, so the
/// commutator and the check are identically zero.
pub fn commutator_check_p2q2(fields: &[ComplexField], axis: Axis, hbar: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for f in fields {
        warn_leakage(f, "commutator_check_p2q2");
        let scale = hbar * f.max_abs();
        if scale == 0.0 || axis == Axis::X {
            continue;
        }
        let grid = *f.grid();
        let spectral = Spectral2D::new(grid);
        let nx = grid.x.n();
        let coord = |i: usize| grid.y.point(i / nx);
        let qf: Vec<Complex64> = f.values().iter().enumerate().map(|(i, z)| z * coord(i)).collect();
        let p_qf = spectral.derivative(&qf, Axis::Y, 1);
        let p_f = spectral.derivative(f.values(), Axis::Y, 1);
        for (i, z) in f.values().iter().enumerate() {
            let commutator = MINUS_I * hbar * (p_qf[i] - coord(i) * p_f[i]);
            worst = worst.max((commutator - MINUS_I * hbar * z).norm() / scale);
        }
    }
    worst
}

/// The damped state-equation operator on a fixed lattice.
#[derive(Clone)]
pub struct StateEquationOperator {
    medium: MediumParams,
    grid: Grid2D,
    /// `m omega^2 y^2 / 2` per y row, or zeros when the potential is off.
    potential: Vec<f64>,
    spectral: Spectral2D,
}

impl fmt::Debug for StateEquationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateEquationOperator")
            .field("medium", &self.medium)
            .field("grid", &self.grid)
            .field("potential_on", &self.has_potential())
            .finish()
    }
}

impl StateEquationOperator {
    pub fn new(medium: MediumParams, grid: Grid2D) -> Result<Self> {
        medium.validate()?;
        let potential = grid
            .y
            .points()
            .into_iter()
            .map(|y| 0.5 * medium.m * medium.omega * medium.omega * y * y)
            .collect();
        Ok(StateEquationOperator {
            medium,
            grid,
            potential,
            spectral: Spectral2D::new(grid),
        })
    }

    /// Same operator with the oscillator potential switched off.
    pub fn without_potential(medium: MediumParams, grid: Grid2D) -> Result<Self> {
        let mut op = Self::new(medium, grid)?;
        op.potential.iter_mut().for_each(|v| *v = 0.0);
        Ok(op)
    }

    pub fn medium(&self) -> &MediumParams {
        &self.medium
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn has_potential(&self) -> bool {
        self.potential.iter().any(|&v| v != 0.0)
    }

    pub(crate) fn spectral(&self) -> &Spectral2D {
        &self.spectral
    }

    fn check_grid(&self, f: &ComplexField) -> Result<()> {
        if *f.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Hermitian part `-(hbar^2/2m) (psi_xx + psi_yy) + V psi`.
    pub fn hamiltonian(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.check_grid(psi)?;
        let c = -self.medium.hbar * self.medium.hbar / (2.0 * self.medium.m);
        let dxx = self.spectral.derivative(psi.values(), Axis::X, 2);
        let dyy = self.spectral.derivative(psi.values(), Axis::Y, 2);
        let nx = self.grid.x.n();
        let values = psi
            .values()
            .iter()
            .enumerate()
            .map(|(i, z)| c * (dxx[i] + dyy[i]) + self.potential[i / nx] * z)
            .collect();
        ComplexField::new(self.grid, values, psi.t())
    }

    /// Dissipative part `2 lambda (hbar/i) psi`.
    pub fn damping_term(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.check_grid(psi)?;
        let c = MINUS_I * (2.0 * self.medium.lambda * self.medium.hbar);
        let values = psi.values().iter().map(|z| c * z).collect();
        ComplexField::new(self.grid, values, psi.t())
    }
}

/// Source of `psi_t` for [`apply_state_equation`].
#[derive(Clone, Copy, Debug)]
pub enum TimeDerivative<'a> {
    /// Exact `psi_t` sampled on the same grid.
    Analytic(&'a ComplexField),
    /// Snapshots at `t - 2h, t - h, t + h, t + 2h`, combined by the
    /// fourth-order central difference.
    Stencil { samples: &'a [ComplexField], step: f64 },
}

impl TimeDerivative<'_> {
    fn resolve(&self, grid: &Grid2D) -> Result<Vec<Complex64>> {
        match *self {
            TimeDerivative::Analytic(f) => {
                if f.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(f.values().to_vec())
            }
            TimeDerivative::Stencil { samples, step } => {
                if samples.len() != 4 {
                    return Err(Error::MissingTimeDerivative(format!("stencil needs 4 snapshots, got {}", samples.len())));
                }
                if !(step.is_finite() && step > 0.0) {
                    return Err(Error::MissingTimeDerivative(format!("stencil step must be > 0, got {step}")));
                }
                if samples.iter().any(|s| s.grid() != grid) {
                    return Err(Error::GridMismatch);
                }
                let w = [1.0, -8.0, 8.0, -1.0];
                let scale = 1.0 / (12.0 * step);
                Ok((0..grid.len())
                    .map(|i| samples.iter().zip(w).map(|(s, c)| c * s.values()[i]).sum::<Complex64>() * scale)
                    .collect())
            }
        }
    }
}

/// Samples the left-hand side of the damped state equation. Zero for an
/// exact solution.
pub fn apply_state_equation(psi: &ComplexField, op: &StateEquationOperator, psi_t: TimeDerivative<'_>) -> Result<ComplexField> {
    warn_leakage(psi, "apply_state_equation");
    let rate = psi_t.resolve(op.grid())?;
    let mut out = op.hamiltonian(psi)?;
    let damping = op.damping_term(psi)?;
    let hbar = op.medium().hbar;
    for ((o, d), r) in out.values_mut().iter_mut().zip(damping.values()).zip(&rate) {
        *o += MINUS_I * hbar * r + d;
    }
    Ok(out)
}

/// `|psi(x, y)|^2` along x at an arbitrary `y`, by band-limited
/// interpolation in y.
pub fn density_at_plane_y(psi: &ComplexField, y: f64) -> Vec<f64> {
    Spectral2D::new(*psi.grid()).interpolate_y(psi.values(), y).iter().map(|z| z.norm_sqr()).collect()
}

/// `(hbar/i) psi_t - (hbar^2/2m) psi_xx` for a 1-D free packet.
pub fn free_residual_1d(spectral: &Spectral1D, psi: &[Complex64], psi_t: &[Complex64], medium: &MediumParams) -> Vec<Complex64> {
    let dxx = spectral.derivative(psi, 2);
    let c = medium.hbar * medium.hbar / (2.0 * medium.m);
    psi_t.iter().zip(dxx).map(|(r, d)| MINUS_I * medium.hbar * r - c * d).collect()
}

/// C-infinity step: 0 for `u <= 0`, 1 for `u >= 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Window for the Airy residual: 0 on the leftmost eighth of the grid, a
/// smooth rise over the next eighth, 1 beyond. The Airy tail decays on the
/// right without help.
pub fn airy_residual_window(grid: &Grid1D, x: f64) -> f64 {
    let ramp = grid.length() / 8.0;
    smooth_step((x - grid.min() - ramp) / ramp)
}

/// Solution families certified by the residual oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualFamily {
    GaussianPrinted,
    GaussianPhaseCompleted,
    AiryAsPrinted,
    AiryBerryBalazs,
    FullProduct,
}

impl ResidualFamily {
    pub const ALL: [ResidualFamily; 5] = [
        ResidualFamily::GaussianPrinted,
        ResidualFamily::GaussianPhaseCompleted,
        ResidualFamily::AiryAsPrinted,
        ResidualFamily::AiryBerryBalazs,
        ResidualFamily::FullProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidualFamily::GaussianPrinted => "gaussian_printed",
            ResidualFamily::GaussianPhaseCompleted => "gaussian_phase_completed",
            ResidualFamily::AiryAsPrinted => "airy_as_printed",
            ResidualFamily::AiryBerryBalazs => "airy_berry_balazs",
            ResidualFamily::FullProduct => "full_product",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    fn airy_phase(self) -> Option<AiryPhase> {
        match self {
            ResidualFamily::AiryAsPrinted => Some(AiryPhase::AsPrinted),
            ResidualFamily::AiryBerryBalazs => Some(AiryPhase::BerryBalazs),
            _ => None,
        }
    }

    /// Families expected to satisfy their equation.
    pub fn is_certified(self, selected_airy: AiryPhase) -> bool {
        match self {
            ResidualFamily::GaussianPrinted => false,
            ResidualFamily::GaussianPhaseCompleted | ResidualFamily::FullProduct => true,
            f => f.airy_phase() == Some(selected_airy),
        }
    }
}

impl fmt::Display for ResidualFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One line of a residual report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub family: ResidualFamily,
    pub t: f64,
    /// `||residual|| / ||psi||` on the evaluation region.
    pub residual: f64,
    pub grid_n: usize,
    /// Step of the time-difference stencil; 0 when `psi_t` is analytic.
    pub dt_res: f64,
    pub flag: Option<String>,
}

fn relative_norm(residual: impl Iterator<Item = Complex64>, psi: impl Iterator<Item = Complex64>) -> f64 {
    let num: f64 = residual.map(|z| z.norm_sqr()).sum();
    let den: f64 = psi.map(|z| z.norm_sqr()).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn gaussian_residual(cfg: &ScenarioConfig, spec: &GaussianPacketSpec, t: f64) -> f64 {
    let grid = cfg.grid.x;
    let (psi, rate): (Vec<_>, Vec<_>) = grid.points().into_iter().map(|x| gaussian_rate(x, t, &cfg.medium, spec)).unzip();
    let r = free_residual_1d(&Spectral1D::new(grid), &psi, &rate, &cfg.medium);
    relative_norm(r.into_iter(), psi.into_iter())
}

fn airy_residual(cfg: &ScenarioConfig, spec: &AiryPacketSpec, t: f64) -> f64 {
    let grid = cfg.grid.x;
    let points = grid.points();
    let window: Vec<f64> = points.iter().map(|&x| airy_residual_window(&grid, x)).collect();
    let (psi, rate): (Vec<_>, Vec<_>) = points
        .iter()
        .zip(&window)
        .map(|(&x, &w)| {
            let (p, r) = airy_rate(x, t, &cfg.medium, spec);
            (p * w, r * w)
        })
        .unzip();
    let edge = psi.last().map_or(0.0, |z| z.norm()) / psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if edge >= LEAKAGE_THRESHOLD {
        log::warn!(
            "airy residual at t = {t}: right edge (argument {:.1}) carries {edge:.1e} of the peak",
            airy_argument(grid.max(), t, &cfg.medium, spec)
        );
    }
    let r = free_residual_1d(&Spectral1D::new(grid), &psi, &rate, &cfg.medium);
    let inside = |i: &usize| window[*i] == 1.0;
    relative_norm(
        (0..grid.n()).filter(inside).map(|i| r[i]),
        (0..grid.n()).filter(inside).map(|i| psi[i]),
    )
}

fn product_residual(cfg: &ScenarioConfig, op: &StateEquationOperator, t: f64) -> Result<f64> {
    let grid = cfg.grid;
    let mut psi = Vec::with_capacity(grid.len());
    let mut rate = Vec::with_capacity(grid.len());
    for y in grid.y.points() {
        for x in grid.x.points() {
            let (p, r) = product_rate(y, x, t, &cfg.medium, &cfg.oscillator, &cfg.gaussian)?;
            psi.push(p);
            rate.push(r);
        }
    }
    let psi = ComplexField::new(grid, psi, t)?;
    let rate = ComplexField::new(grid, rate, t)?;
    let r = apply_state_equation(&psi, op, TimeDerivative::Analytic(&rate))?;
    Ok(relative_norm(r.values().iter().copied(), psi.values().iter().copied()))
}

/// Relative residual of `family` at each time, with as-printed failures
/// flagged.
pub fn residual_report(family: ResidualFamily, scenario: &ScenarioConfig, times: &[f64]) -> Result<Vec<ResidualRow>> {
    let op = match family {
        ResidualFamily::FullProduct => Some(StateEquationOperator::new(scenario.medium, scenario.grid)?),
        _ => None,
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let (residual, grid_n) = match family {
            ResidualFamily::GaussianPrinted | ResidualFamily::GaussianPhaseCompleted => {
                let spec = GaussianPacketSpec {
                    phase_completed: family == ResidualFamily::GaussianPhaseCompleted,
                    ..scenario.gaussian
                };
                (gaussian_residual(scenario, &spec, t), scenario.grid.x.n())
            }
            ResidualFamily::AiryAsPrinted | ResidualFamily::AiryBerryBalazs => {
                let spec = AiryPacketSpec {
                    phase_variant: family.airy_phase().expect("airy family"),
                    ..scenario.airy
                };
                (airy_residual(scenario, &spec, t), scenario.grid.x.n())
            }
            ResidualFamily::FullProduct => (
                product_residual(scenario, op.as_ref().expect("built above"), t)?,
                scenario.grid.x.n().max(scenario.grid.y.n()),
            ),
        };
        let flag = match family {
            ResidualFamily::GaussianPrinted if residual > FLAG_THRESHOLD => Some("as-printed form fails for vx != 0".to_string()),
            ResidualFamily::AiryAsPrinted if residual > FLAG_THRESHOLD => Some("as-printed phase offset fails the free equation".to_string()),
            _ => None,
        };
        rows.push(ResidualRow {
            family,
            t,
            residual,
            grid_n,
            dt_res: 0.0,
            flag,
        });
    }
    Ok(rows)
}

/// Picks the Airy phase variant with the smaller worst-case residual over
/// `times`. Both variants coincide at t = 0, so include positive times.
pub fn select_airy_variant(scenario: &ScenarioConfig, times: &[f64]) -> Result<(AiryPhase, Vec<ResidualRow>)> {
    let worst = |rows: &[ResidualRow]| rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let printed = residual_report(ResidualFamily::AiryAsPrinted, scenario, times)?;
    let berry = residual_report(ResidualFamily::AiryBerryBalazs, scenario, times)?;
    let choice = if worst(&berry) <= worst(&printed) {
        AiryPhase::BerryBalazs
    } else {
        AiryPhase::AsPrinted
    };
    Ok((choice, printed.into_iter().chain(berry).collect()))
}
