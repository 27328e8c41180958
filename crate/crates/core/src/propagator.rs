//! Strang split-step evolution of the damped state equation.
//!
//! One step of size `dt`:
//!
//! 1. potential half-phase `exp(-i V dt / (2 hbar))`,
//! 2. kinetic phase `exp(-i hbar (kx^2 + ky^2) dt / (2m))` in Fourier space,
//! 3. potential half-phase,
//! 4. damping factor `exp(-2 lambda dt)`.
//!
//! The damping term is a multiple of the identity, so step 4 is exact and the
//! mass ratio per step is exactly `exp(-4 lambda dt)` up to round-off.

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{coherent_rate, gaussian_rate, windowed_airy};
use crate::error::{Error, Result};
use crate::model::{AiryAperture, AiryPacketSpec, ComplexField, GaussianPacketSpec, Grid2D, OscillatorPacketSpec, ScenarioConfig};
use crate::operators::StateEquationOperator;

/// Default boundary-leakage abort threshold.
pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-6;

/// Precomputed phases for a fixed step. Negative `dt` runs the scheme
/// backwards.
pub struct SplitStep<'a> {
    op: &'a StateEquationOperator,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    damping: f64,
    scratch: Vec<Complex64>,
}

impl<'a> SplitStep<'a> {
    pub fn new(op: &'a StateEquationOperator, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::param("dt", format!("must be finite and non-zero, got {dt}")));
        }
        let p = op.medium();
        let grid = op.grid();
        let half_potential = op
            .potential()
            .iter()
            .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * p.hbar)))
            .collect();
        let kx = grid.x.wavenumbers();
        let ky = grid.y.wavenumbers();
        let c = -p.hbar * dt / (2.0 * p.m);
        let mut kinetic = Vec::with_capacity(grid.len());
        for ky in &ky {
            for kx in &kx {
                kinetic.push(Complex64::from_polar(1.0, c * (kx * kx + ky * ky)));
            }
        }
        Ok(SplitStep {
            op,
            dt,
            half_potential,
            kinetic,
            damping: (-2.0 * p.lambda * dt).exp(),
            scratch: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn potential_half(&self, psi: &mut [Complex64]) {
        let nx = self.op.grid().x.n();
        for (row, phase) in psi.chunks_exact_mut(nx).zip(&self.half_potential) {
            row.iter_mut().for_each(|z| *z *= phase);
        }
    }

    /// Advances `psi` by one step and its time stamp by `dt`.
    pub fn step(&mut self, psi: &mut ComplexField) -> Result<()> {
        if psi.grid() != self.op.grid() {
            return Err(Error::GridMismatch);
        }
        let spectral = self.op.spectral();
        let values = psi.values_mut();
        self.potential_half(values);
        spectral.forward(values, &mut self.scratch);
        values.iter_mut().zip(&self.kinetic).for_each(|(z, k)| *z *= k);
        spectral.inverse(values, &mut self.scratch);
        self.potential_half(values);
        let d = self.damping;
        values.iter_mut().for_each(|z| *z *= d);
        let t = psi.t() + self.dt;
        psi.set_t(t);
        Ok(())
    }
}

/// Run controls beyond step size and horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Abort once the boundary amplitude exceeds this fraction of the peak.
    pub leakage_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            leakage_tolerance: DEFAULT_LEAKAGE_TOLERANCE,
        }
    }
}

/// Snapshot schedule after rounding requested times to whole steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub dt: f64,
    pub steps: usize,
    pub requested: Vec<f64>,
    pub step_index: Vec<usize>,
}

impl Schedule {
    pub fn new(dt: f64, horizon: f64, times: &[f64]) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be finite and > 0, got {dt}")));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::param("T", format!("must be finite and >= 0, got {horizon}")));
        }
        let steps = (horizon / dt).round() as usize;
        if ((steps as f64) * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
            log::warn!("T = {horizon} is not a whole number of steps; running {steps} steps to t = {}", steps as f64 * dt);
        }
        let mut step_index = Vec::with_capacity(times.len());
        for &t in times {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Snapshots(format!("time {t} is negative or non-finite")));
            }
            let k = (t / dt).round() as usize;
            if k > steps {
                return Err(Error::Snapshots(format!("time {t} lies beyond T = {horizon}")));
            }
            if step_index.last().is_some_and(|&prev| k <= prev) {
                return Err(Error::Snapshots(format!("time {t} does not advance past the previous snapshot after rounding to dt = {dt}")));
            }
            step_index.push(k);
        }
        Ok(Schedule {
            dt,
            steps,
            requested: times.to_vec(),
            step_index,
        })
    }

    /// Times actually reached, `k dt`.
    pub fn times(&self) -> Vec<f64> {
        self.step_index.iter().map(|&k| k as f64 * self.dt).collect()
    }

    /// Largest `|requested - reached|`.
    pub fn max_rounding(&self) -> f64 {
        self.requested
            .iter()
            .zip(self.times())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `n` evenly spaced times on `[0, horizon]`.
pub fn even_times(horizon: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| horizon * k as f64 / (n - 1) as f64).collect(),
    }
}

fn check_leakage(psi: &ComplexField, tolerance: f64) -> Result<()> {
    let ratio = psi.boundary_ratio();
    if ratio > tolerance {
        Err(Error::Leakage {
            t: psi.t(),
            ratio,
            tolerance,
        })
    } else {
        Ok(())
    }
}

/// Evolves `psi0` and hands every scheduled snapshot to `observer` instead of
/// storing it. Returns the masses at the snapshots.
pub fn evolve_observed(
    psi0: &ComplexField,
    op: &StateEquationOperator,
    schedule: &Schedule,
    options: EvolveOptions,
    mut observer: impl FnMut(&ComplexField) -> Result<()>,
) -> Result<Vec<f64>> {
    let mut psi = psi0.clone();
    psi.set_t(0.0);
    check_leakage(&psi, options.leakage_tolerance)?;
    let mut stepper = SplitStep::new(op, schedule.dt)?;
    let mut masses = Vec::with_capacity(schedule.step_index.len());
    let mut next = schedule.step_index.iter().peekable();
    let last = schedule.step_index.last().copied().unwrap_or(0);
    for k in 0..=last {
        if k > 0 {
            stepper.step(&mut psi)?;
            // pin the clock to the lattice so long runs do not drift
            psi.set_t(k as f64 * schedule.dt);
            check_leakage(&psi, options.leakage_tolerance)?;
        }
        if next.peek() == Some(&&k) {
            next.next();
            masses.push(psi.norm().powi(2));
            observer(&psi)?;
        }
    }
    Ok(masses)
}

/// Output of [`split_step_evolve`].
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub snapshots: Vec<ComplexField>,
    pub masses: Vec<f64>,
    pub schedule: Schedule,
    /// Relative L2 error per snapshot once a reference has been compared.
    pub errors: Option<Vec<f64>>,
}

impl EvolutionResult {
    pub fn times(&self) -> Vec<f64> {
        self.schedule.times()
    }

    /// Fills `errors` with the relative L2 distance to `reference(t)`.
    pub fn compare(&mut self, mut reference: impl FnMut(f64) -> Result<ComplexField>) -> Result<&[f64]> {
        let errors = self
            .snapshots
            .iter()
            .map(|s| s.relative_l2_error(&reference(s.t())?))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.errors.insert(errors))
    }
}

/// Evolves `psi0` to `horizon` with step `dt`, keeping snapshots at
/// `snapshot_times` (rounded to whole steps).
pub fn split_step_evolve(
    psi0: &ComplexField,
    op: &StateEquationOperator,
    dt: f64,
    horizon: f64,
    snapshot_times: &[f64],
) -> Result<EvolutionResult> {
    split_step_evolve_with(psi0, op, dt, horizon, snapshot_times, EvolveOptions::default())
}

pub fn split_step_evolve_with(
    psi0: &ComplexField,
    op: &StateEquationOperator,
    dt: f64,
    horizon: f64,
    snapshot_times: &[f64],
    options: EvolveOptions,
) -> Result<EvolutionResult> {
    let schedule = Schedule::new(dt, horizon, snapshot_times)?;
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let masses = evolve_observed(psi0, op, &schedule, options, |psi| {
        snapshots.push(psi.clone());
        Ok(())
    })?;
    Ok(EvolutionResult {
        snapshots,
        masses,
        schedule,
        errors: None,
    })
}

/// Coherent oscillator times phase-completed Gaussian, with the decay
/// `exp(-2 lambda t)`; an exact solution on the full operator.
pub fn product_state(grid: Grid2D, t: f64, cfg: &ScenarioConfig) -> Result<ComplexField> {
    product_state_from(grid, t, &cfg.medium, &cfg.oscillator, &cfg.gaussian)
}

pub fn product_state_from(
    grid: Grid2D,
    t: f64,
    p: &crate::model::MediumParams,
    osc: &OscillatorPacketSpec,
    gauss: &GaussianPacketSpec,
) -> Result<ComplexField> {
    let g = GaussianPacketSpec {
        phase_completed: true,
        ..*gauss
    };
    let fy = grid
        .y
        .points()
        .into_iter()
        .map(|y| coherent_rate(y, t, p, osc).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let decay = (-2.0 * p.lambda * t).exp();
    let fx: Vec<Complex64> = grid.x.points().into_iter().map(|x| gaussian_rate(x, t, p, &g).0 * decay).collect();
    ComplexField::separable(grid, t, &fx, &fy)
}

/// Coherent oscillator times the apertured Airy profile at t = 0.
pub fn airy_initial_state(
    grid: Grid2D,
    p: &crate::model::MediumParams,
    osc: &OscillatorPacketSpec,
    airy: &AiryPacketSpec,
    aperture: &AiryAperture,
) -> Result<ComplexField> {
    let fy = grid
        .y
        .points()
        .into_iter()
        .map(|y| coherent_rate(y, 0.0, p, osc).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let fx: Vec<Complex64> = grid.x.points().into_iter().map(|x| windowed_airy(x, p, airy, aperture)).collect();
    ComplexField::separable(grid, 0.0, &fx, &fy)
}

/// Reference states for [`convergence_study`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceCase {
    /// Coherent oscillator times Gaussian on the full operator; analytic
    /// reference.
    Product,
    /// A single lattice Fourier mode without potential; every step is exact.
    KineticMode,
    /// Coherent oscillator times windowed Airy; no closed form, so the order
    /// comes from three-level Richardson differences.
    WindowedAiry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// Error against the reference, or the difference to the next finer
    /// level for Richardson studies.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub case: ConvergenceCase,
    pub horizon: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Observed order; `None` when every error sits at round-off.
    pub order: Option<f64>,
    pub richardson: bool,
    pub smooth: bool,
}

/// Errors below this are treated as round-off.
const ROUND_OFF: f64 = 1e-11;

/// Least-squares slope of `log(error)` against `log(dt)`.
fn fitted_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.error > ROUND_OFF).map(|r| (r.dt.ln(), r.error.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Share of spectral energy in the outer quarter of the wavenumber range.
fn spectral_tail(psi: &ComplexField, op: &StateEquationOperator) -> f64 {
    let mut buf = psi.values().to_vec();
    op.spectral().forward(&mut buf, &mut Vec::new());
    let grid = op.grid();
    let (kx, ky) = (grid.x.wavenumbers(), grid.y.wavenumbers());
    let (nqx, nqy) = (grid.x.nyquist(), grid.y.nyquist());
    let nx = grid.x.n();
    let (mut tail, mut total) = (0.0, 0.0);
    for (i, z) in buf.iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        if kx[i % nx].abs() > 0.75 * nqx || ky[i / nx].abs() > 0.75 * nqy {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Measures the global time-stepping order on `case` over `horizon` with the
/// step sizes `dt_list`, each half the previous.
pub fn convergence_study(scenario: &ScenarioConfig, case: ConvergenceCase, dt_list: &[f64], horizon: f64) -> Result<ConvergenceReport> {
    if dt_list.len() < 3 {
        return Err(Error::Convergence(format!("at least 3 step sizes, got {}", dt_list.len())));
    }
    for w in dt_list.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::Convergence(format!("each dt to halve the previous, got {} then {}", w[0], w[1])));
        }
    }
    let grid = scenario.grid;
    let p = scenario.medium;
    let (op, psi0) = match case {
        ConvergenceCase::Product => (StateEquationOperator::new(p, grid)?, product_state(grid, 0.0, scenario)?),
        ConvergenceCase::KineticMode => {
            let (kx, ky) = (grid.x.wavenumber(3), grid.y.wavenumber(2));
            let psi = ComplexField::from_fn(grid, 0.0, |x, y| Complex64::from_polar(1.0, kx * x + ky * y))?;
            (StateEquationOperator::without_potential(p, grid)?, psi)
        }
        ConvergenceCase::WindowedAiry => (
            StateEquationOperator::new(p, grid)?,
            airy_initial_state(grid, &p, &scenario.oscillator, &scenario.airy, &scenario.evolve.aperture)?,
        ),
    };
    let tail = spectral_tail(&psi0, &op);
    let smooth = tail < 1e-14 && psi0.boundary_ratio() < crate::operators::LEAKAGE_THRESHOLD;
    if !smooth {
        log::warn!("convergence reference is not smooth on this grid (spectral tail {tail:.1e}); the fitted order may be unreliable");
    }
    // a lattice mode fills the whole box by construction
    let options = EvolveOptions {
        leakage_tolerance: match case {
            ConvergenceCase::KineticMode => f64::INFINITY,
            _ => scenario.evolve.leakage_tolerance,
        },
    };
    let finals = dt_list
        .iter()
        .map(|&dt| {
            let run = split_step_evolve_with(&psi0, &op, dt, horizon, &[horizon], options)?;
            Ok(run.snapshots.into_iter().next().expect("one snapshot"))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, richardson) = match case {
        ConvergenceCase::Product | ConvergenceCase::KineticMode => {
            let reference = match case {
                ConvergenceCase::Product => product_state(grid, horizon, scenario)?,
                _ => {
                    let k2 = grid.x.wavenumber(3).powi(2) + grid.y.wavenumber(2).powi(2);
                    let factor = Complex64::from_polar((-2.0 * p.lambda * horizon).exp(), -p.hbar * k2 * horizon / (2.0 * p.m));
                    let values = psi0.values().iter().map(|z| z * factor).collect();
                    ComplexField::new(grid, values, horizon)?
                }
            };
            let rows = dt_list
                .iter()
                .zip(&finals)
                .map(|(&dt, f)| Ok(ConvergenceRow { dt, error: f.relative_l2_error(&reference)? }))
                .collect::<Result<Vec<_>>>()?;
            (rows, false)
        }
        ConvergenceCase::WindowedAiry => {
            let rows = dt_list
                .windows(2)
                .zip(finals.windows(2))
                .map(|(dt, f)| Ok(ConvergenceRow { dt: dt[0], error: f[0].relative_l2_error(&f[1])? }))
                .collect::<Result<Vec<_>>>()?;
            (rows, true)
        }
    };
    Ok(ConvergenceReport {
        case,
        horizon,
        order: fitted_order(&rows),
        rows,
        richardson,
        smooth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::gaussian_wavefunction;
    use crate::model::{Grid1D, MediumParams};

    fn small_grid() -> Grid2D {
        Grid2D::new(Grid1D::new(-32.0, 32.0, 256).unwrap(), Grid1D::new(-8.0, 8.0, 64).unwrap())
    }

    fn scenario(lambda: f64, grid: Grid2D) -> ScenarioConfig {
        ScenarioConfig {
            medium: MediumParams::natural(lambda, 1.0).unwrap(),
            grid,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn mass_follows_the_damping_law() {
        let grid = Grid2D::new(Grid1D::new(-64.0, 64.0, 128).unwrap(), Grid1D::new(-8.0, 8.0, 64).unwrap());
        for lambda in [0.0, 0.05, 0.2] {
            let mut cfg = scenario(lambda, grid);
            cfg.gaussian.a = 4.0;
            let op = StateEquationOperator::new(cfg.medium, cfg.grid).unwrap();
            let psi0 = product_state(cfg.grid, 0.0, &cfg).unwrap();
            let times = even_times(10.0, 6);
            let run = split_step_evolve(&psi0, &op, 1e-2, 10.0, &times).unwrap();
            for (m, t) in run.masses.iter().zip(run.times()) {
                let ratio = m / run.masses[0];
                assert!((ratio - (-4.0 * lambda * t).exp()).abs() < 1e-10, "lambda {lambda} t {t}: {ratio}");
            }
        }
    }

    #[test]
    fn unitary_step_conserves_mass_and_reverses() {
        let cfg = scenario(0.0, small_grid());
        let op = StateEquationOperator::new(cfg.medium, cfg.grid).unwrap();
        let psi0 = product_state(cfg.grid, 0.0, &cfg).unwrap();
        let mut psi = psi0.clone();
        let m0 = psi.norm().powi(2);
        SplitStep::new(&op, 0.01).unwrap().step(&mut psi).unwrap();
        assert!((psi.norm().powi(2) / m0 - 1.0).abs() < 1e-12);
        SplitStep::new(&op, -0.01).unwrap().step(&mut psi).unwrap();
        assert!(psi.relative_l2_error(&psi0).unwrap() < 1e-10);
        assert!(psi.t().abs() < 1e-15);
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        let p = MediumParams::natural(0.0, 1.0).unwrap();
        let grid = Grid2D::new(Grid1D::new(-20.0, 20.0, 256).unwrap(), Grid1D::new(-20.0, 20.0, 256).unwrap());
        let op = StateEquationOperator::without_potential(p, grid).unwrap();
        let spec = GaussianPacketSpec::default();
        let at = |t: f64| ComplexField::from_fn(grid, t, |x, y| gaussian_wavefunction(x, t, &p, &spec) * gaussian_wavefunction(y, t, &p, &spec));
        let mut run = split_step_evolve(&at(0.0).unwrap(), &op, 1e-3, 1.0, &[1.0]).unwrap();
        let err = run.compare(at).unwrap()[0];
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn product_state_tracks_one_period() {
        let grid = Grid2D::new(Grid1D::new(-64.0, 64.0, 256).unwrap(), Grid1D::new(-8.0, 8.0, 64).unwrap());
        let mut cfg = scenario(0.05, grid);
        cfg.gaussian.vx = 0.5;
        let op = StateEquationOperator::new(cfg.medium, grid).unwrap();
        let period = 2.0 * std::f64::consts::PI;
        let times = even_times(period, 9);
        let mut run = split_step_evolve(&product_state(grid, 0.0, &cfg).unwrap(), &op, 1e-3, period, &times).unwrap();
        let errors = run.compare(|t| product_state(grid, t, &cfg)).unwrap();
        assert!(errors.iter().all(|&e| e < 1e-4), "{errors:?}");
    }

    #[test]
    fn schedule_rounding_and_errors() {
        let s = Schedule::new(0.1, 1.0, &[0.0, 0.33, 1.0]).unwrap();
        assert_eq!(s.step_index, vec![0, 3, 10]);
        assert!((s.max_rounding() - 0.03).abs() < 1e-12);
        assert!(matches!(Schedule::new(0.1, 1.0, &[0.5, 0.51]), Err(Error::Snapshots(_))));
        assert!(matches!(Schedule::new(0.1, 1.0, &[2.0]), Err(Error::Snapshots(_))));
        assert!(matches!(Schedule::new(0.1, 1.0, &[-0.1]), Err(Error::Snapshots(_))));
        assert!(Schedule::new(0.0, 1.0, &[]).is_err());
        assert_eq!(even_times(2.0, 3), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn leakage_aborts_with_time() {
        let p = MediumParams::natural(0.0, 1.0).unwrap();
        let grid = Grid2D::new(Grid1D::new(-8.0, 8.0, 64).unwrap(), Grid1D::new(-8.0, 8.0, 16).unwrap());
        let op = StateEquationOperator::without_potential(p, grid).unwrap();
        let spec = GaussianPacketSpec { a: 2.0, vx: 3.0, phase_completed: true };
        let psi0 = ComplexField::from_fn(grid, 0.0, |x, y| gaussian_wavefunction(x, 0.0, &p, &spec) * (-y * y).exp()).unwrap();
        match split_step_evolve(&psi0, &op, 1e-2, 4.0, &[4.0]) {
            Err(Error::Leakage { t, .. }) => assert!(t > 0.0 && t < 4.0),
            other => panic!("expected leakage, got {other:?}"),
        }
    }

    #[test]
    fn kinetic_mode_is_exact() {
        let cfg = scenario(0.1, small_grid());
        let report = convergence_study(&cfg, ConvergenceCase::KineticMode, &[4e-2, 2e-2, 1e-2], 1.0).unwrap();
        assert!(report.rows.iter().all(|r| r.error < 1e-11), "{report:?}");
        assert_eq!(report.order, None);
    }

    #[test]
    fn second_order_on_the_product_state() {
        let cfg = scenario(0.05, small_grid());
        let report = convergence_study(&cfg, ConvergenceCase::Product, &[4e-2, 2e-2, 1e-2], 2.0).unwrap();
        let p = report.order.unwrap();
        assert!((1.9..=2.1).contains(&p), "{report:?}");
        assert!(report.smooth);
    }

    #[test]
    fn study_rejects_bad_step_lists() {
        let cfg = scenario(0.0, small_grid());
        assert!(matches!(convergence_study(&cfg, ConvergenceCase::Product, &[1e-2, 5e-3], 1.0), Err(Error::Convergence(_))));
        assert!(matches!(convergence_study(&cfg, ConvergenceCase::Product, &[1e-2, 4e-3, 2e-3], 1.0), Err(Error::Convergence(_))));
    }
}
