//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use dampwave::analytic::{airy_ai, airy_argument, airy_deflection, full_density_airy, full_density_gaussian, gaussian_width2};
use dampwave::canonical::{
    admissible_initial_state, displacement_from_potential, hamiltonian, integrate_potential, transform_canonical, velocity_from_potential, verify_zero_hamiltonian,
    CanonicalState,
};
use dampwave::metrics::{
    marginal_peak, peak_trajectory, quadratic_fit, reamplification_test, shape_correlation, shape_correlation_windowed, total_mass,
    width_x, LobeWindow,
};
use dampwave::model::{
    AiryPacketSpec, Axis, ComplexField, DensityField, GaussianPacketSpec, Grid1D, Grid2D, Marginal, MediumParams, OscillatorPacketSpec,
    ScenarioConfig,
};
use dampwave::operators::{commutator_check_p2q2, residual_report, select_airy_variant, ResidualFamily, StateEquationOperator};
use dampwave::propagator::{
    airy_initial_state, convergence_study, even_times, product_state, split_step_evolve, split_step_evolve_with, ConvergenceCase, EvolveOptions,
};
use dampwave::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn grid(x: (f64, f64, usize), y: (f64, f64, usize)) -> Grid2D {
    Grid2D::new(Grid1D::new(x.0, x.1, x.2).unwrap(), Grid1D::new(y.0, y.1, y.2).unwrap())
}

fn zero_hamiltonian() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut min_order) = (0.0f64, f64::INFINITY);
    for _ in 0..10 {
        let omega = rng.gen_range(0.5..3.0);
        let lambda = omega * rng.gen_range(0.05..0.9);
        let p = MediumParams::natural(lambda, omega)?;
        let ic = admissible_initial_state(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), &p);
        let horizon = 20.0 / omega;
        let check = verify_zero_hamiltonian(&integrate_potential(&ic, &p, 1e-3, horizon)?, &p);
        worst = worst.max(check.relative()).max(check.relative_prime(&p));
        let (y0, v0) = (displacement_from_potential(&ic, &p), velocity_from_potential(&ic, &p));
        let nu = (omega * omega - lambda * lambda).sqrt();
        let exact = |t: f64| (-lambda * t).exp() * (y0 * (nu * t).cos() + (v0 + lambda * y0) / nu * (nu * t).sin());
        let errors = [0.08, 0.04, 0.02]
            .iter()
            .map(|h| {
                let traj = integrate_potential(&ic, &p, h / omega, horizon)?;
                let scale = traj.times.iter().map(|&t| exact(t).abs()).fold(0.0, f64::max);
                Ok(traj.displacements(&p).iter().zip(&traj.times).map(|(y, &t)| (y - exact(t)).abs()).fold(0.0, f64::max) / scale)
            })
            .collect::<Result<Vec<_>>>()?;
        for w in errors.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
    }
    outcome(
        worst < 1e-7 && min_order >= 3.8,
        format!("max |H|, |H'| relative to max |p2^2/2| = {worst:.2e} (< 1e-7); min order of the y(t) error under dt halving = {min_order:.3} (>= 3.8)"),
    )
}

fn transformed_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let omega = rng.gen_range(0.2..5.0);
        let p = MediumParams::new(rng.gen_range(0.1..10.0), omega * rng.gen_range(0.0..0.99), omega, rng.gen_range(0.5..2.0))?;
        let c = CanonicalState {
            q1: rng.gen_range(-10.0..10.0),
            q2: rng.gen_range(-10.0..10.0),
            p1: rng.gen_range(-10.0..10.0),
            p2: rng.gen_range(-10.0..10.0),
        };
        let h = hamiltonian(&c, &p);
        let hp = transform_canonical(&c, &p).h_prime;
        let mw2 = p.m * p.omega * p.omega;
        // scale of the individual terms, so cancellations in H do not inflate the ratio
        let scale = mw2 * (0.5 * c.p2 * c.p2 + p.omega * p.omega * (c.p2 * c.q1).abs() + (c.p1 * c.q2).abs() + 2.0 * p.lambda * (c.p2 * c.q2).abs());
        worst = worst.max((hp - mw2 * h).abs() / scale);
    }
    outcome(worst < 1e-12, format!("max |H' - m omega^2 H| / term scale over 1000 states = {worst:.2e} (< 1e-12)"))
}

fn damping_law() -> Result<Outcome> {
    let osc = OscillatorPacketSpec::default();
    let gs = GaussianPacketSpec::default();
    let (mut analytic, mut propagated) = (0.0f64, 0.0f64);
    for lambda in [0.0, 0.05, 0.2] {
        let p = MediumParams::natural(lambda, 1.0)?;
        let g = grid((-64.0, 64.0, 512), (-8.0, 8.0, 128));
        let m0 = total_mass(&DensityField::from_fn(g, 0.0, |x, y| full_density_gaussian(y, x, 0.0, &p, &osc, &gs))?);
        for k in 0..=10 {
            let t = k as f64;
            let m = total_mass(&DensityField::from_fn(g, t, |x, y| full_density_gaussian(y, x, t, &p, &osc, &gs))?);
            analytic = analytic.max((m / m0 - (-4.0 * lambda * t).exp()).abs());
        }
        let cfg = ScenarioConfig {
            medium: p,
            grid: grid((-64.0, 64.0, 256), (-8.0, 8.0, 64)),
            ..ScenarioConfig::default()
        };
        let op = StateEquationOperator::new(p, cfg.grid)?;
        let run = split_step_evolve(&product_state(cfg.grid, 0.0, &cfg)?, &op, 1e-2, 10.0, &even_times(10.0, 11))?;
        for (m, t) in run.masses.iter().zip(run.times()) {
            propagated = propagated.max((m / run.masses[0] - (-4.0 * lambda * t).exp()).abs());
        }
    }
    outcome(
        analytic < 1e-8 && propagated < 1e-10,
        format!("max |mass ratio - exp(-4 lambda t)|: analytic {analytic:.2e} (< 1e-8), propagated {propagated:.2e} (< 1e-10)"),
    )
}

fn spreading_law() -> Result<Outcome> {
    let osc = OscillatorPacketSpec::default();
    let gs = GaussianPacketSpec::default();
    let p = MediumParams::natural(0.05, 1.0)?;
    let mut analytic = 0.0f64;
    let g = grid((-96.0, 96.0, 2048), (-8.0, 8.0, 32));
    for k in 0..=10 {
        let t = k as f64;
        let w = width_x(&DensityField::from_fn(g, t, |x, y| full_density_gaussian(y, x, t, &p, &osc, &gs))?)?;
        analytic = analytic.max((w / (gaussian_width2(t, &p, &gs) / 8.0) - 1.0).abs());
    }
    let cfg = ScenarioConfig {
        medium: p,
        grid: grid((-32.0, 32.0, 256), (-8.0, 8.0, 64)),
        ..ScenarioConfig::default()
    };
    let op = StateEquationOperator::new(p, cfg.grid)?;
    let run = split_step_evolve(&product_state(cfg.grid, 0.0, &cfg)?, &op, 1e-3, 2.0, &even_times(2.0, 5))?;
    let mut propagated = 0.0f64;
    for s in &run.snapshots {
        let w = width_x(&s.density())?;
        propagated = propagated.max((w / (gaussian_width2(s.t(), &p, &gs) / 8.0) - 1.0).abs());
    }
    outcome(
        analytic < 1e-8 && propagated < 1e-4,
        format!("max relative width error vs s^2/8: analytic {analytic:.2e} (< 1e-8), propagated n=256 dt=1e-3 {propagated:.2e} (< 1e-4)"),
    )
}

/// Density snapshots of the windowed Airy state and of a Gaussian with the
/// same main-lobe width, both undamped, on the default scenario lattice.
struct AiryRuns {
    airy: Vec<DensityField>,
    gaussian: Vec<DensityField>,
    damped: Vec<DensityField>,
    lambda: f64,
}

fn main_lobe_fwhm() -> f64 {
    let g = Grid1D::new(-4.0, 2.0, 1 << 16).unwrap();
    let v: Vec<f64> = g.points().iter().map(|&x| airy_ai(x).powi(2)).collect();
    let peak = v.iter().cloned().fold(0.0, f64::max);
    let above: Vec<f64> = g.points().into_iter().zip(&v).filter(|(_, &a)| a >= 0.5 * peak).map(|(x, _)| x).collect();
    above.last().unwrap() - above.first().unwrap()
}

fn airy_runs() -> Result<AiryRuns> {
    let base = ScenarioConfig::default();
    let lambda = base.medium.lambda;
    let times = even_times(5.0, 21);
    let run = |p: MediumParams, psi0: ComplexField| -> Result<Vec<DensityField>> {
        let op = StateEquationOperator::new(p, base.grid)?;
        let options = EvolveOptions {
            leakage_tolerance: base.evolve.leakage_tolerance,
        };
        Ok(split_step_evolve_with(&psi0, &op, base.dt, 5.0, &times, options)?.snapshots.iter().map(|s| s.density()).collect())
    };
    let undamped = base.medium.with_lambda(0.0);
    let airy0 = airy_initial_state(base.grid, &undamped, &base.oscillator, &base.airy, &base.evolve.aperture)?;
    let gs = GaussianPacketSpec {
        a: main_lobe_fwhm() / 2f64.ln().sqrt(),
        vx: 0.0,
        phase_completed: true,
    };
    let cfg = ScenarioConfig {
        medium: undamped,
        gaussian: gs,
        ..base.clone()
    };
    Ok(AiryRuns {
        airy: run(undamped, airy0.clone())?,
        gaussian: run(undamped, product_state(base.grid, 0.0, &cfg)?)?,
        damped: run(base.medium, airy0)?,
        lambda,
    })
}

fn airy_non_spreading(runs: &AiryRuns) -> Result<Outcome> {
    let p = MediumParams::natural(0.0, 1.0)?;
    let s = AiryPacketSpec::default();
    let g = Grid1D::new(-40.0, 20.0, 4096).unwrap();
    let mut analytic = 0.0f64;
    for k in 0..=10 {
        let t = 0.5 * k as f64;
        let shift = airy_deflection(t, &p, &s);
        for x in g.points() {
            let now = airy_ai(airy_argument(x, t, &p, &s)).powi(2);
            let then = airy_ai(airy_argument(x - shift, 0.0, &p, &s)).powi(2);
            analytic = analytic.max((now - then).abs());
        }
    }
    let airy_min = runs
        .airy
        .iter()
        .map(|d| shape_correlation_windowed(d, &runs.airy[0], LobeWindow::LEADING).map(|s| s.score))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1.0, f64::min);
    let gauss_end = shape_correlation(runs.gaussian.last().unwrap(), &runs.gaussian[0])?.score;
    outcome(
        analytic < 1e-15 && airy_min >= 0.999 && gauss_end < 0.999,
        format!(
            "analytic translation defect {analytic:.1e}; windowed Airy min score on [0, 5] = {airy_min:.6} (>= 0.999); matched Gaussian score at t=5 = {gauss_end:.4} (< 0.999)"
        ),
    )
}

fn airy_deflection_law(runs: &AiryRuns) -> Result<Outcome> {
    let want = 0.25;
    let propagated = quadratic_fit(&peak_trajectory(&runs.airy)?)?[2];
    let p = MediumParams::natural(0.0, 1.0)?;
    let s = AiryPacketSpec::default();
    let g = Grid1D::new(-8.0, 8.0, 16384).unwrap();
    let traj = (0..=20)
        .map(|k| {
            let t = 0.25 * k as f64;
            Ok((t, marginal_peak(&Marginal::from_fn(g, t, |x| airy_ai(airy_argument(x, t, &p, &s)).powi(2))?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let analytic = quadratic_fit(&traj)?[2];
    let (rp, ra) = ((propagated / want - 1.0).abs(), (analytic - want).abs());
    outcome(
        rp < 0.02 && ra < 1e-6,
        format!("fitted t^2 coefficient: propagated {propagated:.5} (rel. error {rp:.2e} < 2%), analytic {analytic:.9} (error {ra:.1e} < 1e-6); expected B^3/4m^2 = 0.25"),
    )
}

fn residual_certification() -> Result<Outcome> {
    let times = [0.0, 1.0, 2.5, 5.0];
    let mut worst = 0.0f64;
    let mut cfg = ScenarioConfig::default();
    for vx in [0.0, 1.0, -0.7] {
        cfg.gaussian.vx = vx;
        for r in residual_report(ResidualFamily::GaussianPhaseCompleted, &cfg, &times)? {
            worst = worst.max(r.residual);
        }
    }
    cfg.gaussian.vx = 0.0;
    for r in residual_report(ResidualFamily::FullProduct, &cfg, &times)? {
        worst = worst.max(r.residual);
    }
    let (variant, rows) = select_airy_variant(&cfg, &[0.5, 1.0, 2.5, 5.0])?;
    let selected = if variant == dampwave::model::AiryPhase::BerryBalazs {
        ResidualFamily::AiryBerryBalazs
    } else {
        ResidualFamily::AiryAsPrinted
    };
    let airy = rows.iter().filter(|r| r.family == selected).map(|r| r.residual).fold(0.0, f64::max);
    cfg.gaussian.vx = 1.0;
    let printed = residual_report(ResidualFamily::GaussianPrinted, &cfg, &[1.0, 2.5])?;
    let printed_min = printed.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let flagged = printed.iter().all(|r| r.flag.is_some());
    outcome(
        worst < 1e-5 && airy < 1e-5 && printed_min > 1e-2 && flagged,
        format!(
            "phase-completed Gaussian / full product max {worst:.2e}, selected Airy variant `{}` max {airy:.2e} (< 1e-5); as-printed Gaussian vx=1 min {printed_min:.2e} (> 1e-2, flagged: {flagged})",
            variant.name()
        ),
    )
}

fn commutator_suite() -> Result<Outcome> {
    let g = grid((-1.0, 1.0, 8), (-10.0, 10.0, 256));
    let specs = [(0.0, 1.0, 0.0), (1.5, 0.5, 2.0), (-2.0, 2.0, -1.0), (0.5, 0.8, 4.0), (0.0, 3.0, 0.5)];
    let fields = specs
        .iter()
        .map(|&(c, w, k)| ComplexField::from_fn(g, 0.0, |x, y| Complex64::from_polar((-(y - c) * (y - c) / w).exp() * (1.0 + 0.2 * x), k * y)))
        .collect::<Result<Vec<_>>>()?;
    let dev = commutator_check_p2q2(&fields, Axis::Y, 1.0);
    let dev_h = commutator_check_p2q2(&fields, Axis::Y, 0.37);
    outcome(dev < 1e-8 && dev_h < 1e-8, format!("max relative deviation of [P2y, Q2y] from hbar/i on 5 fields: {:.2e} (< 1e-8)", dev.max(dev_h)))
}

fn propagator_order() -> Result<Outcome> {
    let cfg = ScenarioConfig {
        medium: MediumParams::natural(0.05, 1.0)?,
        grid: grid((-32.0, 32.0, 256), (-8.0, 8.0, 64)),
        ..ScenarioConfig::default()
    };
    let report = convergence_study(&cfg, ConvergenceCase::Product, &[4e-3, 2e-3, 1e-3], 2.0)?;
    let p = report.order.unwrap_or(f64::NAN);
    outcome(
        (1.9..=2.1).contains(&p) && report.smooth,
        format!("fitted global order {p:.4} (in [1.9, 2.1]); errors {:?}", report.rows.iter().map(|r| format!("{:.2e}", r.error)).collect::<Vec<_>>()),
    )
}

fn reamplification(runs: &AiryRuns) -> Result<Outcome> {
    let propagated = reamplification_test(&runs.damped, &runs.airy, runs.lambda)?;
    let osc = OscillatorPacketSpec::default();
    let s = AiryPacketSpec::default();
    let g = grid((-32.0, 16.0, 512), (-8.0, 8.0, 64));
    let series = |lambda: f64| -> Result<Vec<DensityField>> {
        let p = MediumParams::natural(lambda, 1.0)?;
        (0..=10)
            .map(|k| {
                let t = 0.5 * k as f64;
                DensityField::from_fn(g, t, |x, y| full_density_airy(y, x, t, &p, &osc, &s))
            })
            .collect()
    };
    let analytic = reamplification_test(&series(runs.lambda)?, &series(0.0)?, runs.lambda)?;
    outcome(
        propagated < 1e-6 && analytic < 1e-13,
        format!("max relative deviation after exp(4 lambda t) gain: propagated {propagated:.2e} (< 1e-6), analytic {analytic:.2e} (round-off)"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, f: &dyn Fn() -> Result<Outcome>| {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!("{} [{id:>2}] {name}: {detail} ({:.1}s)", if passed { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    };
    report(1, "zero-Hamiltonian certification", &zero_hamiltonian);
    report(2, "transformed Hamiltonian identity", &transformed_identity);
    report(3, "damping law", &damping_law);
    report(4, "spreading law", &spreading_law);
    let runs = airy_runs();
    match &runs {
        Ok(r) => {
            report(5, "Airy non-spreading", &|| airy_non_spreading(r));
            report(6, "Airy deflection", &|| airy_deflection_law(r));
        }
        Err(e) => {
            let msg = format!("{e}");
            report(5, "Airy non-spreading", &|| outcome(false, format!("propagation error: {msg}")));
            report(6, "Airy deflection", &|| outcome(false, format!("propagation error: {msg}")));
        }
    }
    report(7, "residual certification", &residual_certification);
    report(8, "commutator suite", &commutator_suite);
    report(9, "propagator order", &propagator_order);
    match &runs {
        Ok(r) => report(10, "re-amplification", &|| reamplification(r)),
        Err(e) => {
            let msg = format!("{e}");
            report(10, "re-amplification", &|| outcome(false, format!("propagation error: {msg}")));
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
