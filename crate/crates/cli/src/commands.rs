use std::fmt;

use anyhow::anyhow;
use dampwave::analytic::{
    airy_ai, airy_argument, airy_deflection, full_density_airy, full_density_gaussian, gaussian_density, gaussian_width2, oscillator_density,
};
use dampwave::canonical::{admissible_initial_state, integrate_potential, perturbed_initial_state, verify_zero_hamiltonian};
use dampwave::io::{
    write_density, write_figure_grid, write_metrics_csv, write_profile_csv, write_residual_csv, write_trajectory_csv, write_wavefunction,
    FigureGrid, FigureView, MetricRow,
};
use dampwave::metrics::{
    marginal_peak, mean_y, quadratic_fit, reamplification_test, shape_correlation, shape_correlation_windowed, total_mass, width_x,
    LobeWindow,
};
use dampwave::model::{AiryPhase, DensityField, InitialFamily, Marginal, ScenarioConfig};
use dampwave::operators::{density_at_plane_y, residual_report, select_airy_variant, ResidualFamily, StateEquationOperator, RESIDUAL_BUDGET};
use dampwave::propagator::{airy_initial_state, evolve_observed, even_times, product_state, EvolveOptions, Schedule};
use serde_json::json;

use crate::manifest::OutputLog;

/// Relative size of the seeded kick applied by `--negative-control`.
pub const NEGATIVE_CONTROL_NOISE: f64 = 1e-3;
pub const NEGATIVE_CONTROL_SEED: u64 = 1;

/// Command failure before a verdict could be reached.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration; exit status 2.
    Usage(String),
    /// Aborted computation or I/O; exit status 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<dampwave::Error> for Failure {
    fn from(e: dampwave::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug)]
pub struct Verdict {
    pub passed: bool,
    pub summary: String,
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub family: Option<String>,
    pub times: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
    pub variant: Option<String>,
    pub negative_control: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn scenario_echo(cfg: &ScenarioConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn canonical_verify(cfg: &ScenarioConfig, opts: &Options, log: &mut OutputLog) -> Result<Verdict, Failure> {
    let c = cfg.canonical;
    let p = cfg.medium;
    let tolerance = opts.tolerance.unwrap_or(c.tolerance);
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(usage(format!("--tolerance must be positive, got {tolerance}")));
    }
    let mut ic = admissible_initial_state(c.y_init, c.ydot_init, &p);
    if opts.negative_control {
        ic = perturbed_initial_state(&ic, NEGATIVE_CONTROL_NOISE, NEGATIVE_CONTROL_SEED);
    }
    let traj = integrate_potential(&ic, &p, c.dt, c.horizon)?;
    let check = verify_zero_hamiltonian(&traj, &p);
    let (rel, rel_prime) = (check.relative(), check.relative_prime(&p));
    let passed = rel < tolerance && rel_prime < tolerance;

    if cfg.outputs.trajectory {
        let csv = log.path("trajectory.csv");
        write_trajectory_csv(&csv, &traj, &p)?;
        log.record(csv);
    }
    log.write_json(
        "canonical_summary.json",
        &json!({
            "steps": traj.len() - 1,
            "dt": c.dt,
            "T": c.horizon,
            "initial_state": { "q": ic.q, "qd": ic.qd, "qdd": ic.qdd, "qddd": ic.qddd },
            "negative_control": opts.negative_control,
            "max_H": check.max_h,
            "max_Hprime": check.max_h_prime,
            "max_kinetic": check.max_kinetic,
            "relative_H": rel,
            "relative_Hprime": rel_prime,
            "tolerance": tolerance,
            "passed": passed,
        }),
    )?;
    Ok(Verdict {
        passed,
        summary: format!("max|H|/max(p2^2/2) = {rel:.3e}, max|H'|/scale = {rel_prime:.3e}, tolerance {tolerance:.1e}"),
    })
}

/// Closed-form families written by `evaluate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalFamily {
    FullGaussian,
    FullAiry,
    FullProduct,
    GaussianDensity,
    AiryDensity,
    OscillatorDensity,
}

impl EvalFamily {
    pub const ALL: [EvalFamily; 6] = [
        EvalFamily::FullGaussian,
        EvalFamily::FullAiry,
        EvalFamily::FullProduct,
        EvalFamily::GaussianDensity,
        EvalFamily::AiryDensity,
        EvalFamily::OscillatorDensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvalFamily::FullGaussian => "full_gaussian",
            EvalFamily::FullAiry => "full_airy",
            EvalFamily::FullProduct => "full_product",
            EvalFamily::GaussianDensity => "gaussian_density",
            EvalFamily::AiryDensity => "airy_density",
            EvalFamily::OscillatorDensity => "oscillator_density",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

fn names<T: Copy>(all: &[T], name: impl Fn(T) -> &'static str) -> String {
    all.iter().map(|&f| name(f)).collect::<Vec<_>>().join(", ")
}

fn checked_times(times: &[f64], horizon: f64) -> Result<(), Failure> {
    if times.is_empty() {
        return Err(usage("--times is empty"));
    }
    for &t in times {
        if !(t.is_finite() && (0.0..=horizon).contains(&t)) {
            return Err(usage(format!("time {t} lies outside [0, T = {horizon}]")));
        }
    }
    Ok(())
}

pub fn evaluate(cfg: &ScenarioConfig, opts: &Options, log: &mut OutputLog) -> Result<Verdict, Failure> {
    let name = opts
        .family
        .as_deref()
        .ok_or_else(|| usage(format!("--family is required; one of {}", names(&EvalFamily::ALL, EvalFamily::name))))?;
    let family = EvalFamily::parse(name)
        .ok_or_else(|| usage(format!("unknown family `{name}`; expected one of {}", names(&EvalFamily::ALL, EvalFamily::name))))?;
    let times = opts.times.clone().unwrap_or_else(|| vec![0.0]);
    checked_times(&times, cfg.horizon)?;

    let (p, grid) = (cfg.medium, cfg.grid);
    let (osc, gs, airy) = (&cfg.oscillator, &cfg.gaussian, &cfg.airy);
    let mut written = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let stem = log.path(&format!("{}_{k:03}", family.name()));
        let params = json!({ "scenario": scenario_echo(cfg), "index": k });
        match family {
            EvalFamily::FullGaussian => {
                let d = DensityField::from_fn(grid, t, |x, y| full_density_gaussian(y, x, t, &p, osc, gs))?;
                log.record_pair(write_density(&stem, &d, family.name(), params)?);
            }
            EvalFamily::FullAiry => {
                let d = DensityField::from_fn(grid, t, |x, y| full_density_airy(y, x, t, &p, osc, airy))?;
                log.record_pair(write_density(&stem, &d, family.name(), params)?);
            }
            EvalFamily::FullProduct => {
                let f = product_state(grid, t, cfg)?;
                log.record_pair(write_wavefunction(&stem, &f, family.name(), params)?);
            }
            EvalFamily::GaussianDensity | EvalFamily::AiryDensity | EvalFamily::OscillatorDensity => {
                let m = match family {
                    EvalFamily::GaussianDensity => Marginal::from_fn(grid.x, t, |x| gaussian_density(x, t, &p, gs))?,
                    EvalFamily::AiryDensity => Marginal::from_fn(grid.x, t, |x| airy_ai(airy_argument(x, t, &p, airy)).powi(2))?,
                    _ => Marginal::from_fn(grid.y, t, |y| oscillator_density(y, t, &p, osc))?,
                };
                let path = stem.with_extension("csv");
                write_profile_csv(&path, &m)?;
                log.record(path);
            }
        }
        written.push(json!({ "index": k, "t": t, "stem": format!("{}_{k:03}", family.name()) }));
    }
    log.write_json("evaluate_summary.json", &json!({ "family": family.name(), "outputs": written }))?;
    Ok(Verdict {
        passed: true,
        summary: format!("{} evaluated at {} time(s)", family.name(), times.len()),
    })
}

pub fn residual(cfg: &ScenarioConfig, opts: &Options, log: &mut OutputLog) -> Result<Verdict, Failure> {
    let families = match opts.family.as_deref() {
        None | Some("all") => ResidualFamily::ALL.to_vec(),
        Some(name) => vec![ResidualFamily::parse(name).ok_or_else(|| {
            usage(format!("unknown residual family `{name}`; expected all or one of {}", names(&ResidualFamily::ALL, ResidualFamily::name)))
        })?],
    };
    let times = opts.times.clone().unwrap_or_else(|| even_times(cfg.horizon, 5));
    checked_times(&times, cfg.horizon)?;
    let budget = opts.tolerance.unwrap_or(RESIDUAL_BUDGET);
    if budget.is_nan() || budget <= 0.0 {
        return Err(usage(format!("--tolerance must be positive, got {budget}")));
    }
    let (variant, selected_by) = match opts.variant.as_deref() {
        None | Some("auto") => (select_airy_variant(cfg, &times)?.0, "residual"),
        Some(v) => (
            AiryPhase::parse(v).ok_or_else(|| usage(format!("unknown Airy variant `{v}`; expected auto, as_printed or berry_balazs")))?,
            "flag",
        ),
    };

    let mut rows = Vec::new();
    for family in &families {
        rows.extend(residual_report(*family, cfg, &times)?);
    }
    let csv = log.path("residuals.csv");
    write_residual_csv(&csv, &rows)?;
    log.record(csv);

    let certified: Vec<_> = rows.iter().filter(|r| r.family.is_certified(variant)).collect();
    let worst = certified.iter().map(|r| r.residual).fold(0.0, f64::max);
    let passed = certified.iter().all(|r| r.residual < budget);
    let per_family: serde_json::Map<_, _> = families
        .iter()
        .map(|f| {
            let max = rows.iter().filter(|r| r.family == *f).map(|r| r.residual).fold(0.0, f64::max);
            (f.name().to_string(), json!({ "max_residual": max, "certified": f.is_certified(variant) }))
        })
        .collect();
    let flagged = rows.iter().filter(|r| r.flag.is_some()).count();
    log.write_json(
        "residual_summary.json",
        &json!({
            "times": times,
            "budget": budget,
            "airy_variant": variant.name(),
            "airy_variant_source": selected_by,
            "families": per_family,
            "flagged_rows": flagged,
            "passed": passed,
        }),
    )?;
    Ok(Verdict {
        passed,
        summary: format!(
            "Airy variant {} ({selected_by}); worst certified residual {worst:.3e} vs budget {budget:.1e}; {flagged} flagged row(s)",
            variant.name()
        ),
    })
}

/// Frame indices that also produce full snapshot files.
fn snapshot_frames(frames: usize, snapshots: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = match snapshots {
        0 => Vec::new(),
        1 => vec![frames - 1],
        s => (0..s).map(|j| ((j * (frames - 1)) as f64 / (s - 1) as f64).round() as usize).collect(),
    };
    idx.dedup();
    idx
}

struct SettingRun {
    label: &'static str,
    lambda: f64,
    snapshots: Vec<DensityField>,
    summary: serde_json::Value,
}

pub fn evolve(cfg: &ScenarioConfig, _opts: &Options, log: &mut OutputLog) -> Result<Verdict, Failure> {
    let frames = even_times(cfg.horizon, cfg.evolve.frames);
    let schedule = Schedule::new(cfg.dt, cfg.horizon, &frames).map_err(|e| usage(e.to_string()))?;
    let snap_idx = snapshot_frames(frames.len(), cfg.evolve.snapshots);
    let psi0 = match cfg.evolve.initial {
        InitialFamily::Airy => airy_initial_state(cfg.grid, &cfg.medium, &cfg.oscillator, &cfg.airy, &cfg.evolve.aperture)?,
        InitialFamily::Gaussian => product_state(cfg.grid, 0.0, cfg)?,
    };

    let mut runs = Vec::new();
    for (label, lambda) in [("nondamped", 0.0), ("damped", cfg.medium.lambda)] {
        runs.push(evolve_setting(cfg, &schedule, &snap_idx, &psi0, label, lambda, log)?);
    }
    let reamp = reamplification_test(&runs[1].snapshots, &runs[0].snapshots, runs[1].lambda)?;
    let settings: serde_json::Map<_, _> = runs.iter().map(|r| (r.label.to_string(), r.summary.clone())).collect();
    log.write_json(
        "summary.json",
        &json!({
            "initial": cfg.evolve.initial,
            "dt": cfg.dt,
            "T": cfg.horizon,
            "steps": schedule.steps,
            "frames": frames.len(),
            "snapshot_rounding": schedule.max_rounding(),
            "settings": settings,
            "reamplification_max_deviation": reamp,
        }),
    )?;
    Ok(Verdict {
        passed: true,
        summary: format!(
            "{} frames over T = {}; re-amplification deviation {reamp:.2e}; outputs in {}",
            frames.len(),
            cfg.horizon,
            log.root().display()
        ),
    })
}

fn evolve_setting(
    cfg: &ScenarioConfig,
    schedule: &Schedule,
    snap_idx: &[usize],
    psi0: &dampwave::model::ComplexField,
    label: &'static str,
    lambda: f64,
    log: &mut OutputLog,
) -> Result<SettingRun, Failure> {
    let medium = cfg.medium.with_lambda(lambda);
    let op = StateEquationOperator::new(medium, cfg.grid)?;
    let damped = label == "damped";
    let mut front = FigureGrid::new(FigureView::Front, damped, lambda, cfg.grid.x);
    let mut side = FigureGrid::new(FigureView::Side, damped, lambda, cfg.grid.y);
    let params = json!({ "scenario": scenario_echo(cfg), "setting": label, "lambda": lambda });
    let is_airy = cfg.evolve.initial == InitialFamily::Airy;

    let mut rows = Vec::new();
    let mut peaks = Vec::new();
    let mut snapshots = Vec::new();
    let mut reference: Option<DensityField> = None;
    let (mut min_score, mut width_dev, mut frame) = (f64::INFINITY, 0.0f64, 0usize);
    let options = EvolveOptions {
        leakage_tolerance: cfg.evolve.leakage_tolerance,
    };
    let result = evolve_observed(psi0, &op, schedule, options, |psi| {
        let t = psi.t();
        let d = psi.density();
        let yc = mean_y(&d)?;
        front.push_frame(t, &density_at_plane_y(psi, yc))?;
        side.push_frame(t, &d.y_marginal().values)?;

        let peak = marginal_peak(&d.x_marginal())?;
        peaks.push((t, peak));
        let d0 = reference.get_or_insert_with(|| d.clone());
        let score = if is_airy { shape_correlation_windowed(&d, d0, LobeWindow::LEADING)? } else { shape_correlation(&d, d0)? };
        min_score = min_score.min(score.score);
        rows.push(MetricRow::new("mass", t, total_mass(&d)));
        rows.push(MetricRow::new("center_plane_y", t, yc));
        rows.push(MetricRow::new("peak_x", t, peak));
        rows.push(MetricRow::new("shape_score", t, score.score));
        rows.push(MetricRow::new("translation", t, score.translation));
        if !is_airy {
            let w = width_x(&d)?;
            let w_ref = gaussian_width2(t, &medium, &cfg.gaussian) / 8.0;
            width_dev = width_dev.max((w / w_ref - 1.0).abs());
            rows.push(MetricRow::new("width_x", t, w));
            rows.push(MetricRow::new("width_x_reference", t, w_ref));
        }
        if snap_idx.contains(&frame) {
            if cfg.outputs.fields {
                let stem = log.path(&format!("snapshot_{label}_{:03}", snapshots.len()));
                log.record_pair(write_wavefunction(&stem, psi, &format!("evolve_{}", family_name(cfg)), params.clone())?);
            }
            snapshots.push(d);
        }
        frame += 1;
        Ok(())
    });
    let masses = match result {
        Ok(m) => m,
        Err(e) => return Err(Failure::Runtime(anyhow!("{label} run aborted: {e}"))),
    };

    let mut mass_dev = 0.0f64;
    for (m, t) in masses.iter().zip(schedule.times()) {
        mass_dev = mass_dev.max((m / masses[0] - (-4.0 * lambda * t).exp()).abs());
    }
    let mut summary = json!({
        "lambda": lambda,
        "mass_law_max_deviation": mass_dev,
        "min_shape_score": min_score,
    });
    if is_airy {
        let fit = quadratic_fit(&peaks)?;
        summary["deflection_fit"] = json!(fit[2]);
        summary["deflection_expected"] = json!(airy_deflection(1.0, &medium, &cfg.airy));
    } else {
        summary["width_max_relative_deviation"] = json!(width_dev);
    }

    if cfg.outputs.metrics {
        let csv = log.path(&format!("metrics_{label}.csv"));
        write_metrics_csv(&csv, &rows)?;
        log.record(csv);
    }
    if cfg.outputs.figures {
        for fig in [&front, &side] {
            log.record_pair(write_figure_grid(&log.path(&fig.file_stem()), fig, params.clone())?);
        }
    }
    Ok(SettingRun {
        label,
        lambda,
        snapshots,
        summary,
    })
}

fn family_name(cfg: &ScenarioConfig) -> &'static str {
    match cfg.evolve.initial {
        InitialFamily::Airy => "airy",
        InitialFamily::Gaussian => "gaussian",
    }
}
