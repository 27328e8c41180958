//! Shared domain types: physical parameters, packet specifications, sample
//! lattices, sampled fields and the scenario configuration file.
//!
//! Everything here is plain data plus validation. Units are natural
//! (`m = hbar = 1`) by default but every constant can be overridden.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be finite and > 0, got {value}")))
    }
}

fn finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be finite, got {value}")))
    }
}

/// Physical constants of the string: mass per unit length, damping rate,
/// angular frequency and action scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    #[serde(default = "one")]
    pub m: f64,
    pub lambda: f64,
    pub omega: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MediumParams {
    fn default() -> Self {
        MediumParams {
            m: 1.0,
            lambda: 0.05,
            omega: 1.0,
            hbar: 1.0,
        }
    }
}

impl MediumParams {
    pub fn new(m: f64, lambda: f64, omega: f64, hbar: f64) -> Result<Self> {
        let p = MediumParams {
            m,
            lambda,
            omega,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Natural units with the given damping rate and frequency.
    pub fn natural(lambda: f64, omega: f64) -> Result<Self> {
        Self::new(1.0, lambda, omega, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        positive("medium.m", self.m)?;
        positive("medium.omega", self.omega)?;
        positive("medium.hbar", self.hbar)?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param(
                "medium.lambda",
                format!("must be finite and >= 0, got {}", self.lambda),
            ));
        }
        if self.lambda >= self.omega {
            return Err(Error::Overdamped {
                lambda: self.lambda,
                omega: self.omega,
            });
        }
        Ok(())
    }

    /// Damped oscillation frequency `sqrt(omega^2 - lambda^2)`.
    pub fn damped_frequency(&self) -> f64 {
        (self.omega * self.omega - self.lambda * self.lambda).sqrt()
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }
}

/// Shape of the transverse oscillator packet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorPacketSpec {
    pub y0: f64,
    pub gamma: f64,
}

impl Default for OscillatorPacketSpec {
    fn default() -> Self {
        OscillatorPacketSpec { y0: 1.0, gamma: 1.0 }
    }
}

impl OscillatorPacketSpec {
    pub fn validate(&self) -> Result<()> {
        finite("oscillator.y0", self.y0)?;
        positive("oscillator.gamma", self.gamma)
    }
}

/// Spreading Gaussian packet travelling along x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPacketSpec {
    pub a: f64,
    pub vx: f64,
    /// Multiply by the Galilean drift phase so that moving packets solve the
    /// free equation.
    #[serde(default)]
    pub phase_completed: bool,
}

impl Default for GaussianPacketSpec {
    fn default() -> Self {
        GaussianPacketSpec {
            a: 2.0,
            vx: 0.0,
            phase_completed: true,
        }
    }
}

impl GaussianPacketSpec {
    pub fn validate(&self) -> Result<()> {
        positive("gaussian.a", self.a)?;
        finite("gaussian.vx", self.vx)
    }
}

/// Form of the time-dependent offset inside the Airy phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AiryPhase {
    /// Offset `B^2 t^3 / (6 m^2)`.
    AsPrinted,
    /// Offset `B^3 t^2 / (6 m^2)`.
    BerryBalazs,
}

impl AiryPhase {
    pub fn name(self) -> &'static str {
        match self {
            AiryPhase::AsPrinted => "as_printed",
            AiryPhase::BerryBalazs => "berry_balazs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "as_printed" => Some(AiryPhase::AsPrinted),
            "berry_balazs" => Some(AiryPhase::BerryBalazs),
            _ => None,
        }
    }
}

/// Non-spreading Airy wave train along x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AiryPacketSpec {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(default = "default_phase")]
    pub phase_variant: AiryPhase,
}

fn default_phase() -> AiryPhase {
    AiryPhase::BerryBalazs
}

impl Default for AiryPacketSpec {
    fn default() -> Self {
        AiryPacketSpec {
            b: 1.0,
            phase_variant: AiryPhase::BerryBalazs,
        }
    }
}

impl AiryPacketSpec {
    pub fn validate(&self) -> Result<()> {
        positive("airy.B", self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    min: f64,
    max: f64,
    n: usize,
}

/// Uniform periodic lattice `x_j = min + j * spacing`, `j = 0..n`, with
/// `spacing = (max - min) / n` (the point `max` itself is the periodic image
/// of `min`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid1D {
    min: f64,
    max: f64,
    n: usize,
}

impl TryFrom<GridRepr> for Grid1D {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        Grid1D::new(r.min, r.max, r.n)
    }
}

impl From<Grid1D> for GridRepr {
    fn from(g: Grid1D) -> Self {
        GridRepr {
            min: g.min,
            max: g.max,
            n: g.n,
        }
    }
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::GridBounds { min, max });
        }
        Ok(Grid1D { min, max, n })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Signed wavenumber of FFT bin `j`: `2 pi j / L` for `j < n/2`,
    /// `2 pi (j - n) / L` otherwise. Bin `n/2` is the Nyquist mode `-pi/dx`.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> f64 {
        let signed = if j < self.n / 2 {
            j as f64
        } else {
            j as f64 - self.n as f64
        };
        2.0 * PI * signed / self.length()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Index of the sample closest to `x`, clamped to the lattice.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.min) / self.spacing()).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Product lattice over (x, y). Samples are stored row-major with x fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Grid2D { x, y }
    }

    pub fn len(&self) -> usize {
        self.x.n() * self.y.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_area(&self) -> f64 {
        self.x.spacing() * self.y.spacing()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.n() + ix
    }

    pub fn axis(&self, axis: Axis) -> &Grid1D {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }
}

fn check_samples<T>(expected: usize, values: &[T], finite: impl Fn(&T) -> bool) -> Result<()> {
    if values.len() != expected {
        return Err(Error::SampleCount {
            expected,
            got: values.len(),
        });
    }
    match values.iter().position(|v| !finite(v)) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Sampled complex wavefunction on a 2-D lattice at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid2D,
    values: Vec<Complex64>,
    t: f64,
}

impl ComplexField {
    pub fn new(grid: Grid2D, values: Vec<Complex64>, t: f64) -> Result<Self> {
        check_samples(grid.len(), &values, |z| z.re.is_finite() && z.im.is_finite())?;
        Ok(ComplexField { grid, values, t })
    }

    pub fn zeros(grid: Grid2D, t: f64) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            t,
        }
    }

    /// Samples `f(x, y)` at every lattice point.
    pub fn from_fn(grid: Grid2D, t: f64, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        let xs = grid.x.points();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.y.n() {
            let y = grid.y.point(iy);
            values.extend(xs.iter().map(|&x| f(x, y)));
        }
        Self::new(grid, values, t)
    }

    /// Outer product `fx(x) * fy(y)`.
    pub fn separable(grid: Grid2D, t: f64, fx: &[Complex64], fy: &[Complex64]) -> Result<Self> {
        if fx.len() != grid.x.n() || fy.len() != grid.y.n() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                got: fx.len() * fy.len(),
            });
        }
        let mut values = Vec::with_capacity(grid.len());
        for &vy in fy {
            values.extend(fx.iter().map(|&vx| vx * vy));
        }
        Self::new(grid, values, t)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn density(&self) -> DensityField {
        DensityField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
            t: self.t,
        }
    }

    /// Discrete L2 norm `sqrt(sum |psi|^2 dx dy)`.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn relative_l2_error(&self, reference: &ComplexField) -> Result<f64> {
        if self.grid != reference.grid {
            return Err(Error::GridMismatch);
        }
        let num: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.values.iter().map(|z| z.norm_sqr()).sum();
        Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
    }

    /// Largest boundary amplitude relative to the field maximum. Zero for an
    /// all-zero field.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let (nx, ny) = (self.grid.x.n(), self.grid.y.n());
        let mut edge: f64 = 0.0;
        for ix in 0..nx {
            edge = edge
                .max(self.values[self.grid.index(ix, 0)].norm())
                .max(self.values[self.grid.index(ix, ny - 1)].norm());
        }
        for iy in 0..ny {
            edge = edge
                .max(self.values[self.grid.index(0, iy)].norm())
                .max(self.values[self.grid.index(nx - 1, iy)].norm());
        }
        edge / peak
    }
}

/// Sampled non-negative density on a 2-D lattice at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    grid: Grid2D,
    values: Vec<f64>,
    t: f64,
}

impl DensityField {
    pub fn new(grid: Grid2D, values: Vec<f64>, t: f64) -> Result<Self> {
        check_samples(grid.len(), &values, |v| v.is_finite())?;
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeDensity(i));
        }
        Ok(DensityField { grid, values, t })
    }

    pub fn from_fn(grid: Grid2D, t: f64, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let xs = grid.x.points();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.y.n() {
            let y = grid.y.point(iy);
            values.extend(xs.iter().map(|&x| f(x, y)));
        }
        Self::new(grid, values, t)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Returns a copy with every sample multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> DensityField {
        DensityField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            t: self.t,
        }
    }

    /// Marginal along x: `int rho dy`.
    pub fn x_marginal(&self) -> Marginal {
        let (nx, ny) = (self.grid.x.n(), self.grid.y.n());
        let dy = self.grid.y.spacing();
        let mut values = vec![0.0; nx];
        for iy in 0..ny {
            let row = &self.values[iy * nx..(iy + 1) * nx];
            for (acc, v) in values.iter_mut().zip(row) {
                *acc += v;
            }
        }
        values.iter_mut().for_each(|v| *v *= dy);
        Marginal {
            grid: self.grid.x,
            values,
            t: self.t,
        }
    }

    /// Marginal along y: `int rho dx`.
    pub fn y_marginal(&self) -> Marginal {
        let nx = self.grid.x.n();
        let dx = self.grid.x.spacing();
        let values = self
            .values
            .chunks_exact(nx)
            .map(|row| row.iter().sum::<f64>() * dx)
            .collect();
        Marginal {
            grid: self.grid.y,
            values,
            t: self.t,
        }
    }
}

/// One-dimensional real profile, typically a density marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub t: f64,
}

impl Marginal {
    pub fn new(grid: Grid1D, values: Vec<f64>, t: f64) -> Result<Self> {
        check_samples(grid.n(), &values, |v| v.is_finite())?;
        Ok(Marginal { grid, values, t })
    }

    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect(), t)
    }
}

/// Initial state evolved by the `evolve` command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialFamily {
    Airy,
    Gaussian,
}

/// Generator-potential mechanics run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalRun {
    /// Physical initial displacement y(0).
    pub y_init: f64,
    /// Physical initial velocity dy/dt(0).
    pub ydot_init: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Bound on max|H| relative to max(p2^2 / 2) along the trajectory.
    pub tolerance: f64,
}

impl Default for CanonicalRun {
    fn default() -> Self {
        CanonicalRun {
            y_init: 1.0,
            ydot_init: 0.0,
            dt: 1e-3,
            horizon: 20.0,
            tolerance: 1e-7,
        }
    }
}

/// Aperture applied to the non-normalizable Airy profile before evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AiryAperture {
    /// Distance from the Airy origin to the far end of the aperture on the
    /// oscillatory side (in units of the Airy argument).
    pub length: f64,
    /// Fraction of the aperture covered by the half-cosine taper.
    pub taper_fraction: f64,
}

impl Default for AiryAperture {
    fn default() -> Self {
        AiryAperture {
            length: 40.0,
            taper_fraction: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveRun {
    pub initial: InitialFamily,
    /// Number of full field snapshots written (evenly spaced over [0, T]).
    pub snapshots: usize,
    /// Number of time frames in the figure-source grids and metric series.
    pub frames: usize,
    pub aperture: AiryAperture,
    /// Boundary amplitude guard for the propagator.
    pub leakage_tolerance: f64,
}

impl Default for EvolveRun {
    fn default() -> Self {
        EvolveRun {
            initial: InitialFamily::Airy,
            snapshots: 3,
            frames: 101,
            aperture: AiryAperture::default(),
            leakage_tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSelection {
    pub trajectory: bool,
    pub fields: bool,
    pub metrics: bool,
    pub figures: bool,
}

impl Default for OutputSelection {
    fn default() -> Self {
        OutputSelection {
            trajectory: true,
            fields: true,
            metrics: true,
            figures: true,
        }
    }
}

/// Complete run description, read from and written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub medium: MediumParams,
    #[serde(default)]
    pub oscillator: OscillatorPacketSpec,
    #[serde(default)]
    pub gaussian: GaussianPacketSpec,
    #[serde(default)]
    pub airy: AiryPacketSpec,
    pub grid: Grid2D,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub canonical: CanonicalRun,
    #[serde(default)]
    pub evolve: EvolveRun,
    #[serde(default)]
    pub outputs: OutputSelection,
}

impl Default for ScenarioConfig {
    /// Illustrative demo values; nothing here is prescribed by the model.
    fn default() -> Self {
        ScenarioConfig {
            medium: MediumParams::default(),
            oscillator: OscillatorPacketSpec::default(),
            gaussian: GaussianPacketSpec::default(),
            airy: AiryPacketSpec::default(),
            grid: Grid2D::new(
                Grid1D::new(-96.0, 32.0, 1024).expect("static grid"),
                Grid1D::new(-8.0, 8.0, 64).expect("static grid"),
            ),
            dt: 1e-2,
            horizon: 5.0,
            canonical: CanonicalRun::default(),
            evolve: EvolveRun::default(),
            outputs: OutputSelection::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Split-step stability guard `dt <= dx^2 m / (pi hbar)` over both axes.
    /// The split-step scheme is unconditionally stable, so this is reported
    /// rather than enforced.
    pub fn explicit_stability_limit(&self) -> f64 {
        let h = self.grid.x.spacing().min(self.grid.y.spacing());
        h * h * self.medium.m / (PI * self.medium.hbar)
    }
}

/// Checks every invariant of the configuration and returns it unchanged on
/// success. The first violation is reported with its field name.
pub fn validate_scenario(cfg: ScenarioConfig) -> Result<ScenarioConfig> {
    cfg.medium.validate()?;
    cfg.oscillator.validate()?;
    cfg.gaussian.validate()?;
    cfg.airy.validate()?;
    positive("dt", cfg.dt)?;
    finite("T", cfg.horizon)?;
    if cfg.horizon < cfg.dt {
        return Err(Error::param("T", format!("must be >= dt = {}, got {}", cfg.dt, cfg.horizon)));
    }
    let c = &cfg.canonical;
    finite("canonical.y_init", c.y_init)?;
    finite("canonical.ydot_init", c.ydot_init)?;
    positive("canonical.dt", c.dt)?;
    if !(c.horizon.is_finite() && c.horizon >= c.dt) {
        return Err(Error::param("canonical.T", format!("must be >= canonical.dt, got {}", c.horizon)));
    }
    positive("canonical.tolerance", c.tolerance)?;
    let e = &cfg.evolve;
    if e.frames < 2 {
        return Err(Error::param("evolve.frames", "need at least 2 frames"));
    }
    positive("evolve.aperture.length", e.aperture.length)?;
    if !(e.aperture.taper_fraction > 0.0 && e.aperture.taper_fraction < 1.0) {
        return Err(Error::param("evolve.aperture.taper_fraction", "must lie in (0, 1)"));
    }
    positive("evolve.leakage_tolerance", e.leakage_tolerance)?;
    if cfg.dt > cfg.explicit_stability_limit() {
        log::debug!(
            "dt = {} exceeds the explicit guard {:.3e}; split-step remains stable",
            cfg.dt,
            cfg.explicit_stability_limit()
        );
    }
    Ok(cfg)
}
