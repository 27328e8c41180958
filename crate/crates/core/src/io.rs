//! File formats.
//!
//! Fields are written as a flat little-endian `f64` file `<stem>.bin`
//! (row-major, x fastest; complex samples as interleaved `re, im`) next to a
//! JSON sidecar `<stem>.json` describing the lattice, time and parameters.
//! Figure-source grids use the same scheme with one row per time frame.
//! Tabular reports are CSV with a header row.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_from_potential, displacement_from_potential, hamiltonian, transform_canonical, transformed_hamiltonian, PotentialTrajectory};
use crate::error::{Error, Result};
use crate::model::{Axis, ComplexField, DensityField, Grid1D, Grid2D, Marginal, MediumParams};
use crate::operators::ResidualRow;

pub const FIELD_FORMAT: &str = "dampwave-field";
pub const FIGURE_FORMAT: &str = "dampwave-figure";
pub const FORMAT_VERSION: u32 = 1;
const DTYPE: &str = "f64-le";

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    format_error(path, e.to_string())
}

/// `<stem>.bin` and `<stem>.json`.
pub fn field_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Density,
    Wavefunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub format: String,
    pub version: u32,
    pub kind: FieldKind,
    pub dtype: String,
    pub layout: String,
    pub grid: Grid2D,
    pub t: f64,
    pub family: String,
    /// Free-form echo of the parameters that produced the field.
    pub parameters: serde_json::Value,
}

fn write_f64s(path: &Path, values: impl Iterator<Item = f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * expected {
        return Err(format_error(path, format!("expected {} bytes ({expected} doubles), found {}", 8 * expected, bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_error(path, e.to_string()))
}

fn sidecar(kind: FieldKind, grid: Grid2D, t: f64, family: &str, parameters: serde_json::Value) -> FieldSidecar {
    FieldSidecar {
        format: FIELD_FORMAT.into(),
        version: FORMAT_VERSION,
        kind,
        dtype: DTYPE.into(),
        layout: match kind {
            FieldKind::Density => "row-major, x fastest".into(),
            FieldKind::Wavefunction => "row-major, x fastest, interleaved re/im".into(),
        },
        grid,
        t,
        family: family.into(),
        parameters,
    }
}

/// Writes a density snapshot; returns the binary and sidecar paths.
pub fn write_density(stem: &Path, d: &DensityField, family: &str, parameters: serde_json::Value) -> Result<(PathBuf, PathBuf)> {
    let (bin, json) = field_paths(stem);
    write_f64s(&bin, d.values().iter().copied())?;
    write_json(&json, &sidecar(FieldKind::Density, *d.grid(), d.t(), family, parameters))?;
    Ok((bin, json))
}

pub fn write_wavefunction(stem: &Path, f: &ComplexField, family: &str, parameters: serde_json::Value) -> Result<(PathBuf, PathBuf)> {
    let (bin, json) = field_paths(stem);
    write_f64s(&bin, f.values().iter().flat_map(|z| [z.re, z.im]))?;
    write_json(&json, &sidecar(FieldKind::Wavefunction, *f.grid(), f.t(), family, parameters))?;
    Ok((bin, json))
}

/// A field read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum StoredField {
    Density(DensityField),
    Wavefunction(ComplexField),
}

/// Reads `<stem>.json` and the matching `<stem>.bin`.
pub fn read_field(stem: &Path) -> Result<(FieldSidecar, StoredField)> {
    let (bin, json) = field_paths(stem);
    let meta: FieldSidecar = read_json(&json)?;
    if meta.format != FIELD_FORMAT {
        return Err(format_error(&json, format!("field `format` is {:?}, expected {FIELD_FORMAT:?}", meta.format)));
    }
    if meta.dtype != DTYPE {
        return Err(format_error(&json, format!("field `dtype` is {:?}, expected {DTYPE:?}", meta.dtype)));
    }
    let n = meta.grid.len();
    let field = match meta.kind {
        FieldKind::Density => StoredField::Density(DensityField::new(meta.grid, read_f64s(&bin, n)?, meta.t)?),
        FieldKind::Wavefunction => {
            let raw = read_f64s(&bin, 2 * n)?;
            let values = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
            StoredField::Wavefunction(ComplexField::new(meta.grid, values, meta.t)?)
        }
    };
    Ok((meta, field))
}

/// Figure projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureView {
    /// Density over (x, t) at the oscillator centre plane.
    Front,
    /// Density over (y, t) integrated over x.
    Side,
}

impl FigureView {
    pub fn name(self) -> &'static str {
        match self {
            FigureView::Front => "front",
            FigureView::Side => "side",
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            FigureView::Front => Axis::X,
            FigureView::Side => Axis::Y,
        }
    }
}

/// Density over one spatial axis and time; `values[k * n + j]` is frame `k`
/// at axis sample `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureGrid {
    pub view: FigureView,
    pub damped: bool,
    pub lambda: f64,
    pub axis_grid: Grid1D,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FigureGrid {
    pub fn new(view: FigureView, damped: bool, lambda: f64, axis_grid: Grid1D) -> Self {
        FigureGrid {
            view,
            damped,
            lambda,
            axis_grid,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push_frame(&mut self, t: f64, row: &[f64]) -> Result<()> {
        if row.len() != self.axis_grid.n() {
            return Err(Error::SampleCount {
                expected: self.axis_grid.n(),
                got: row.len(),
            });
        }
        self.times.push(t);
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn frame(&self, k: usize) -> &[f64] {
        let n = self.axis_grid.n();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn file_stem(&self) -> String {
        format!("figure_{}_{}", self.view.name(), if self.damped { "damped" } else { "nondamped" })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureSidecar {
    pub format: String,
    pub version: u32,
    pub view: FigureView,
    pub damped: bool,
    pub lambda: f64,
    pub axis: Axis,
    pub axis_grid: Grid1D,
    pub times: Vec<f64>,
    pub dtype: String,
    pub layout: String,
    pub quantity: String,
    pub parameters: serde_json::Value,
}

pub fn write_figure_grid(stem: &Path, fig: &FigureGrid, parameters: serde_json::Value) -> Result<(PathBuf, PathBuf)> {
    if fig.times.is_empty() {
        return Err(format_error(stem, "figure grid has no frames"));
    }
    let (bin, json) = field_paths(stem);
    write_f64s(&bin, fig.values.iter().copied())?;
    let meta = FigureSidecar {
        format: FIGURE_FORMAT.into(),
        version: FORMAT_VERSION,
        view: fig.view,
        damped: fig.damped,
        lambda: fig.lambda,
        axis: fig.view.axis(),
        axis_grid: fig.axis_grid,
        times: fig.times.clone(),
        dtype: DTYPE.into(),
        layout: "one row per time frame, axis samples fastest".into(),
        quantity: match fig.view {
            FigureView::Front => "density at the oscillator centre plane".into(),
            FigureView::Side => "density integrated over x".into(),
        },
        parameters,
    };
    write_json(&json, &meta)?;
    Ok((bin, json))
}

pub fn read_figure_grid(stem: &Path) -> Result<(FigureSidecar, FigureGrid)> {
    let (bin, json) = field_paths(stem);
    let meta: FigureSidecar = read_json(&json)?;
    if meta.format != FIGURE_FORMAT {
        return Err(format_error(&json, format!("field `format` is {:?}, expected {FIGURE_FORMAT:?}", meta.format)));
    }
    if meta.axis != meta.view.axis() {
        return Err(format_error(&json, "field `axis` does not match `view`"));
    }
    let values = read_f64s(&bin, meta.times.len() * meta.axis_grid.n())?;
    let fig = FigureGrid {
        view: meta.view,
        damped: meta.damped,
        lambda: meta.lambda,
        axis_grid: meta.axis_grid,
        times: meta.times.clone(),
        values,
    };
    Ok((meta, fig))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One line of the trajectory CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub q: f64,
    pub qd: f64,
    pub qdd: f64,
    pub qddd: f64,
    pub y: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Hprime")]
    pub h_prime: f64,
}

pub fn trajectory_rows(traj: &PotentialTrajectory, p: &MediumParams) -> Vec<TrajectoryRow> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let c = canonical_from_potential(s, p);
            TrajectoryRow {
                t,
                q: s.q,
                qd: s.qd,
                qdd: s.qdd,
                qddd: s.qddd,
                y: displacement_from_potential(s, p),
                h: hamiltonian(&c, p),
                h_prime: transformed_hamiltonian(&transform_canonical(&c, p), p),
            }
        })
        .collect()
}

pub fn write_trajectory_csv(path: &Path, traj: &PotentialTrajectory, p: &MediumParams) -> Result<()> {
    write_rows(path, trajectory_rows(traj, p))
}

#[derive(Serialize)]
struct ResidualCsvRow<'a> {
    family: &'a str,
    t: f64,
    residual: f64,
    grid_n: usize,
    dt_res: f64,
    flag: &'a str,
}

pub fn write_residual_csv(path: &Path, rows: &[ResidualRow]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| ResidualCsvRow {
            family: r.family.name(),
            t: r.t,
            residual: r.residual,
            grid_n: r.grid_n,
            dt_res: r.dt_res,
            flag: r.flag.as_deref().unwrap_or(""),
        }),
    )
}

/// One line of a metrics CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub t: f64,
    pub value: f64,
}

impl MetricRow {
    pub fn new(metric: impl Into<String>, t: f64, value: f64) -> Self {
        MetricRow {
            metric: metric.into(),
            t,
            value,
        }
    }
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

#[derive(Serialize)]
struct ProfileRow {
    x: f64,
    value: f64,
}

/// 1-D profile as CSV with columns `x, value`.
pub fn write_profile_csv(path: &Path, m: &Marginal) -> Result<()> {
    write_rows(path, m.grid.points().into_iter().zip(&m.values).map(|(x, &value)| ProfileRow { x, value }))
}
