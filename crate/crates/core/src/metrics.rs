//! Observables on density snapshots: mass, x-moments, peak position, shape
//! score and the re-amplification check.
//!
//! Quadratures are plain sums times the cell size, which is the trapezoidal
//! rule on a periodic lattice.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DensityField, Marginal};

/// Edge-to-peak ratio above which an x-marginal is treated as not
/// normalizable on its grid.
pub const NORMALIZABLE_EDGE: f64 = 1e-8;

/// Fraction of the peak below which a lobe window stops.
const LOBE_FLOOR: f64 = 1e-8;

pub fn total_mass(d: &DensityField) -> f64 {
    d.values().iter().sum::<f64>() * d.grid().cell_area()
}

fn marginal_mass(m: &Marginal) -> f64 {
    m.values.iter().sum::<f64>() * m.grid.spacing()
}

fn check_normalizable(m: &Marginal) -> Result<()> {
    let peak = m.values.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::DegenerateMarginal);
    }
    let edge = m.values[0].max(m.values[m.values.len() - 1]);
    if edge > NORMALIZABLE_EDGE * peak {
        return Err(Error::NonNormalizable(edge / peak));
    }
    Ok(())
}

/// `(mean, variance)` of a marginal restricted to index range `range`.
fn moments(m: &Marginal, range: std::ops::Range<usize>) -> Result<(f64, f64)> {
    let (mut w, mut s1) = (0.0, 0.0);
    for j in range.clone() {
        w += m.values[j];
        s1 += m.values[j] * m.grid.point(j);
    }
    if w <= 0.0 {
        return Err(Error::DegenerateMarginal);
    }
    let mean = s1 / w;
    let var = range.map(|j| m.values[j] * (m.grid.point(j) - mean).powi(2)).sum::<f64>() / w;
    Ok((mean, var))
}

/// First moment of the x-marginal.
pub fn mean_x(d: &DensityField) -> Result<f64> {
    let m = d.x_marginal();
    check_normalizable(&m)?;
    Ok(moments(&m, 0..m.values.len())?.0)
}

/// First moment of the y-marginal.
pub fn mean_y(d: &DensityField) -> Result<f64> {
    let m = d.y_marginal();
    Ok(moments(&m, 0..m.values.len())?.0)
}

/// Second central moment of the x-marginal.
pub fn width_x(d: &DensityField) -> Result<f64> {
    marginal_width(&d.x_marginal())
}

pub fn marginal_width(m: &Marginal) -> Result<f64> {
    check_normalizable(m)?;
    Ok(moments(m, 0..m.values.len())?.1)
}

/// Second central moment of the x-marginal over `[lo, hi]` only.
pub fn width_x_windowed(d: &DensityField, lo: f64, hi: f64) -> Result<f64> {
    let m = d.x_marginal();
    let (a, b) = (m.grid.nearest_index(lo), m.grid.nearest_index(hi));
    if b <= a {
        return Err(Error::param("window", format!("empty window [{lo}, {hi}]")));
    }
    Ok(moments(&m, a..b + 1)?.1)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// Sub-grid maximum of a marginal by a 3-point parabola through the largest
/// sample and its neighbours.
pub fn marginal_peak(m: &Marginal) -> Result<f64> {
    if m.values.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateMarginal);
    }
    let j = argmax(&m.values);
    if j == 0 || j + 1 == m.values.len() {
        return Err(Error::PeakAtEdge(j));
    }
    let (a, b, c) = (m.values[j - 1], m.values[j], m.values[j + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Ok(m.grid.point(j) + offset * m.grid.spacing())
}

/// `(t, x_peak)` of each snapshot's x-marginal.
pub fn peak_trajectory(series: &[DensityField]) -> Result<Vec<(f64, f64)>> {
    series.iter().map(|d| Ok((d.t(), marginal_peak(&d.x_marginal())?))).collect()
}

/// Restricts the shape comparison to the main lobe and `side_lobes` lobes on
/// either side of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LobeWindow {
    pub side_lobes: usize,
}

impl LobeWindow {
    /// Main lobe plus two side lobes.
    pub const LEADING: LobeWindow = LobeWindow { side_lobes: 2 };

    /// Index range of the window around the global maximum of `v`. Walking
    /// out from the peak, each direction stops at the `side_lobes + 1`-th
    /// local minimum, once a non-rising tail drops below the floor, or at
    /// the grid edge.
    fn range(&self, v: &[f64]) -> (usize, usize) {
        let p = argmax(v);
        let floor = LOBE_FLOOR * v[p];
        let walk = |step: isize| -> usize {
            let mut j = p as isize;
            let mut minima = 0;
            let mut falling = true;
            loop {
                let next = j + step;
                if next < 0 || next as usize >= v.len() {
                    return j as usize;
                }
                let (cur, nv) = (v[j as usize], v[next as usize]);
                if nv > cur {
                    if falling {
                        minima += 1;
                        if minima > self.side_lobes {
                            return j as usize;
                        }
                    }
                    falling = false;
                } else {
                    if cur < floor {
                        return j as usize;
                    }
                    falling = true;
                }
                j = next;
            }
        };
        (walk(-1), walk(1))
    }
}

/// Translation-compensated shape comparison of two x-profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShapeScore {
    pub t: f64,
    /// Shift `tau` such that `d_t(x + tau)` best matches `d_0(x)`.
    pub translation: f64,
    /// Normalized inner product in `[-1, 1]`.
    pub score: f64,
}

/// Six-point Lagrange interpolation on a uniform lattice; zero outside it.
fn interpolate(v: &[f64], u: f64) -> f64 {
    let n = v.len() as isize;
    let base = u.floor() as isize;
    let frac = u - base as f64;
    let nodes = [-2isize, -1, 0, 1, 2, 3];
    let mut acc = 0.0;
    for &k in &nodes {
        let j = base + k;
        if j < 0 || j >= n {
            continue;
        }
        let mut w = 1.0;
        for &l in &nodes {
            if l != k {
                w *= (frac - l as f64) / (k - l) as f64;
            }
        }
        acc += w * v[j as usize];
    }
    acc
}

/// Shape score of `current` against `reference` over the index range
/// `range` of the reference.
fn score_profiles(current: &Marginal, reference: &Marginal, range: (usize, usize)) -> Result<ShapeScore> {
    if current.grid != reference.grid {
        return Err(Error::GridMismatch);
    }
    let (f, g) = (&current.values, &reference.values);
    if f.iter().all(|&v| v == 0.0) || g.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateMarginal);
    }
    let n = g.len() as isize;
    let idx: Vec<usize> = (range.0..=range.1).collect();
    let g_norm = idx.iter().map(|&j| g[j] * g[j]).sum::<f64>().sqrt();
    // integer lag maximizing the raw cross-correlation over the window
    let mut best = (0isize, f64::NEG_INFINITY);
    for s in -n + 1..n {
        let c: f64 = idx
            .iter()
            .filter_map(|&j| {
                let k = j as isize + s;
                (k >= 0 && k < n).then(|| g[j] * f[k as usize])
            })
            .sum();
        if c > best.1 {
            best = (s, c);
        }
    }
    let normalized = |tau: f64| -> f64 {
        let (mut dot, mut ff) = (0.0, 0.0);
        for &j in &idx {
            let v = interpolate(f, j as f64 + tau);
            dot += g[j] * v;
            ff += v * v;
        }
        if ff > 0.0 {
            dot / (g_norm * ff.sqrt())
        } else {
            0.0
        }
    };
    // golden-section refinement on [s - 1, s + 1]
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 as f64 - 1.0, best.0 as f64 + 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (normalized(c), normalized(d));
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = normalized(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = normalized(d);
        }
    }
    let tau = 0.5 * (a + b);
    Ok(ShapeScore {
        t: current.t,
        translation: tau * current.grid.spacing(),
        score: normalized(tau).min(1.0),
    })
}

/// Shape score of the x-marginals over the whole grid.
pub fn shape_correlation(d_t: &DensityField, d_0: &DensityField) -> Result<ShapeScore> {
    marginal_shape_score(&d_t.x_marginal(), &d_0.x_marginal(), None)
}

/// Shape score over a lobe window placed on the reference profile.
pub fn shape_correlation_windowed(d_t: &DensityField, d_0: &DensityField, window: LobeWindow) -> Result<ShapeScore> {
    marginal_shape_score(&d_t.x_marginal(), &d_0.x_marginal(), Some(window))
}

pub fn marginal_shape_score(current: &Marginal, reference: &Marginal, window: Option<LobeWindow>) -> Result<ShapeScore> {
    let range = match window {
        Some(w) => w.range(&reference.values),
        None => (0, reference.values.len() - 1),
    };
    score_profiles(current, reference, range)
}

/// Largest `|exp(4 lambda t) damped - reference|` over every snapshot and
/// sample, relative to the largest reference sample of that snapshot.
pub fn reamplification_test(damped: &[DensityField], reference: &[DensityField], lambda: f64) -> Result<f64> {
    if damped.len() != reference.len() {
        return Err(Error::SeriesLength(damped.len(), reference.len()));
    }
    let mut worst: f64 = 0.0;
    for (d, r) in damped.iter().zip(reference) {
        if d.grid() != r.grid() {
            return Err(Error::GridMismatch);
        }
        let gain = (4.0 * lambda * d.t()).exp();
        let peak = r.values().iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::DegenerateMarginal);
        }
        let dev = d.values().iter().zip(r.values()).map(|(a, b)| (gain * a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev / peak);
    }
    Ok(worst)
}

/// Least-squares `x(t) = c0 + c1 t + c2 t^2`; returns `[c0, c1, c2]`.
pub fn quadratic_fit(points: &[(f64, f64)]) -> Result<[f64; 3]> {
    if points.len() < 3 {
        return Err(Error::param("points", format!("quadratic fit needs at least 3 points, got {}", points.len())));
    }
    let scale = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::param("points", "all times are zero"));
    }
    // normal equations in s = t / scale
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for &(t, x) in points {
        let s = t / scale;
        let basis = [1.0, s, s * s];
        for i in 0..3 {
            rhs[i] += basis[i] * x;
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
        }
    }
    let c = solve3(a, rhs).ok_or_else(|| Error::param("points", "times do not span a quadratic"))?;
    Ok([c[0], c[1] / scale, c[2] / (scale * scale)])
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot = a[col];
            for (v, pv) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *v -= f * pv;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        x[i] = (b[i] - (i + 1..3).map(|k| a[i][k] * x[k]).sum::<f64>()) / a[i][i];
    }
    Some(x)
}

/// Ratio `mass(t) / mass(0)` for a series, relative to its first entry.
pub fn mass_ratios(series: &[DensityField]) -> Vec<f64> {
    let m0 = series.first().map(total_mass).unwrap_or(0.0);
    series.iter().map(|d| total_mass(d) / m0).collect()
}

/// Mass of a marginal; equals the total mass of its parent field.
pub fn marginal_total(m: &Marginal) -> f64 {
    marginal_mass(m)
}
