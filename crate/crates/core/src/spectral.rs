//! FFT plumbing shared by the operators and the propagator.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::model::{Axis, Grid1D, Grid2D};

/// Forward/inverse plans for one axis. The inverse is normalized.
#[derive(Clone)]
pub struct Spectral1D {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral1D {
    pub fn new(grid: Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        Spectral1D {
            grid,
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Transforms every contiguous chunk of length `n` in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.grid.n() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// `d^order f / dx^order` by multiplication with `(i k)^order`. The
    /// Nyquist bin is dropped for odd orders.
    pub fn derivative(&self, values: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        apply_multiplier(&mut buf, &derivative_multiplier(&self.grid, order));
        self.inverse(&mut buf);
        buf
    }
}

/// `(i k_j)^order` per bin.
pub fn derivative_multiplier(grid: &Grid1D, order: u32) -> Vec<Complex64> {
    let n = grid.n();
    (0..n)
        .map(|j| {
            if order % 2 == 1 && j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, grid.wavenumber(j)).powu(order)
            }
        })
        .collect()
}

fn apply_multiplier(chunks: &mut [Complex64], m: &[Complex64]) {
    for chunk in chunks.chunks_exact_mut(m.len()) {
        chunk.iter_mut().zip(m).for_each(|(z, f)| *z *= f);
    }
}

/// Axis-wise transforms on row-major (x fastest) 2-D data.
#[derive(Clone)]
pub struct Spectral2D {
    grid: Grid2D,
    x: Spectral1D,
    y: Spectral1D,
}

impl Spectral2D {
    pub fn new(grid: Grid2D) -> Self {
        Spectral2D {
            grid,
            x: Spectral1D::new(grid.x),
            y: Spectral1D::new(grid.y),
        }
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }

    /// Runs `f` on the data laid out with `axis` contiguous.
    fn along(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>, axis: Axis, f: impl FnOnce(&Spectral1D, &mut [Complex64])) {
        let (nx, ny) = (self.grid.x.n(), self.grid.y.n());
        match axis {
            Axis::X => f(&self.x, data),
            Axis::Y => {
                scratch.resize(data.len(), Complex64::new(0.0, 0.0));
                Self::transpose(data, scratch, ny, nx);
                f(&self.y, scratch);
                Self::transpose(scratch, data, nx, ny);
            }
        }
    }

    pub fn forward_axis(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>, axis: Axis) {
        self.along(data, scratch, axis, |s, d| s.forward(d));
    }

    pub fn inverse_axis(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>, axis: Axis) {
        self.along(data, scratch, axis, |s, d| s.inverse(d));
    }

    pub fn forward(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.forward_axis(data, scratch, Axis::X);
        self.forward_axis(data, scratch, Axis::Y);
    }

    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.inverse_axis(data, scratch, Axis::Y);
        self.inverse_axis(data, scratch, Axis::X);
    }

    pub fn derivative(&self, data: &[Complex64], axis: Axis, order: u32) -> Vec<Complex64> {
        let mut buf = data.to_vec();
        let mut scratch = Vec::new();
        let m = derivative_multiplier(self.grid.axis(axis), order);
        self.along(&mut buf, &mut scratch, axis, |s, d| {
            s.forward(d);
            apply_multiplier(d, &m);
            s.inverse(d);
        });
        buf
    }

    /// Band-limited interpolation along y at `y` for every x column.
    pub fn interpolate_y(&self, data: &[Complex64], y: f64) -> Vec<Complex64> {
        let (nx, ny) = (self.grid.x.n(), self.grid.y.n());
        let mut buf = data.to_vec();
        let mut scratch = Vec::new();
        self.forward_axis(&mut buf, &mut scratch, Axis::Y);
        let offset = y - self.grid.y.min();
        let mut out = vec![Complex64::new(0.0, 0.0); nx];
        for j in 0..ny {
            let k = self.grid.y.wavenumber(j);
            // symmetric treatment of the Nyquist bin keeps real data real
            let phase = if j == ny / 2 {
                Complex64::new((k * offset).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, k * offset)
            };
            let row = &buf[j * nx..(j + 1) * nx];
            out.iter_mut().zip(row).for_each(|(o, z)| *o += z * phase);
        }
        let scale = 1.0 / ny as f64;
        out.iter_mut().for_each(|z| *z *= scale);
        out
    }
}
