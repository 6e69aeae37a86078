//! Discretized periodic flat torus.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Derivative discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivMode {
    /// Fourier (spectral) derivative; identities hold to near machine
    /// precision on band-limited data. Default for verification runs.
    Spectral,
    /// Second-order central finite difference, kept as a cross-check.
    CentralDiff,
}

/// Periodic grid on the flat torus `[0, L)^n` with N points per axis.
#[derive(Clone)]
pub struct TorusGrid {
    axes: usize,
    points_per_axis: usize,
    length: f64,
    mode: DerivMode,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid")
            .field("axes", &self.axes)
            .field("points_per_axis", &self.points_per_axis)
            .field("length", &self.length)
            .field("mode", &self.mode)
            .finish()
    }
}

impl TorusGrid {
    pub fn new(axes: usize, points_per_axis: usize, length: f64, mode: DerivMode) -> Result<Self> {
        if axes == 0 || axes > 6 {
            return Err(Error::InvalidArgument(format!(
                "axis count {axes} outside supported range 1..=6"
            )));
        }
        if points_per_axis < 4 {
            return Err(Error::InvalidArgument(format!(
                "need at least 4 points per axis, got {points_per_axis}"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(TorusGrid {
            axes,
            points_per_axis,
            length,
            mode,
            fft_fwd: planner.plan_fft_forward(points_per_axis),
            fft_inv: planner.plan_fft_inverse(points_per_axis),
        })
    }

    /// Default torus for dimension `n = axes`: `N` points, period `2 pi`,
    /// spectral derivatives.
    pub fn standard(axes: usize, points_per_axis: usize) -> Result<Self> {
        TorusGrid::new(axes, points_per_axis, 2.0 * PI, DerivMode::Spectral)
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mode(&self) -> DerivMode {
        self.mode
    }

    pub fn with_mode(&self, mode: DerivMode) -> Self {
        let mut g = self.clone();
        g.mode = mode;
        g
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points_per_axis as f64
    }

    pub fn num_points(&self) -> usize {
        self.points_per_axis.pow(self.axes as u32)
    }

    /// Cell volume `Delta^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.axes as i32)
    }

    /// Stride of `axis` in the flat point index (axis 0 is slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow((self.axes - 1 - axis) as u32)
    }

    pub fn axis_index(&self, point: usize, axis: usize) -> usize {
        (point / self.stride(axis)) % self.points_per_axis
    }

    /// Coordinates of a flat point index.
    pub fn coords(&self, point: usize) -> Vec<f64> {
        (0..self.axes)
            .map(|a| self.axis_index(point, a) as f64 * self.spacing())
            .collect()
    }

    pub fn same_grid(&self, other: &TorusGrid) -> bool {
        self.axes == other.axes
            && self.points_per_axis == other.points_per_axis
            && self.length == other.length
            && self.mode == other.mode
    }

    pub fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self, other
            )))
        }
    }

    /// Signed integer mode number for FFT bin `j`.
    fn mode_number(&self, j: usize) -> i64 {
        let n = self.points_per_axis;
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Partial derivative along `axis` of `data` holding `comps`
    /// interleaved complex components per grid point.
    pub fn derivative(&self, data: &[Complex64], axis: usize, comps: usize) -> Vec<Complex64> {
        assert!(axis < self.axes, "axis out of range");
        assert_eq!(data.len(), self.num_points() * comps);
        match self.mode {
            DerivMode::Spectral => self.derivative_spectral(data, axis, comps),
            DerivMode::CentralDiff => self.derivative_central(data, axis, comps),
        }
    }

    fn for_each_line(
        &self,
        axis: usize,
        comps: usize,
        mut f: impl FnMut(/*base*/ usize, /*stride*/ usize),
    ) {
        let n = self.points_per_axis;
        let stride_pts = self.stride(axis);
        let stride = stride_pts * comps;
        let total = self.num_points() * comps;
        // walk all (point, comp) slots whose axis index is zero
        let block = stride * n; // span of one full line set
        let mut base_block = 0;
        while base_block < total {
            for offset in 0..stride {
                f(base_block + offset, stride);
            }
            base_block += block;
        }
    }

    fn derivative_spectral(
        &self,
        data: &[Complex64],
        axis: usize,
        comps: usize,
    ) -> Vec<Complex64> {
        let n = self.points_per_axis;
        let two_pi_over_l = 2.0 * PI / self.length;
        let inv_n = 1.0 / n as f64;
        let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
        let mut out = vec![Complex64::ZERO; data.len()];
        let mut line = vec![Complex64::ZERO; n];
        self.for_each_line(axis, comps, |base, stride| {
            for k in 0..n {
                line[k] = data[base + k * stride];
            }
            self.fft_fwd.process(&mut line);
            for (j, v) in line.iter_mut().enumerate() {
                // odd-order derivative: zero the Nyquist mode
                let factor = if Some(j) == nyquist {
                    Complex64::ZERO
                } else {
                    Complex64::new(0.0, self.mode_number(j) as f64 * two_pi_over_l)
                };
                *v *= factor * inv_n;
            }
            self.fft_inv.process(&mut line);
            for k in 0..n {
                out[base + k * stride] = line[k];
            }
        });
        out
    }

    fn derivative_central(&self, data: &[Complex64], axis: usize, comps: usize) -> Vec<Complex64> {
        let n = self.points_per_axis;
        let inv_two_h = 1.0 / (2.0 * self.spacing());
        let mut out = vec![Complex64::ZERO; data.len()];
        self.for_each_line(axis, comps, |base, stride| {
            for k in 0..n {
                let up = (k + 1) % n;
                let down = (k + n - 1) % n;
                out[base + k * stride] =
                    (data[base + up * stride] - data[base + down * stride]) * inv_two_h;
            }
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TorusGrid::standard(0, 8).is_err());
        assert!(TorusGrid::standard(2, 3).is_err());
        assert!(TorusGrid::new(2, 8, 0.0, DerivMode::Spectral).is_err());
    }

    #[test]
    fn spectral_derivative_of_fourier_mode_is_exact() {
        // d/dx exp(i k x) = i k exp(i k x), k up to N/2 - 1
        let grid = TorusGrid::standard(2, 16).unwrap();
        for axis in 0..2 {
            for k in [-7i64, -3, 1, 2, 7] {
                let data: Vec<Complex64> = (0..grid.num_points())
                    .map(|p| {
                        let x = grid.coords(p);
                        (Complex64::new(0.0, k as f64 * x[axis])).exp()
                    })
                    .collect();
                let d = grid.derivative(&data, axis, 1);
                let max_dev = data
                    .iter()
                    .zip(d.iter())
                    .map(|(f, df)| (df - Complex64::new(0.0, k as f64) * f).norm())
                    .fold(0.0, f64::max);
                assert!(max_dev < 1e-12, "axis {axis} k {k}: dev {max_dev}");
            }
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let grid = TorusGrid::standard(3, 8).unwrap();
        let data = vec![Complex64::new(2.5, -1.0); grid.num_points()];
        for mode in [DerivMode::Spectral, DerivMode::CentralDiff] {
            let g = grid.with_mode(mode);
            let d = g.derivative(&data, 1, 1);
            assert!(d.iter().all(|z| z.norm() < 1e-13));
        }
    }

    #[test]
    fn central_difference_second_order() {
        // error of (f(x+h)-f(x-h))/2h for f = sin is bounded by h^2/6
        let grid = TorusGrid::new(1, 64, 2.0 * PI, DerivMode::CentralDiff).unwrap();
        let data: Vec<Complex64> = (0..64)
            .map(|p| Complex64::new((grid.coords(p)[0]).sin(), 0.0))
            .collect();
        let d = grid.derivative(&data, 0, 1);
        let h = grid.spacing();
        let max_err = (0..64)
            .map(|p| (d[p].re - grid.coords(p)[0].cos()).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= h * h / 6.0 + 1e-12);
        assert!(max_err > 1e-6); // genuinely second order, not spectral
    }

    #[test]
    fn interleaved_components_derive_independently(){
        let grid = TorusGrid::standard(2, 8).unwrap();
        let pts = grid.num_points();
        let mut data = vec![Complex64::ZERO; pts * 2];
        for p in 0..pts {
            let x = grid.coords(p);
            data[2 * p] = Complex64::new(x[0].sin(), 0.0);
            data[2 * p + 1] = Complex64::new(0.0, (2.0 * x[1]).cos());
        }
        let d0 = grid.derivative(&data, 0, 2);
        let d1 = grid.derivative(&data, 1, 2);
        for p in 0..pts {
            let x = grid.coords(p);
            assert!((d0[2 * p].re - x[0].cos()).abs() < 1e-12);
            assert!(d0[2 * p + 1].norm() < 1e-12);
            assert!(d1[2 * p].norm() < 1e-12);
            assert!((d1[2 * p + 1].im + 2.0 * (2.0 * x[1]).sin()).abs() < 1e-11);
        }
    }
}
