//! Scalar, spinor and matrix-valued fields on a torus grid.

use crate::error::{Error, Result};
use crate::geometry::grid::TorusGrid;
use crate::linalg::CMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Complex scalar field, one value per grid point.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: TorusGrid,
    data: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), grid.num_points());
        ScalarField { grid, data }
    }

    pub fn from_fn(grid: &TorusGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let data = (0..grid.num_points())
            .map(|p| f(&grid.coords(p)))
            .collect();
        ScalarField::new(grid.clone(), data)
    }

    pub fn constant(grid: &TorusGrid, value: Complex64) -> Self {
        ScalarField::new(grid.clone(), vec![value; grid.num_points()])
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn at(&self, point: usize) -> Complex64 {
        self.data[point]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ScalarField::new(self.grid.clone(), self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn partial(&self, axis: usize) -> Self {
        ScalarField::new(self.grid.clone(), self.grid.derivative(&self.data, axis, 1))
    }

    pub fn min_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest imaginary part, for fields required to be real.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &ScalarField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert!(self.grid.same_grid(&other.grid));
        ScalarField::new(
            self.grid.clone(),
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Reciprocal, guarded by the nowhere-vanishing threshold.
    pub fn reciprocal(&self, threshold: f64) -> Result<Self> {
        let min = self.min_abs();
        if min < threshold {
            return Err(Error::VanishingFunction {
                min_abs: min,
                threshold,
            });
        }
        Ok(self.map(|z| 1.0 / z))
    }

    /// ln|f|^2, guarded like `reciprocal`.
    pub fn ln_abs_squared(&self, threshold: f64) -> Result<Self> {
        let min = self.min_abs();
        if min < threshold {
            return Err(Error::VanishingFunction {
                min_abs: min,
                threshold,
            });
        }
        Ok(self.map(|z| Complex64::new(z.norm_sqr().ln(), 0.0)))
    }
}

/// Spinor field with `dim = 2^m` complex components per point,
/// stored point-major.
#[derive(Debug, Clone)]
pub struct SpinorField {
    grid: TorusGrid,
    dim: usize,
    data: Vec<Complex64>,
}

impl SpinorField {
    pub fn new(grid: TorusGrid, dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), grid.num_points() * dim);
        SpinorField { grid, dim, data }
    }

    pub fn zero(grid: &TorusGrid, dim: usize) -> Self {
        SpinorField::new(
            grid.clone(),
            dim,
            vec![Complex64::ZERO; grid.num_points() * dim],
        )
    }

    pub fn from_fn(grid: &TorusGrid, dim: usize, mut f: impl FnMut(&[f64], usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.num_points() * dim);
        for p in 0..grid.num_points() {
            let x = grid.coords(p);
            for comp in 0..dim {
                data.push(f(&x, comp));
            }
        }
        SpinorField::new(grid.clone(), dim, data)
    }

    /// White-noise spinor with entries uniform in the complex unit square.
    pub fn random(grid: &TorusGrid, dim: usize, rng: &mut impl Rng) -> Self {
        let data = (0..grid.num_points() * dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpinorField::new(grid.clone(), dim, data)
    }

    /// Random band-limited spinor: Fourier content only on modes with
    /// `|k_mu| <= band` on every axis.
    pub fn random_band_limited(
        grid: &TorusGrid,
        dim: usize,
        band: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let n = grid.points_per_axis();
        let axes = grid.axes();
        let mut f = SpinorField::zero(grid, dim);
        // sum of plane waves exp(i k.x) with random complex amplitudes
        let mut modes: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..axes {
            let mut next = Vec::new();
            for stem in &modes {
                for k in -(band as i64)..=(band as i64) {
                    if k.unsigned_abs() as usize >= n / 2 {
                        continue;
                    }
                    let mut s = stem.clone();
                    s.push(k);
                    next.push(s);
                }
            }
            modes = next;
        }
        for mode in &modes {
            let amps: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            for p in 0..grid.num_points() {
                let x = grid.coords(p);
                let phase: f64 = mode
                    .iter()
                    .zip(x.iter())
                    .map(|(&k, &xi)| k as f64 * xi * 2.0 * std::f64::consts::PI / grid.length())
                    .sum();
                let wave = Complex64::new(0.0, phase).exp();
                for comp in 0..dim {
                    f.data[p * dim + comp] += amps[comp] * wave;
                }
            }
        }
        let scale = 1.0 / (modes.len() as f64).sqrt();
        for z in &mut f.data {
            *z *= scale;
        }
        f
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn at(&self, point: usize) -> &[Complex64] {
        &self.data[point * self.dim..(point + 1) * self.dim]
    }

    pub fn component(&self, comp: usize) -> ScalarField {
        let data = (0..self.grid.num_points())
            .map(|p| self.data[p * self.dim + comp])
            .collect();
        ScalarField::new(self.grid.clone(), data)
    }

    /// Builds a spinor from per-component scalar fields.
    pub fn from_components(comps: &[ScalarField]) -> Self {
        let grid = comps[0].grid().clone();
        let dim = comps.len();
        let mut data = vec![Complex64::ZERO; grid.num_points() * dim];
        for (cix, c) in comps.iter().enumerate() {
            assert!(grid.same_grid(c.grid()));
            for p in 0..grid.num_points() {
                data[p * dim + cix] = c.at(p);
            }
        }
        SpinorField::new(grid, dim, data)
    }

    pub fn partial(&self, axis: usize) -> Self {
        SpinorField::new(
            self.grid.clone(),
            self.dim,
            self.grid.derivative(&self.data, axis, self.dim),
        )
    }

    pub fn conj(&self) -> Self {
        SpinorField::new(
            self.grid.clone(),
            self.dim,
            self.data.iter().map(|z| z.conj()).collect(),
        )
    }

    pub fn add(&self, other: &SpinorField) -> Self {
        assert!(self.grid.same_grid(&other.grid) && self.dim == other.dim);
        SpinorField::new(
            self.grid.clone(),
            self.dim,
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        assert!(self.grid.same_grid(&other.grid) && self.dim == other.dim);
        SpinorField::new(
            self.grid.clone(),
            self.dim,
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        SpinorField::new(
            self.grid.clone(),
            self.dim,
            self.data.iter().map(|z| z * s).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SpinorField) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// L2 inner product `<psi, phi> = integral psi^dag phi`, conjugate
    /// linear in the first slot; flat volume element.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        assert!(self.grid.same_grid(&other.grid) && self.dim == other.dim);
        let sum: Complex64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        sum * Complex64::new(self.grid.cell_volume(), 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }
}

/// Matrix-valued field: either one constant matrix or one matrix per point
/// (row-major entries, point-major).
#[derive(Debug, Clone)]
pub enum MatrixField {
    Constant { dim: usize, mat: CMatrix },
    PerPoint { dim: usize, data: Vec<Complex64> },
}

impl MatrixField {
    pub fn constant(mat: CMatrix) -> Self {
        let dim = mat.nrows();
        assert_eq!(dim, mat.ncols());
        MatrixField::Constant { dim, mat }
    }

    pub fn zero_constant(dim: usize) -> Self {
        MatrixField::constant(CMatrix::zeros(dim, dim))
    }

    pub fn per_point_from_fn(
        grid: &TorusGrid,
        dim: usize,
        mut f: impl FnMut(usize) -> CMatrix,
    ) -> Self {
        let pts = grid.num_points();
        let mut data = vec![Complex64::ZERO; pts * dim * dim];
        for p in 0..pts {
            let m = f(p);
            debug_assert_eq!(m.nrows(), dim);
            for r in 0..dim {
                for s in 0..dim {
                    data[p * dim * dim + r * dim + s] = m[(r, s)];
                }
            }
        }
        MatrixField::PerPoint { dim, data }
    }

    /// Block-diagonal multiplication field `diag(f 1, g 1)` in the chiral
    /// basis.
    pub fn chiral_diag(grid: &TorusGrid, dim: usize, f: &ScalarField, g: &ScalarField) -> Self {
        let pts = grid.num_points();
        let half = dim / 2;
        let mut data = vec![Complex64::ZERO; pts * dim * dim];
        for p in 0..pts {
            for r in 0..dim {
                let v = if r < half { f.at(p) } else { g.at(p) };
                data[p * dim * dim + r * dim + r] = v;
            }
        }
        MatrixField::PerPoint { dim, data }
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixField::Constant { dim, .. } | MatrixField::PerPoint { dim, .. } => *dim,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixField::Constant { .. })
    }

    pub fn num_points(&self) -> Option<usize> {
        match self {
            MatrixField::Constant { .. } => None,
            MatrixField::PerPoint { dim, data } => Some(data.len() / (dim * dim)),
        }
    }

    pub fn entry(&self, point: usize, r: usize, s: usize) -> Complex64 {
        match self {
            MatrixField::Constant { mat, .. } => mat[(r, s)],
            MatrixField::PerPoint { dim, data } => data[point * dim * dim + r * dim + s],
        }
    }

    pub fn matrix_at(&self, point: usize) -> CMatrix {
        let dim = self.dim();
        CMatrix::from_fn(dim, dim, |r, s| self.entry(point, r, s))
    }

    /// y += M(p) x for the spinor components at one point.
    pub fn apply_at(&self, point: usize, x: &[Complex64], y: &mut [Complex64]) {
        let dim = self.dim();
        match self {
            MatrixField::Constant { mat, .. } => {
                for r in 0..dim {
                    let mut acc = Complex64::ZERO;
                    for s in 0..dim {
                        acc += mat[(r, s)] * x[s];
                    }
                    y[r] += acc;
                }
            }
            MatrixField::PerPoint { data, .. } => {
                let base = point * dim * dim;
                for r in 0..dim {
                    let mut acc = Complex64::ZERO;
                    for s in 0..dim {
                        acc += data[base + r * dim + s] * x[s];
                    }
                    y[r] += acc;
                }
            }
        }
    }

    /// Pointwise product, `self(p) * other(p)`.
    pub fn mul(&self, other: &MatrixField) -> MatrixField {
        let dim = self.dim();
        assert_eq!(dim, other.dim());
        match (self, other) {
            (MatrixField::Constant { mat: a, .. }, MatrixField::Constant { mat: b, .. }) => {
                MatrixField::constant(a * b)
            }
            _ => {
                let pts = self
                    .num_points()
                    .or(other.num_points())
                    .expect("at least one side per-point");
                let mut data = vec![Complex64::ZERO; pts * dim * dim];
                for p in 0..pts {
                    for r in 0..dim {
                        for s in 0..dim {
                            let mut acc = Complex64::ZERO;
                            for t in 0..dim {
                                acc += self.entry(p, r, t) * other.entry(p, t, s);
                            }
                            data[p * dim * dim + r * dim + s] = acc;
                        }
                    }
                }
                MatrixField::PerPoint { dim, data }
            }
        }
    }

    pub fn add(&self, other: &MatrixField) -> MatrixField {
        let dim = self.dim();
        assert_eq!(dim, other.dim());
        match (self, other) {
            (MatrixField::Constant { mat: a, .. }, MatrixField::Constant { mat: b, .. }) => {
                MatrixField::constant(a + b)
            }
            _ => {
                let pts = self
                    .num_points()
                    .or(other.num_points())
                    .expect("at least one side per-point");
                let mut data = vec![Complex64::ZERO; pts * dim * dim];
                for p in 0..pts {
                    for r in 0..dim {
                        for s in 0..dim {
                            data[p * dim * dim + r * dim + s] =
                                self.entry(p, r, s) + other.entry(p, r, s);
                        }
                    }
                }
                MatrixField::PerPoint { dim, data }
            }
        }
    }

    pub fn scale(&self, z: Complex64) -> MatrixField {
        match self {
            MatrixField::Constant { mat, .. } => MatrixField::constant(mat.map(|w| w * z)),
            MatrixField::PerPoint { dim, data } => MatrixField::PerPoint {
                dim: *dim,
                data: data.iter().map(|w| w * z).collect(),
            },
        }
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> MatrixField {
        match self {
            MatrixField::Constant { mat, .. } => MatrixField::constant(mat.adjoint()),
            MatrixField::PerPoint { dim, data } => {
                let dim = *dim;
                let pts = data.len() / (dim * dim);
                let mut out = vec![Complex64::ZERO; data.len()];
                for p in 0..pts {
                    for r in 0..dim {
                        for s in 0..dim {
                            out[p * dim * dim + r * dim + s] =
                                data[p * dim * dim + s * dim + r].conj();
                        }
                    }
                }
                MatrixField::PerPoint { dim, data: out }
            }
        }
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> MatrixField {
        match self {
            MatrixField::Constant { mat, .. } => MatrixField::constant(mat.map(|z| z.conj())),
            MatrixField::PerPoint { dim, data } => MatrixField::PerPoint {
                dim: *dim,
                data: data.iter().map(|z| z.conj()).collect(),
            },
        }
    }

    /// Partial derivative along `axis`; constants derive to zero.
    pub fn partial(&self, grid: &TorusGrid, axis: usize) -> MatrixField {
        match self {
            MatrixField::Constant { dim, .. } => MatrixField::zero_constant(*dim),
            MatrixField::PerPoint { dim, data } => MatrixField::PerPoint {
                dim: *dim,
                data: grid.derivative(data, axis, dim * dim),
            },
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            MatrixField::Constant { mat, .. } => crate::linalg::max_abs(mat),
            MatrixField::PerPoint { data, .. } => {
                data.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        }
    }

    pub fn max_abs_diff(&self, other: &MatrixField) -> f64 {
        let dim = self.dim();
        assert_eq!(dim, other.dim());
        match (self, other) {
            (MatrixField::Constant { mat: a, .. }, MatrixField::Constant { mat: b, .. }) => {
                crate::linalg::max_abs_diff(a, b)
            }
            _ => {
                let pts = self
                    .num_points()
                    .or(other.num_points())
                    .expect("at least one side per-point");
                let mut dev: f64 = 0.0;
                for p in 0..pts {
                    for r in 0..dim {
                        for s in 0..dim {
                            dev = dev.max((self.entry(p, r, s) - other.entry(p, r, s)).norm());
                        }
                    }
                }
                dev
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity};

    #[test]
    fn scalar_field_reciprocal_guards_zeros() {
        let grid = TorusGrid::standard(1, 8).unwrap();
        let f = ScalarField::from_fn(&grid, |x| Complex64::new(x[0].sin(), 0.0));
        assert!(f.reciprocal(1e-8).is_err());
        let g = ScalarField::from_fn(&grid, |x| Complex64::new(2.0 + x[0].sin(), 0.0));
        let r = g.reciprocal(1e-8).unwrap();
        assert!(r.mul(&g).max_abs_diff(&ScalarField::constant(&grid, c(1.0, 0.0))) < 1e-14);
    }

    #[test]
    fn matrix_field_mul_constant_stays_constant() {
        let a = MatrixField::constant(identity(2).map(|z| z * c(2.0, 0.0)));
        let b = MatrixField::constant(identity(2));
        assert!(a.mul(&b).is_constant());
    }

    #[test]
    fn spinor_component_roundtrip() {
        let grid = TorusGrid::standard(2, 4).unwrap();
        let f = SpinorField::from_fn(&grid, 4, |x, comp| {
            Complex64::new(x[0] + comp as f64, x[1])
        });
        let comps: Vec<ScalarField> = (0..4).map(|k| f.component(k)).collect();
        let back = SpinorField::from_components(&comps);
        assert!(f.max_abs_diff(&back) < 1e-15);
    }
}
