//! Metric fields, vielbeins and quadrature.

use crate::error::{Error, Result};
use crate::geometry::field::ScalarField;
use crate::geometry::grid::TorusGrid;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Real symmetric metric g_{mu nu} per grid point.
#[derive(Debug, Clone)]
pub struct MetricField {
    grid: TorusGrid,
    n: usize,
    /// n*n entries per point, row-major.
    data: Vec<f64>,
}

impl MetricField {
    pub fn flat(grid: &TorusGrid) -> Self {
        let n = grid.axes();
        let mut data = vec![0.0; grid.num_points() * n * n];
        for p in 0..grid.num_points() {
            for a in 0..n {
                data[p * n * n + a * n + a] = 1.0;
            }
        }
        MetricField {
            grid: grid.clone(),
            n,
            data,
        }
    }

    pub fn from_fn(grid: &TorusGrid, mut f: impl FnMut(&[f64]) -> DMatrix<f64>) -> Self {
        let n = grid.axes();
        let mut data = vec![0.0; grid.num_points() * n * n];
        for p in 0..grid.num_points() {
            let g = f(&grid.coords(p));
            assert_eq!(g.nrows(), n);
            for r in 0..n {
                for s in 0..n {
                    data[p * n * n + r * n + s] = 0.5 * (g[(r, s)] + g[(s, r)]);
                }
            }
        }
        MetricField {
            grid: grid.clone(),
            n,
            data,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, point: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |r, s| self.data[point * n * n + r * n + s])
    }

    pub fn entry(&self, point: usize, r: usize, s: usize) -> f64 {
        self.data[point * self.n * self.n + r * self.n + s]
    }

    pub fn is_flat(&self, tol: f64) -> bool {
        let n = self.n;
        for p in 0..self.grid.num_points() {
            for r in 0..n {
                for s in 0..n {
                    let target = if r == s { 1.0 } else { 0.0 };
                    if (self.entry(p, r, s) - target).abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Component as a complex scalar field (for derivatives).
    pub fn component_field(&self, r: usize, s: usize) -> ScalarField {
        let data = (0..self.grid.num_points())
            .map(|p| Complex64::new(self.entry(p, r, s), 0.0))
            .collect();
        ScalarField::new(self.grid.clone(), data)
    }
}

/// Orthonormal frame: e^a_mu with inverse e^mu_a and sqrt(det g) per point.
#[derive(Debug, Clone)]
pub struct Vielbein {
    grid: TorusGrid,
    n: usize,
    /// e^a_mu, row a, column mu, n*n per point.
    e: Vec<f64>,
    /// e^mu_a, row mu, column a.
    e_inv: Vec<f64>,
    sqrt_det_g: Vec<f64>,
    metric: MetricField,
    flat: bool,
}

impl Vielbein {
    pub fn flat(grid: &TorusGrid) -> Self {
        let n = grid.axes();
        let pts = grid.num_points();
        let mut e = vec![0.0; pts * n * n];
        for p in 0..pts {
            for a in 0..n {
                e[p * n * n + a * n + a] = 1.0;
            }
        }
        Vielbein {
            grid: grid.clone(),
            n,
            e_inv: e.clone(),
            e,
            sqrt_det_g: vec![1.0; pts],
            metric: MetricField::flat(grid),
            flat: true,
        }
    }

    /// Cholesky-type square root of the metric: g = E^T E with E = e^a_mu.
    pub fn from_metric(metric: &MetricField) -> Result<Self> {
        let grid = metric.grid().clone();
        let n = metric.n();
        let pts = grid.num_points();
        let mut e = vec![0.0; pts * n * n];
        let mut e_inv = vec![0.0; pts * n * n];
        let mut sqrt_det_g = vec![0.0; pts];
        for p in 0..pts {
            let g = metric.at(p);
            let chol = g
                .clone()
                .cholesky()
                .ok_or(Error::NotPositiveDefinite { point: p })?;
            let l = chol.l();
            // e^a_mu = (L^T)_{a mu}; then sum_a e^a_mu e^a_nu = (L L^T)_{mu nu} = g
            let et = l.transpose();
            let et_inv = et
                .clone()
                .try_inverse()
                .ok_or(Error::NotPositiveDefinite { point: p })?;
            for a in 0..n {
                for mu in 0..n {
                    e[p * n * n + a * n + mu] = et[(a, mu)];
                    e_inv[p * n * n + mu * n + a] = et_inv[(mu, a)];
                }
            }
            sqrt_det_g[p] = g.determinant().abs().sqrt();
        }
        let flat = metric.is_flat(1e-14);
        Ok(Vielbein {
            grid,
            n,
            e,
            e_inv,
            sqrt_det_g,
            metric: metric.clone(),
            flat,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    /// e^a_mu at a point.
    pub fn e(&self, point: usize, a: usize, mu: usize) -> f64 {
        self.e[point * self.n * self.n + a * self.n + mu]
    }

    /// Inverse vielbein e^mu_a at a point.
    pub fn e_inv(&self, point: usize, mu: usize, a: usize) -> f64 {
        self.e_inv[point * self.n * self.n + mu * self.n + a]
    }

    pub fn sqrt_det_g(&self, point: usize) -> f64 {
        self.sqrt_det_g[point]
    }

    /// Inverse metric g^{mu nu} at a point.
    pub fn inverse_metric_at(&self, point: usize) -> DMatrix<f64> {
        let n = self.n;
        // g^{mu nu} = e^mu_a e^nu_a
        DMatrix::from_fn(n, n, |mu, nu| {
            (0..n)
                .map(|a| self.e_inv(point, mu, a) * self.e_inv(point, nu, a))
                .sum()
        })
    }

    /// Max deviation of the duality and metric-reconstruction relations.
    pub fn invariant_dev(&self) -> f64 {
        let n = self.n;
        let mut dev: f64 = 0.0;
        for p in 0..self.grid.num_points() {
            for a in 0..n {
                for b in 0..n {
                    let duality: f64 =
                        (0..n).map(|mu| self.e(p, a, mu) * self.e_inv(p, mu, b)).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    dev = dev.max((duality - target).abs());
                }
            }
            for mu in 0..n {
                for nu in 0..n {
                    let recon: f64 = (0..n).map(|a| self.e(p, a, mu) * self.e(p, a, nu)).sum();
                    dev = dev.max((recon - self.metric.entry(p, mu, nu)).abs());
                }
            }
        }
        dev
    }
}

/// Riemann-sum integral of a scalar field against the metric volume.
pub fn integrate(field: &ScalarField, frame: &Vielbein) -> Complex64 {
    let grid = field.grid();
    let cell = grid.cell_volume();
    let mut sum = Complex64::ZERO;
    for p in 0..grid.num_points() {
        sum += field.at(p) * frame.sqrt_det_g(p);
    }
    sum * cell
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_metric_vielbein_is_identity() {
        let grid = TorusGrid::standard(4, 4).unwrap();
        let v = Vielbein::from_metric(&MetricField::flat(&grid)).unwrap();
        assert!(v.invariant_dev() < 1e-14);
        assert!(v.is_flat());
        assert!((v.e(0, 0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stretched_metric_vielbein() {
        let grid = TorusGrid::standard(4, 4).unwrap();
        let g = MetricField::from_fn(&grid, |_| {
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0, 1.0, 1.0]))
        });
        let v = Vielbein::from_metric(&g).unwrap();
        assert!((v.e(0, 0, 0) - 2.0).abs() < 1e-14);
        assert!((v.sqrt_det_g(0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn random_spd_metric_reconstructs() {
        // derived check: g = e^a_mu e^b_nu delta_ab to 1e-12
        let grid = TorusGrid::standard(2, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut draws = Vec::new();
        for _ in 0..grid.num_points() {
            let a = DMatrix::<f64>::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            draws.push(&a * a.transpose() + DMatrix::identity(2, 2) * 0.5);
        }
        let g = {
            let draws = draws.clone();
            let grid2 = grid.clone();
            MetricField::from_fn(&grid, move |x| {
                // recover point index from coords
                let p = (0..grid2.num_points())
                    .find(|&p| grid2.coords(p) == x)
                    .unwrap();
                draws[p].clone()
            })
        };
        let v = Vielbein::from_metric(&g).unwrap();
        assert!(v.invariant_dev() < 1e-12);
    }

    #[test]
    fn rejects_non_spd_metric() {
        let grid = TorusGrid::standard(2, 4).unwrap();
        let g = MetricField::from_fn(&grid, |_| {
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]))
        });
        assert!(matches!(
            Vielbein::from_metric(&g),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn integrate_trigonometric_exactly() {
        let grid = TorusGrid::standard(4, 4).unwrap();
        let frame = Vielbein::flat(&grid);
        let vol = (2.0 * PI).powi(4);
        let one = ScalarField::constant(&grid, Complex64::new(1.0, 0.0));
        assert!((integrate(&one, &frame).re - vol).abs() < 1e-9 * vol);

        let s = ScalarField::from_fn(&grid, |x| Complex64::new(x[0].sin(), 0.0));
        assert!(integrate(&s, &frame).norm() < 1e-10);

        let s2 = ScalarField::from_fn(&grid, |x| Complex64::new(x[0].sin().powi(2), 0.0));
        assert!((integrate(&s2, &frame).re - vol / 2.0).abs() < 1e-10 * vol);
    }
}
