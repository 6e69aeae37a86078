//! Differential forms on the torus with Hodge duality and Clifford action.
//!
//! Components are stored on strictly increasing index tuples; the implied
//! full antisymmetric array is what enters every formula. The Hodge dual
//! uses the epsilon formula with the `1/(n-k)!` normalization and contracted
//! indices first, with orientation pinned by `eps_{01..n-1} = +1`; every
//! downstream sign in the toolkit is pinned against that choice.

use crate::clifford::{all_tuples, levi_civita_sign, GammaRep};
use crate::error::{Error, Result};
use crate::geometry::field::{MatrixField, ScalarField};
use crate::geometry::grid::TorusGrid;
use crate::geometry::metric::Vielbein;
use crate::linalg::{identity, CMatrix};
use num_complex::Complex64;

/// Strictly increasing index tuples of length `k` from `0..n`,
/// lexicographic.
pub fn sorted_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for v in start..n {
            current.push(v);
            rec(n, k, v + 1, current, out);
            current.pop();
        }
    }
    rec(n, k, 0, &mut current, &mut out);
    out
}

/// Sorts a tuple, returning `(rank_keyable sorted tuple, sign)`;
/// `None` when an index repeats.
fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = tuple.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len().saturating_sub(1 + i) {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    Some((v, sign))
}

/// Antisymmetric degree-`k` component array per point.
#[derive(Debug, Clone)]
pub struct DifferentialForm {
    grid: TorusGrid,
    degree: usize,
    tuples: Vec<Vec<usize>>,
    /// `comps[t][p]` is the component on sorted tuple `t` at point `p`.
    comps: Vec<Vec<Complex64>>,
}

impl DifferentialForm {
    pub fn zero(grid: &TorusGrid, degree: usize) -> Result<Self> {
        let n = grid.axes();
        if degree > n {
            return Err(Error::InvalidArgument(format!(
                "form degree {degree} exceeds dimension {n}"
            )));
        }
        let tuples = sorted_tuples(n, degree);
        let comps = vec![vec![Complex64::ZERO; grid.num_points()]; tuples.len()];
        Ok(DifferentialForm {
            grid: grid.clone(),
            degree,
            tuples,
            comps,
        })
    }

    /// Degree-0 form from a scalar field.
    pub fn from_scalar(f: &ScalarField) -> Self {
        DifferentialForm {
            grid: f.grid().clone(),
            degree: 0,
            tuples: vec![vec![]],
            comps: vec![f.data().to_vec()],
        }
    }

    /// 1-form with the given component fields.
    pub fn one_form(grid: &TorusGrid, comps: &[ScalarField]) -> Result<Self> {
        if comps.len() != grid.axes() {
            return Err(Error::DimensionMismatch(format!(
                "1-form needs {} components, got {}",
                grid.axes(),
                comps.len()
            )));
        }
        let mut form = DifferentialForm::zero(grid, 1)?;
        for (mu, f) in comps.iter().enumerate() {
            grid.check_same(f.grid())?;
            form.comps[mu] = f.data().to_vec();
        }
        Ok(form)
    }

    /// Constant 1-form.
    pub fn constant_one_form(grid: &TorusGrid, values: &[f64]) -> Result<Self> {
        let comps: Vec<ScalarField> = values
            .iter()
            .map(|&v| ScalarField::constant(grid, Complex64::new(v, 0.0)))
            .collect();
        DifferentialForm::one_form(grid, &comps)
    }

    pub fn from_fn(
        grid: &TorusGrid,
        degree: usize,
        mut f: impl FnMut(&[usize], &[f64]) -> Complex64,
    ) -> Result<Self> {
        let mut form = DifferentialForm::zero(grid, degree)?;
        for (t, tuple) in form.tuples.clone().iter().enumerate() {
            for p in 0..grid.num_points() {
                form.comps[t][p] = f(tuple, &grid.coords(p));
            }
        }
        Ok(form)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    fn rank(&self, sorted: &[usize]) -> usize {
        self.tuples
            .binary_search_by(|t| t.as_slice().cmp(sorted))
            .expect("tuple in range")
    }

    /// Component on a sorted tuple.
    pub fn comp(&self, sorted: &[usize], point: usize) -> Complex64 {
        self.comps[self.rank(sorted)][point]
    }

    pub fn set_comp(&mut self, sorted: &[usize], point: usize, value: Complex64) {
        let r = self.rank(sorted);
        self.comps[r][point] = value;
    }

    /// Full-array component with arbitrary index order (antisymmetric
    /// extension of the stored sorted components).
    pub fn full(&self, indices: &[usize], point: usize) -> Complex64 {
        debug_assert_eq!(indices.len(), self.degree);
        match sort_with_sign(indices) {
            None => Complex64::ZERO,
            Some((sorted, sign)) => self.comp(&sorted, point) * sign,
        }
    }

    pub fn component_field(&self, sorted: &[usize]) -> ScalarField {
        ScalarField::new(self.grid.clone(), self.comps[self.rank(sorted)].clone())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            for z in comp.iter_mut() {
                *z = f(*z);
            }
        }
        out
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map(|w| w * z)
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        if self.degree != other.degree {
            return Err(Error::DimensionMismatch("form degrees differ".into()));
        }
        let mut out = self.clone();
        for (t, comp) in out.comps.iter_mut().enumerate() {
            for (p, z) in comp.iter_mut().enumerate() {
                *z += other.comps[t][p];
            }
        }
        Ok(out)
    }

    /// Pointwise scale by a scalar field.
    pub fn mul_scalar(&self, f: &ScalarField) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            for (p, z) in comp.iter_mut().enumerate() {
                *z *= f.at(p);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DifferentialForm) -> f64 {
        assert_eq!(self.degree, other.degree);
        self.comps
            .iter()
            .zip(other.comps.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// Componentwise partial derivative.
    pub fn partial(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            *comp = self.grid.derivative(comp, axis, 1);
        }
        out
    }

    /// Exterior derivative.
    pub fn exterior_derivative(&self) -> Result<Self> {
        let n = self.grid.axes();
        if self.degree == n {
            // d of a top form is the zero (n+1 ~ absent) form; by
            // convention return the zero top-degree form's successor as
            // a zero n-form is not representable, so keep degree n zero.
            return DifferentialForm::zero(&self.grid, n);
        }
        let mut out = DifferentialForm::zero(&self.grid, self.degree + 1)?;
        let derivs: Vec<DifferentialForm> = (0..n).map(|axis| self.partial(axis)).collect();
        let out_tuples = out.tuples.clone();
        for (t, tuple) in out_tuples.iter().enumerate() {
            for (j, &mu) in tuple.iter().enumerate() {
                let mut rest = tuple.clone();
                rest.remove(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let d = &derivs[mu];
                let r = d.rank(&rest);
                for p in 0..self.grid.num_points() {
                    out.comps[t][p] += d.comps[r][p] * sign;
                }
            }
        }
        Ok(out)
    }

    /// Hodge dual against the frame's metric.
    pub fn hodge_dual(&self, frame: &Vielbein) -> Result<Self> {
        self.grid.check_same(frame.grid())?;
        let n = self.grid.axes();
        let k = self.degree;
        let mut out = DifferentialForm::zero(&self.grid, n - k)?;
        let pts = self.grid.num_points();
        let norm = {
            let mut f = 1.0;
            for j in 1..=(n - k) {
                f *= j as f64;
            }
            1.0 / f
        };
        let free_tuples = out.tuples.clone();
        if frame.is_flat() {
            // orthonormal coordinate frame: plain epsilon contraction
            for (t, free) in free_tuples.iter().enumerate() {
                for mu_tuple in all_tuples(n, k) {
                    let mut full = mu_tuple.clone();
                    full.extend_from_slice(free);
                    let sign = levi_civita_sign(&full, n)?;
                    if sign == 0 {
                        continue;
                    }
                    let s = Complex64::new(sign as f64 * norm, 0.0);
                    for p in 0..pts {
                        out.comps[t][p] += s * self.full(&mu_tuple, p);
                    }
                }
            }
        } else {
            for p in 0..pts {
                let ginv = frame.inverse_metric_at(p);
                let sg = frame.sqrt_det_g(p);
                for (t, free) in free_tuples.iter().enumerate() {
                    let mut acc = Complex64::ZERO;
                    for mu_tuple in all_tuples(n, k) {
                        let mut full = mu_tuple.clone();
                        full.extend_from_slice(free);
                        let sign = levi_civita_sign(&full, n)?;
                        if sign == 0 {
                            continue;
                        }
                        // raise each contracted index
                        for nu_tuple in all_tuples(n, k) {
                            let mut weight = 1.0;
                            for j in 0..k {
                                weight *= ginv[(mu_tuple[j], nu_tuple[j])];
                            }
                            if weight == 0.0 {
                                continue;
                            }
                            acc += self.full(&nu_tuple, p)
                                * Complex64::new(sign as f64 * weight, 0.0);
                        }
                    }
                    out.comps[t][p] += acc * Complex64::new(norm * sg, 0.0);
                }
            }
        }
        Ok(out)
    }

    /// Co-derivative `-star d star`.
    pub fn codifferential(&self, frame: &Vielbein) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::InvalidArgument(
                "codifferential of a 0-form is zero by degree count".into(),
            ));
        }
        let star = self.hodge_dual(frame)?;
        let dstar = star.exterior_derivative()?;
        Ok(dstar.hodge_dual(frame)?.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Clifford action `c(omega) = omega_{mu_1..mu_p} gamma^{mu_1}..gamma^{mu_p}`
    /// with the full Einstein sum over all index tuples and
    /// `gamma^mu = e^mu_a gamma^a`.
    pub fn clifford_action(&self, rep: &GammaRep, frame: &Vielbein) -> Result<MatrixField> {
        self.grid.check_same(frame.grid())?;
        let n = self.grid.axes();
        if rep.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "gamma representation has {} indices, grid has {n} axes",
                rep.n()
            )));
        }
        let k = self.degree;
        let dim = rep.dim();
        if frame.is_flat() {
            // constant gamma products per sorted tuple, antisymmetrized
            let mut result_const: Vec<CMatrix> = Vec::with_capacity(self.tuples.len());
            for tuple in &self.tuples {
                let mut acc = CMatrix::zeros(dim, dim);
                for perm in all_tuples(k, k) {
                    // permutations of range 0..k (skip repeats)
                    if let Some((sorted, sign)) = sort_with_sign(&perm) {
                        if sorted != (0..k).collect::<Vec<_>>() {
                            continue;
                        }
                        let mut prod = identity(dim);
                        for &slot in &perm {
                            prod = prod * rep.gamma(tuple[slot]);
                        }
                        acc += prod * Complex64::new(sign, 0.0);
                    }
                }
                result_const.push(acc);
            }
            if k == 0 {
                result_const[0] = identity(dim);
            }
            // sum over sorted tuples with their component fields
            let pts = self.grid.num_points();
            let mut data = vec![Complex64::ZERO; pts * dim * dim];
            for (t, mat) in result_const.iter().enumerate() {
                for p in 0..pts {
                    let w = self.comps[t][p];
                    if w == Complex64::ZERO {
                        continue;
                    }
                    for r in 0..dim {
                        for s in 0..dim {
                            data[p * dim * dim + r * dim + s] += w * mat[(r, s)];
                        }
                    }
                }
            }
            Ok(MatrixField::PerPoint { dim, data })
        } else {
            let pts = self.grid.num_points();
            let mut data = vec![Complex64::ZERO; pts * dim * dim];
            for p in 0..pts {
                // local gamma^mu = e^mu_a gamma^a
                let gammas_local: Vec<CMatrix> = (0..n)
                    .map(|mu| {
                        let mut g = CMatrix::zeros(dim, dim);
                        for a in 0..n {
                            let w = frame.e_inv(p, mu, a);
                            if w != 0.0 {
                                g += rep.gamma(a) * Complex64::new(w, 0.0);
                            }
                        }
                        g
                    })
                    .collect();
                let mut acc = CMatrix::zeros(dim, dim);
                if k == 0 {
                    acc = identity(dim) * self.comps[0][p];
                } else {
                    for tuple in all_tuples(n, k) {
                        let w = self.full(&tuple, p);
                        if w == Complex64::ZERO {
                            continue;
                        }
                        let mut prod = identity(dim);
                        for &mu in &tuple {
                            prod = prod * &gammas_local[mu];
                        }
                        acc += prod * w;
                    }
                }
                for r in 0..dim {
                    for s in 0..dim {
                        data[p * dim * dim + r * dim + s] = acc[(r, s)];
                    }
                }
            }
            Ok(MatrixField::PerPoint { dim, data })
        }
    }
}

/// d of a 0-form.
pub fn gradient(f: &ScalarField) -> Result<DifferentialForm> {
    DifferentialForm::from_scalar(f).exterior_derivative()
}

/// The metric volume form, `star` of the unit 0-form.
pub fn volume_form(frame: &Vielbein) -> Result<DifferentialForm> {
    let one = ScalarField::constant(frame.grid(), Complex64::new(1.0, 0.0));
    DifferentialForm::from_scalar(&one).hodge_dual(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn flat4() -> (TorusGrid, Vielbein) {
        let grid = TorusGrid::standard(4, 4).unwrap();
        let frame = Vielbein::flat(&grid);
        (grid, frame)
    }

    /// Independent oracle: Hodge of dx^0 in flat dimension 4 by literal
    /// application of the epsilon formula over all index tuples.
    #[test]
    fn hodge_of_dx0_matches_epsilon_brute_force() {
        let (grid, frame) = flat4();
        let mut comps = vec![ScalarField::constant(&grid, Complex64::ZERO); 4];
        comps[0] = ScalarField::constant(&grid, Complex64::new(1.0, 0.0));
        let omega = DifferentialForm::one_form(&grid, &comps).unwrap();
        let star = omega.hodge_dual(&frame).unwrap();
        // brute force: (star w)_{t} = (1/3!) eps_{a t1 t2 t3} w_a
        for tuple in sorted_tuples(4, 3) {
            let mut expect = Complex64::ZERO;
            for a in 0..4 {
                let mut full = vec![a];
                full.extend_from_slice(&tuple);
                let sign = levi_civita_sign(&full, 4).unwrap();
                let w_a = if a == 0 { 1.0 } else { 0.0 };
                expect += Complex64::new(sign as f64 * w_a / 6.0, 0.0);
            }
            let got = star.comp(&tuple, 0);
            assert!((got - expect).norm() < 1e-14);
            if tuple == vec![1, 2, 3] {
                assert!((got - Complex64::new(1.0 / 6.0, 0.0)).norm() < 1e-14);
            } else {
                assert!(got.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn star_of_scalar_and_volume_form() {
        let (grid, frame) = flat4();
        let f = ScalarField::from_fn(&grid, |x| Complex64::new(x[0].sin() + 2.0, 0.0));
        let f0 = DifferentialForm::from_scalar(&f);
        let star_f = f0.hodge_dual(&frame).unwrap();
        // star star f = f
        let back = star_f.hodge_dual(&frame).unwrap();
        assert!(back.max_abs_diff(&f0) < 1e-13);
        // star of the volume form is the constant 0-form 1
        let vol = volume_form(&frame).unwrap();
        let one = vol.hodge_dual(&frame).unwrap();
        assert!(
            one.max_abs_diff(&DifferentialForm::from_scalar(&ScalarField::constant(
                &grid,
                Complex64::new(1.0, 0.0)
            ))) < 1e-13
        );
    }

    #[test]
    fn star_star_sign_on_random_forms() {
        let (grid, frame) = flat4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for k in 0..=4usize {
            let form = DifferentialForm::from_fn(&grid, k, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
            .unwrap();
            let twice = form.hodge_dual(&frame).unwrap().hodge_dual(&frame).unwrap();
            let sign = if (k * (4 - k)) % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                twice.max_abs_diff(&form.scale(Complex64::new(sign, 0.0))) < 1e-12,
                "star star sign failed at degree {k}"
            );
        }
    }

    #[test]
    fn d_squared_vanishes_spectrally() {
        let grid = TorusGrid::standard(4, 8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k in 0..=2usize {
            // band-limited random components
            let form = {
                let mut form = DifferentialForm::zero(&grid, k).unwrap();
                for t in 0..form.tuples.len() {
                    let a: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                    for p in 0..grid.num_points() {
                        let x = grid.coords(p);
                        form.comps[t][p] = Complex64::new(
                            a[0] * x[0].sin() + a[1] * (x[1] + x[2]).cos() + a[2] * x[3].sin()
                                + a[3],
                            0.0,
                        );
                    }
                }
                form
            };
            let dd = form
                .exterior_derivative()
                .unwrap()
                .exterior_derivative()
                .unwrap();
            assert!(dd.max_abs() < 1e-10, "d^2 != 0 at degree {k}");
        }
    }

    #[test]
    fn d_of_constant_vanishes_exactly() {
        let (grid, _) = flat4();
        let f = ScalarField::constant(&grid, Complex64::new(3.5, -1.0));
        let df = gradient(&f).unwrap();
        assert!(df.max_abs() == 0.0 || df.max_abs() < 1e-15);
    }

    #[test]
    fn codifferential_of_f_volume_equals_minus_star_df() {
        let grid = TorusGrid::standard(4, 8).unwrap();
        let frame = Vielbein::flat(&grid);
        let f = ScalarField::from_fn(&grid, |x| {
            Complex64::new(x[0].sin() + 0.5 * (x[1]).cos(), 0.0)
        });
        let f_vol = volume_form(&frame).unwrap().mul_scalar(&f);
        let delta = f_vol.codifferential(&frame).unwrap();
        let star_df = gradient(&f).unwrap().hodge_dual(&frame).unwrap();
        assert!(delta.max_abs_diff(&star_df.scale(Complex64::new(-1.0, 0.0))) < 1e-11);
    }

    #[test]
    fn clifford_action_of_coordinate_one_form_is_gamma() {
        let (grid, frame) = flat4();
        let rep = GammaRep::euclidean(2).unwrap();
        for mu in 0..4 {
            let mut comps = vec![ScalarField::constant(&grid, Complex64::ZERO); 4];
            comps[mu] = ScalarField::constant(&grid, Complex64::new(1.0, 0.0));
            let omega = DifferentialForm::one_form(&grid, &comps).unwrap();
            let c = omega.clifford_action(&rep, &frame).unwrap();
            assert!(c.max_abs_diff(&MatrixField::constant(rep.gamma(mu).clone())) < 1e-14);
        }
        // c of a 0-form is multiplication
        let f = ScalarField::from_fn(&grid, |x| Complex64::new(x[0].cos(), 0.1));
        let c0 = DifferentialForm::from_scalar(&f)
            .clifford_action(&rep, &frame)
            .unwrap();
        for p in [0usize, 3, 17] {
            assert!(
                crate::linalg::max_abs_diff(&c0.matrix_at(p), &(identity(4) * f.at(p))) < 1e-14
            );
        }
    }

    #[test]
    fn general_metric_hodge_conformal_invariance_on_two_forms() {
        // in dimension 4 the Hodge dual of a 2-form does not see a
        // constant conformal rescaling: sqrt(det g) g^.. g^.. = c^4 c^-4
        let (grid, flat_frame) = flat4();
        let metric = crate::geometry::metric::MetricField::from_fn(&grid, |_| {
            nalgebra::DMatrix::identity(4, 4) * 4.0
        });
        let frame = Vielbein::from_metric(&metric).unwrap();
        assert!(!frame.is_flat());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let form = DifferentialForm::from_fn(&grid, 2, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), 0.0)
        })
        .unwrap();
        let a = form.hodge_dual(&flat_frame).unwrap();
        let b = form.hodge_dual(&frame).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
        // while on 1-forms it scales by c^{4-2} = 1/... c^4 * c^{-2} with c^2 = 4
        let one = DifferentialForm::from_fn(&grid, 1, |t, _| {
            Complex64::new(1.0 + t[0] as f64, 0.0)
        })
        .unwrap();
        let a1 = one.hodge_dual(&flat_frame).unwrap().scale(Complex64::new(4.0, 0.0));
        let b1 = one.hodge_dual(&frame).unwrap();
        assert!(a1.max_abs_diff(&b1) < 1e-12);
    }
}
