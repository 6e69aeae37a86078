//! Connections, contorsion, torsion tensors, their classification, and the
//! lift to the spin bundle.
//!
//! Geodesic preservation is tested algebraically (antisymmetry of the
//! contorsion) rather than by integrating geodesics, and the lift rejects
//! non-orthogonal connections instead of projecting them.

use crate::clifford::GammaRep;
use crate::error::{ensure_identity, Error, Result};
use crate::geometry::field::{MatrixField, ScalarField};
use crate::geometry::forms::{gradient, volume_form, DifferentialForm};
use crate::geometry::grid::TorusGrid;
use crate::geometry::metric::{MetricField, Vielbein};
use crate::linalg::CMatrix;
use num_complex::Complex64;

/// Real (2,1)-tensor field `T^lambda_{mu nu}`, `lambda` fastest last.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    grid: TorusGrid,
    n: usize,
    /// `data[p * n^3 + lambda * n^2 + mu * n + nu]`
    data: Vec<f64>,
}

impl ConnectionField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        let n = grid.axes();
        ConnectionField {
            grid: grid.clone(),
            n,
            data: vec![0.0; grid.num_points() * n * n * n],
        }
    }

    pub fn from_fn(grid: &TorusGrid, mut f: impl FnMut(&[f64], usize, usize, usize) -> f64) -> Self {
        let n = grid.axes();
        let mut out = ConnectionField::zeros(grid);
        for p in 0..grid.num_points() {
            let x = grid.coords(p);
            for l in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        out.set(p, l, mu, nu, f(&x, l, mu, nu));
                    }
                }
            }
        }
        out
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, lambda: usize, mu: usize, nu: usize) -> f64 {
        let n = self.n;
        self.data[p * n * n * n + lambda * n * n + mu * n + nu]
    }

    pub fn set(&mut self, p: usize, lambda: usize, mu: usize, nu: usize, v: f64) {
        let n = self.n;
        self.data[p * n * n * n + lambda * n * n + mu * n + nu] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ConnectionField) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Contorsion: upper components `K^lambda_{mu nu}` plus the flattened
/// `K_{lambda mu nu} = g_{lambda rho} K^rho_{mu nu}`.
#[derive(Debug, Clone)]
pub struct Contorsion {
    pub upper: ConnectionField,
    /// Same layout as `upper`, all indices down.
    pub lower: ConnectionField,
}

impl Contorsion {
    pub fn grid(&self) -> &TorusGrid {
        self.upper.grid()
    }

    pub fn n(&self) -> usize {
        self.upper.n()
    }

    /// Builds the pair from upper components and a metric.
    pub fn from_upper(upper: ConnectionField, g: &MetricField) -> Self {
        let n = upper.n();
        let mut lower = ConnectionField::zeros(upper.grid());
        for p in 0..upper.grid().num_points() {
            for l in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        let v: f64 = (0..n)
                            .map(|rho| g.entry(p, l, rho) * upper.get(p, rho, mu, nu))
                            .sum();
                        lower.set(p, l, mu, nu, v);
                    }
                }
            }
        }
        Contorsion { upper, lower }
    }

    /// Builds the pair from lowered components and a metric.
    pub fn from_lower(lower: ConnectionField, frame: &Vielbein) -> Self {
        let n = lower.n();
        let mut upper = ConnectionField::zeros(lower.grid());
        for p in 0..lower.grid().num_points() {
            let ginv = frame.inverse_metric_at(p);
            for l in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        let v: f64 = (0..n)
                            .map(|rho| ginv[(l, rho)] * lower.get(p, rho, mu, nu))
                            .sum();
                        upper.set(p, l, mu, nu, v);
                    }
                }
            }
        }
        Contorsion { upper, lower }
    }

    /// Max deviation of `lower` from `g . upper`.
    pub fn lowering_dev(&self, g: &MetricField) -> f64 {
        let rebuilt = Contorsion::from_upper(self.upper.clone(), g);
        self.lower.max_abs_diff(&rebuilt.lower)
    }
}

/// Levi-Civita connection of a metric, from the standard formula.
pub fn christoffel(g: &MetricField) -> Result<ConnectionField> {
    let grid = g.grid().clone();
    let n = g.n();
    // reject singular metrics up front
    for p in 0..grid.num_points() {
        if g.at(p).determinant().abs() < 1e-12 {
            return Err(Error::NotPositiveDefinite { point: p });
        }
    }
    let frame = Vielbein::from_metric(g)?;
    // dg[rho][mu][nu] = partial_rho g_{mu nu}
    let mut dg = vec![vec![vec![Vec::new(); n]; n]; n];
    for mu in 0..n {
        for nu in 0..n {
            let comp = g.component_field(mu, nu);
            for rho in 0..n {
                dg[rho][mu][nu] = comp.partial(rho).data().to_vec();
            }
        }
    }
    let mut out = ConnectionField::zeros(&grid);
    for p in 0..grid.num_points() {
        let ginv = frame.inverse_metric_at(p);
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let mut acc = 0.0;
                    for rho in 0..n {
                        acc += 0.5
                            * ginv[(l, rho)]
                            * (dg[mu][rho][nu][p].re + dg[nu][rho][mu][p].re
                                - dg[rho][mu][nu][p].re);
                    }
                    out.set(p, l, mu, nu, acc);
                }
            }
        }
    }
    Ok(out)
}

/// Contorsion of a connection: `K = Gamma - christoffel(g)`.
pub fn contorsion(conn: &ConnectionField, g: &MetricField) -> Result<Contorsion> {
    conn.grid().check_same(g.grid())?;
    let lc = christoffel(g)?;
    let n = conn.n();
    let mut upper = ConnectionField::zeros(conn.grid());
    for p in 0..conn.grid().num_points() {
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    upper.set(p, l, mu, nu, conn.get(p, l, mu, nu) - lc.get(p, l, mu, nu));
                }
            }
        }
    }
    Ok(Contorsion::from_upper(upper, g))
}

/// Torsion tensor `T^lambda_{mu nu} = Gamma^lambda_{mu nu} - Gamma^lambda_{nu mu}`
/// in the coordinate basis.
pub fn torsion_tensor(conn: &ConnectionField) -> ConnectionField {
    let n = conn.n();
    let mut out = ConnectionField::zeros(conn.grid());
    for p in 0..conn.grid().num_points() {
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    out.set(
                        p,
                        l,
                        mu,
                        nu,
                        conn.get(p, l, mu, nu) - conn.get(p, l, nu, mu),
                    );
                }
            }
        }
    }
    out
}

/// Classification flags of a contorsion, with the measured deviations.
#[derive(Debug, Clone, Copy)]
pub struct ContorsionClass {
    pub orthogonal: bool,
    pub geodesic_preserving: bool,
    pub totally_antisymmetric: bool,
    pub orthogonal_dev: f64,
    pub geodesic_dev: f64,
    pub totally_antisymmetric_dev: f64,
}

/// Classifies a contorsion: orthogonal iff `K_{lmn} = -K_{nml}` (skew in
/// slots 1 and 3), geodesic preserving iff `K^l_{mn} = -K^l_{nm}`, totally
/// antisymmetric iff the flattened tensor is skew in every adjacent pair.
pub fn classify_contorsion(k: &Contorsion, tol: f64) -> ContorsionClass {
    let n = k.n();
    let grid = k.grid();
    let mut orth: f64 = 0.0;
    let mut geo: f64 = 0.0;
    let mut total: f64 = 0.0;
    for p in 0..grid.num_points() {
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    orth = orth.max((k.lower.get(p, l, mu, nu) + k.lower.get(p, nu, mu, l)).abs());
                    geo = geo.max((k.upper.get(p, l, mu, nu) + k.upper.get(p, l, nu, mu)).abs());
                    total = total
                        .max((k.lower.get(p, l, mu, nu) + k.lower.get(p, mu, l, nu)).abs())
                        .max((k.lower.get(p, l, mu, nu) + k.lower.get(p, l, nu, mu)).abs());
                }
            }
        }
    }
    let class = ContorsionClass {
        orthogonal: orth <= tol,
        geodesic_preserving: geo <= tol,
        totally_antisymmetric: total <= tol,
        orthogonal_dev: orth,
        geodesic_dev: geo,
        totally_antisymmetric_dev: total,
    };
    // both conditions together are the same statement as total antisymmetry
    debug_assert_eq!(
        class.orthogonal && class.geodesic_preserving,
        class.totally_antisymmetric
    );
    class
}

/// Spin connection: the matrix term added to `partial_mu`, one per axis.
#[derive(Debug, Clone)]
pub struct SpinConnection {
    pub omega: Vec<MatrixField>,
}

impl SpinConnection {
    /// Largest trace magnitude over points and axes; the lift of an
    /// orthogonal connection is built from antisymmetrized gamma pairs,
    /// hence traceless.
    pub fn max_trace(&self, grid: &TorusGrid) -> f64 {
        let mut dev: f64 = 0.0;
        for om in &self.omega {
            for p in 0..grid.num_points() {
                dev = dev.max(om.matrix_at(p).trace().norm());
            }
        }
        dev
    }
}

/// Lift of an orthogonal connection to the spinor bundle:
/// `omega_mu = (1/4)(Gamma^rho_{mu nu} g_{rho lambda}
///              - g_{ab} e^b_lambda partial_mu e^a_nu) gamma^nu gamma^lambda`.
///
/// The connection must be orthogonal; its contorsion is classified and a
/// non-orthogonal input is rejected.
pub fn spin_lift(
    conn: &ConnectionField,
    rep: &GammaRep,
    frame: &Vielbein,
    tol: f64,
) -> Result<SpinConnection> {
    conn.grid().check_same(frame.grid())?;
    let k = contorsion(conn, frame.metric())?;
    let class = classify_contorsion(&k, tol);
    if !class.orthogonal {
        return Err(Error::InvalidArgument(format!(
            "spin lift requires an orthogonal connection (skew deviation {:.3e})",
            class.orthogonal_dev
        )));
    }
    let n = conn.n();
    let grid = conn.grid();
    let dim = rep.dim();
    // partial_mu e^a_nu as complex fields
    let mut de = vec![vec![vec![Vec::new(); n]; n]; n]; // [mu][a][nu] -> per-point
    for a in 0..n {
        for nu in 0..n {
            let comp = ScalarField::new(
                grid.clone(),
                (0..grid.num_points())
                    .map(|p| Complex64::new(frame.e(p, a, nu), 0.0))
                    .collect(),
            );
            for mu in 0..n {
                de[mu][a][nu] = comp.partial(mu).data().to_vec();
            }
        }
    }
    let g = frame.metric();
    let mut omega = Vec::with_capacity(n);
    for mu in 0..n {
        let field = MatrixField::per_point_from_fn(grid, dim, |p| {
            let mut m = CMatrix::zeros(dim, dim);
            for nu in 0..n {
                for lambda in 0..n {
                    // Gamma^rho_{mu nu} g_{rho lambda}
                    let mut coeff: f64 = (0..n)
                        .map(|rho| conn.get(p, rho, mu, nu) * g.entry(p, rho, lambda))
                        .sum();
                    // - g_{ab} e^b_lambda partial_mu e^a_nu (orthonormal frame
                    // metric is delta_ab)
                    for a in 0..n {
                        coeff -= frame.e(p, a, lambda) * de[mu][a][nu][p].re;
                    }
                    if coeff != 0.0 {
                        m += rep.gamma(nu) * rep.gamma(lambda) * Complex64::new(0.25 * coeff, 0.0);
                    }
                }
            }
            m
        });
        omega.push(field);
    }
    Ok(SpinConnection { omega })
}

/// Spin lift of a totally antisymmetric contorsion on the flat frame,
/// `omega_mu = (1/4) K_{nu lambda mu} gamma^nu gamma^lambda`.
pub fn spin_lift_contorsion(
    k: &Contorsion,
    rep: &GammaRep,
    frame: &Vielbein,
    tol: f64,
) -> Result<SpinConnection> {
    if !frame.is_flat() {
        return Err(Error::OutOfScope(
            "contorsion lift is wired for the flat frame; pass the full connection otherwise"
                .into(),
        ));
    }
    spin_lift(&k.upper, rep, frame, tol)
}

/// Contorsion whose flattened tensor is `-star omega` for a 1-form
/// `omega` in dimension 4. All classification flags come out true.
pub fn torsion_from_oneform(
    omega: &DifferentialForm,
    frame: &Vielbein,
) -> Result<Contorsion> {
    let grid = omega.grid();
    if grid.axes() != 4 {
        return Err(Error::InvalidArgument(format!(
            "torsion 3-form requires dimension 4, grid has {}",
            grid.axes()
        )));
    }
    if omega.degree() != 1 {
        return Err(Error::InvalidArgument("expected a 1-form".into()));
    }
    let star = omega.hodge_dual(frame)?;
    let n = 4;
    let mut lower = ConnectionField::zeros(grid);
    let mut max_imag: f64 = 0.0;
    for p in 0..grid.num_points() {
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let v = -star.full(&[l, mu, nu], p);
                    max_imag = max_imag.max(v.im.abs());
                    lower.set(p, l, mu, nu, v.re);
                }
            }
        }
    }
    ensure_identity("torsion 3-form is real", max_imag, 1e-10)?;
    Ok(Contorsion::from_lower(lower, frame))
}

/// Contorsion with co-exact 3-form `delta(f nu_g) = -star d f`.
pub fn coexact_torsion(f: &ScalarField, frame: &Vielbein) -> Result<Contorsion> {
    let f_vol = volume_form(frame)?.mul_scalar(f);
    let kflat = f_vol.codifferential(frame)?;
    let grid = f.grid();
    let n = grid.axes();
    let mut lower = ConnectionField::zeros(grid);
    for p in 0..grid.num_points() {
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    lower.set(p, l, mu, nu, kflat.full(&[l, mu, nu], p).re);
                }
            }
        }
    }
    Ok(Contorsion::from_lower(lower, frame))
}

/// The lowered contorsion of a 3-form stored as a `DifferentialForm`.
pub fn contorsion_as_three_form(k: &Contorsion) -> Result<DifferentialForm> {
    let grid = k.grid();
    let mut form = DifferentialForm::zero(grid, 3)?;
    for tuple in crate::geometry::forms::sorted_tuples(k.n(), 3) {
        for p in 0..grid.num_points() {
            form.set_comp(
                &tuple,
                p,
                Complex64::new(k.lower.get(p, tuple[0], tuple[1], tuple[2]), 0.0),
            );
        }
    }
    Ok(form)
}

/// Gradient of ln|h|^2, the 1-form the twisted-unitary action generates.
pub fn log_modulus_gradient(h: &ScalarField, threshold: f64) -> Result<DifferentialForm> {
    gradient(&h.ln_abs_squared(threshold)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::prelude::*;

    fn grid4() -> TorusGrid {
        TorusGrid::standard(4, 4).unwrap()
    }

    fn random_three_form_contorsion(
        grid: &TorusGrid,
        frame: &Vielbein,
        rng: &mut impl Rng,
    ) -> Contorsion {
        let mut lower = ConnectionField::zeros(grid);
        for p in 0..grid.num_points() {
            for t in crate::geometry::forms::sorted_tuples(4, 3) {
                let v = rng.random_range(-1.0..1.0);
                // fill the full antisymmetric array
                for perm in crate::clifford::all_tuples(3, 3) {
                    if let Some(sign) = perm_sign(&perm) {
                        lower.set(p, t[perm[0]], t[perm[1]], t[perm[2]], sign * v);
                    }
                }
            }
        }
        Contorsion::from_lower(lower, frame)
    }

    fn perm_sign(perm: &[usize]) -> Option<f64> {
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if seen[p] {
                return None;
            }
            seen[p] = true;
        }
        let mut sign = 1.0;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    sign = -sign;
                }
            }
        }
        Some(sign)
    }

    #[test]
    fn christoffel_of_flat_metric_vanishes() {
        let grid = grid4();
        let lc = christoffel(&MetricField::flat(&grid)).unwrap();
        assert!(lc.max_abs() < 1e-14);
    }

    #[test]
    fn christoffel_symmetric_and_metric_compatible() {
        // smooth periodic conformal metric on T^2
        let grid = TorusGrid::standard(2, 32).unwrap();
        let g = MetricField::from_fn(&grid, |x| {
            DMatrix::identity(2, 2) * (2.0 + 0.3 * x[0].sin() + 0.2 * (x[1]).cos())
        });
        let lc = christoffel(&g).unwrap();
        // symmetry in the lower indices
        for p in 0..grid.num_points() {
            for l in 0..2 {
                for mu in 0..2 {
                    for nu in 0..2 {
                        assert!((lc.get(p, l, mu, nu) - lc.get(p, l, nu, mu)).abs() < 1e-12);
                    }
                }
            }
        }
        // nabla g = 0: partial_rho g_{mu nu} = Gamma^l_{rho mu} g_{l nu}
        //                                    + Gamma^l_{rho nu} g_{mu l}
        let mut max_dev: f64 = 0.0;
        for mu in 0..2 {
            for nu in 0..2 {
                let comp = g.component_field(mu, nu);
                for rho in 0..2 {
                    let dgd = comp.partial(rho);
                    for p in 0..grid.num_points() {
                        let mut rhs = 0.0;
                        for l in 0..2 {
                            rhs += lc.get(p, l, rho, mu) * g.entry(p, l, nu)
                                + lc.get(p, l, rho, nu) * g.entry(p, mu, l);
                        }
                        max_dev = max_dev.max((dgd.at(p).re - rhs).abs());
                    }
                }
            }
        }
        assert!(max_dev < 1e-9, "metric compatibility dev {max_dev}");
    }

    #[test]
    fn contorsion_of_levi_civita_is_zero_and_flat_passthrough() {
        let grid = grid4();
        let flat = MetricField::flat(&grid);
        let lc = christoffel(&flat).unwrap();
        let k = contorsion(&lc, &flat).unwrap();
        assert!(k.upper.max_abs() < 1e-13);

        // flat metric: contorsion returns the connection unchanged
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let conn = ConnectionField::from_fn(&grid, |_, _, _, _| rng.random_range(-1.0..1.0));
        let k = contorsion(&conn, &flat).unwrap();
        assert!(k.upper.max_abs_diff(&conn) < 1e-13);
        assert!(k.lowering_dev(&flat) < 1e-13);
    }

    #[test]
    fn torsion_is_twice_antisymmetric_contorsion() {
        let grid = grid4();
        let frame = Vielbein::flat(&grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let k = random_three_form_contorsion(&grid, &frame, &mut rng);
        let t = torsion_tensor(&k.upper);
        // T = 2K for geodesic-preserving contorsion
        let mut dev: f64 = 0.0;
        for p in 0..grid.num_points() {
            for l in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        dev = dev.max((t.get(p, l, mu, nu) - 2.0 * k.upper.get(p, l, mu, nu)).abs());
                    }
                }
            }
        }
        assert!(dev < 1e-13);

        // symmetric connection: torsion vanishes
        let sym = ConnectionField::from_fn(&grid, |x, l, mu, nu| {
            (l as f64 + 1.0) * ((mu + nu) as f64 + x[0].sin())
        });
        assert!(torsion_tensor(&sym).max_abs() < 1e-13);
    }

    #[test]
    fn classify_contorsion_cases() {
        let grid = grid4();
        let frame = Vielbein::flat(&grid);
        let flat = MetricField::flat(&grid);
        let tol = 1e-12;

        // zero contorsion: everything true
        let zero = Contorsion::from_upper(ConnectionField::zeros(&grid), &flat);
        let c = classify_contorsion(&zero, tol);
        assert!(c.orthogonal && c.geodesic_preserving && c.totally_antisymmetric);

        // 3-form contorsion: everything true
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let k3 = random_three_form_contorsion(&grid, &frame, &mut rng);
        let c = classify_contorsion(&k3, tol);
        assert!(c.orthogonal && c.geodesic_preserving && c.totally_antisymmetric);

        // symmetric in (mu nu), nonzero: geodesic preservation fails
        let mut lower = ConnectionField::zeros(&grid);
        for p in 0..grid.num_points() {
            lower.set(p, 0, 1, 2, 0.7);
            lower.set(p, 0, 2, 1, 0.7);
        }
        let ksym = Contorsion::from_lower(lower, &frame);
        let c = classify_contorsion(&ksym, tol);
        assert!(!c.geodesic_preserving);
        assert!(!c.totally_antisymmetric);

        // orthogonal but not geodesic preserving: K_{lmn} skew in (l, n) only
        let mut lower = ConnectionField::zeros(&grid);
        for p in 0..grid.num_points() {
            lower.set(p, 0, 1, 2, 0.5);
            lower.set(p, 2, 1, 0, -0.5);
        }
        let k13 = Contorsion::from_lower(lower, &frame);
        let c = classify_contorsion(&k13, tol);
        assert!(c.orthogonal && !c.geodesic_preserving && !c.totally_antisymmetric);
    }

    #[test]
    fn equivalence_on_random_fields_including_near_degenerate() {
        let grid = TorusGrid::standard(4, 4).unwrap();
        let frame = Vielbein::flat(&grid);
        let tol = 1e-12;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut disagreements = 0;
        for trial in 0..100 {
            let mut k = if trial % 3 == 0 {
                random_three_form_contorsion(&grid, &frame, &mut rng)
            } else {
                let lower = ConnectionField::from_fn(&grid, |_, _, _, _| {
                    rng.random_range(-1.0..1.0)
                });
                Contorsion::from_lower(lower, &frame)
            };
            if trial % 5 == 0 {
                // near-degenerate: noise well under the tolerance
                for v in k.lower.data.iter_mut() {
                    *v += rng.random_range(-1e-14..1e-14);
                }
                k = Contorsion::from_lower(k.lower.clone(), &frame);
            }
            let c = classify_contorsion(&k, tol);
            if (c.orthogonal && c.geodesic_preserving) != c.totally_antisymmetric {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn spin_lift_flat_levi_civita_is_free() {
        let grid = grid4();
        let frame = Vielbein::flat(&grid);
        let rep = GammaRep::euclidean(2).unwrap();
        let lc = ConnectionField::zeros(&grid);
        let lift = spin_lift(&lc, &rep, &frame, 1e-12).unwrap();
        for om in &lift.omega {
            assert!(om.max_abs() < 1e-13);
        }
    }

    #[test]
    fn spin_lift_of_three_form_matches_quarter_contraction() {
        let grid = grid4();
        let frame = Vielbein::flat(&grid);
        let rep = GammaRep::euclidean(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let k = random_three_form_contorsion(&grid, &frame, &mut rng);
        let lift = spin_lift_contorsion(&k, &rep, &frame, 1e-12).unwrap();
        // omega_mu = (1/4) K_{nu lambda mu} gamma^nu gamma^lambda
        for mu in 0..4 {
            let expect = MatrixField::per_point_from_fn(&grid, 4, |p| {
                let mut m = CMatrix::zeros(4, 4);
                for nu in 0..4 {
                    for lambda in 0..4 {
                        let v = k.lower.get(p, nu, lambda, mu);
                        if v != 0.0 {
                            m += rep.gamma(nu) * rep.gamma(lambda)
                                * Complex64::new(0.25 * v, 0.0);
                        }
                    }
                }
                m
            });
            assert!(lift.omega[mu].max_abs_diff(&expect) < 1e-12);
        }
        // traceless
        assert!(lift.max_trace(&grid) < 1e-12);
    }

    #[test]
    fn spin_lift_rejects_non_orthogonal_connection() {
        let grid = grid4();
        let frame = Vielbein::flat(&grid);
        let rep = GammaRep::euclidean(2).unwrap();
        let mut conn = ConnectionField::zeros(&grid);
        for p in 0..grid.num_points() {
            conn.set(p, 0, 1, 2, 0.4);
            conn.set(p, 0, 2, 1, 0.4); // symmetric part, not orthogonal
        }
        assert!(spin_lift(&conn, &rep, &frame, 1e-12).is_err());
    }

    #[test]
    fn torsion_from_oneform_roundtrip_and_classification() {
        let grid = grid4();
        let frame = Vielbein::flat(&grid);
        let omega = DifferentialForm::one_form(
            &grid,
            &[
                ScalarField::from_fn(&grid, |x| Complex64::new(x[0].sin(), 0.0)),
                ScalarField::from_fn(&grid, |x| Complex64::new(x[1].cos(), 0.0)),
                ScalarField::constant(&grid, Complex64::new(0.3, 0.0)),
                ScalarField::constant(&grid, Complex64::ZERO),
            ],
        )
        .unwrap();
        let k = torsion_from_oneform(&omega, &frame).unwrap();
        let c = classify_contorsion(&k, 1e-12);
        assert!(c.orthogonal && c.geodesic_preserving && c.totally_antisymmetric);
        // componentwise K = -(star omega)
        let star = omega.hodge_dual(&frame).unwrap();
        for p in [0usize, 5, 100] {
            for t in crate::geometry::forms::sorted_tuples(4, 3) {
                assert!(
                    (Complex64::new(k.lower.get(p, t[0], t[1], t[2]), 0.0)
                        + star.comp(&t, p))
                    .norm()
                        < 1e-13
                );
            }
        }
        // round trip through the Hodge dual: star(K) = omega since
        // star star = -1 on 1-forms in dimension 4
        let back = contorsion_as_three_form(&k)
            .unwrap()
            .hodge_dual(&frame)
            .unwrap();
        assert!(back.max_abs_diff(&omega) < 1e-12);

        // omega = 0 gives K = 0
        let zero = DifferentialForm::zero(&grid, 1).unwrap();
        let k0 = torsion_from_oneform(&zero, &frame).unwrap();
        assert!(k0.lower.max_abs() < 1e-14);
    }

    #[test]
    fn coexact_torsion_equals_minus_star_df() {
        let grid = TorusGrid::standard(4, 8).unwrap();
        let frame = Vielbein::flat(&grid);
        let f = ScalarField::from_fn(&grid, |x| Complex64::new(x[1].sin(), 0.0));
        let k = coexact_torsion(&f, &frame).unwrap();
        let expect = torsion_from_oneform(&gradient(&f).unwrap(), &frame).unwrap();
        assert!(k.lower.max_abs_diff(&expect.lower) < 1e-11);
        let c = classify_contorsion(&k, 1e-10);
        assert!(c.totally_antisymmetric);

        // constant f gives zero torsion
        let konst = coexact_torsion(&ScalarField::constant(&grid, Complex64::new(2.0, 0.0)), &frame)
            .unwrap();
        assert!(konst.lower.max_abs() < 1e-12);
    }
}
