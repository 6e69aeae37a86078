//! Small helpers on dense complex matrices.
//!
//! Everything in the toolkit works with matrices of dimension `2^m <= 8`,
//! so plain `DMatrix<Complex64>` is used throughout.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    max_abs(&(a - b))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Deviation of `m` from the identity.
pub fn identity_dev(m: &CMatrix) -> f64 {
    max_abs_diff(m, &identity(m.nrows()))
}

/// Deviation from unitarity, max(|U†U - 1|, |UU† - 1|).
pub fn unitarity_dev(m: &CMatrix) -> f64 {
    let ad = m.adjoint();
    identity_dev(&(&ad * m)).max(identity_dev(&(m * &ad)))
}

pub fn selfadjoint_dev(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Entrywise complex conjugate (no transpose).
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Matrix exponential (Padé with scaling and squaring, via nalgebra).
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

/// Eigenvalues of a selfadjoint matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Frobenius inner product <a, b> = sum conj(a_ij) b_ij.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_reproduces_rotation() {
        // exp(i theta sigma_3) = diag(e^{i theta}, e^{-i theta})
        let theta = 0.7;
        let mut m = zeros(2);
        m[(0, 0)] = c(0.0, theta);
        m[(1, 1)] = c(0.0, -theta);
        let e = expm(&m);
        assert!((e[(0, 0)] - c(theta.cos(), theta.sin())).norm() < 1e-14);
        assert!((e[(1, 1)] - c(theta.cos(), -theta.sin())).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_accuracy_against_series() {
        // random 4x4, compare against a long Taylor sum
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = CMatrix::from_fn(4, 4, |_, _| {
            c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
        });
        let mut series = identity(4);
        let mut term = identity(4);
        for k in 1..40 {
            term = (&term * &a) / c(k as f64, 0.0);
            series += &term;
        }
        assert!(max_abs_diff(&expm(&a), &series) < 1e-13);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli() {
        let mut s3 = zeros(2);
        s3[(0, 0)] = ONE;
        s3[(1, 1)] = -ONE;
        let ev = hermitian_eigenvalues(&s3);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }
}
